#pragma once

#include <filesystem>

#include "cropscan/tensor.hpp"

namespace cropscan {

/// Decodes a PPM (binary P6) or PNG file to [3,H,W] with values on the
/// 8-bit grid k/255. Grayscale inputs are replicated to 3 channels; alpha
/// is dropped.
Tensor read_image(const std::filesystem::path& path);

/// Binary P6, maxval 255; values are clamped to [0,1] and rounded.
void write_ppm(const Tensor& image, const std::filesystem::path& path);

/// 8-bit RGB PNG.
void write_png(const Tensor& image, const std::filesystem::path& path);

/// Writes by extension (.ppm or .png).
void write_image(const Tensor& image, const std::filesystem::path& path);

/// Bilinear resampling to [3,out_h,out_w]. Identity when sizes match.
Tensor resize_bilinear(const Tensor& image, std::size_t out_h,
                       std::size_t out_w);

/// Snaps values to the 8-bit grid (round(v*255)/255 after clamping), so a
/// tensor written as PPM/PNG reads back bit-identically.
Tensor quantize_8bit(const Tensor& image);

}  // namespace cropscan
