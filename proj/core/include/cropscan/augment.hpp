#pragma once

#include <array>
#include <cstdint>

#include "cropscan/dataset.hpp"
#include "cropscan/tensor.hpp"

namespace cropscan {

/// The four label-preserving transforms applied to every original:
/// horizontal flip, vertical flip, rotation (angle sampled per image within
/// +/- rotation_max_degrees) and brightness scaling (factor sampled per
/// image within [brightness_min, brightness_max]).
struct AugmentationSpec {
    std::uint64_t seed = 0;
    double rotation_max_degrees = 15.0;
    double brightness_min = 0.8;
    double brightness_max = 1.2;
};

/// Per-image sampled parameters.
struct AugmentParams {
    double rotation_deg = 0.0;
    double brightness = 1.0;
};

Tensor flip_horizontal(const Tensor& image);
Tensor flip_vertical(const Tensor& image);

/// Rotation about the image center, bilinear resampling, zero fill outside
/// the source bounds.
Tensor rotate_bilinear(const Tensor& image, double degrees);

/// Clamped to [0,1].
Tensor scale_brightness(const Tensor& image, double factor);

/// The four variants of one image, in fixed order:
/// [hflip, vflip, rotate, brightness]. Rejects non-finite pixels.
std::array<Tensor, 4> augment_image(const Tensor& image,
                                    const AugmentParams& params);

inline constexpr std::array<const char*, 4> kTransformNames = {
    "hflip", "vflip", "rotate", "brightness"};

/// Expands a corpus five-fold: every original is kept and followed by its
/// four variants. Parameters are drawn sequentially in manifest order from
/// the spec's seeded generator; augmented records carry the original id,
/// transform name and sampled parameters. Duplicate input ids are an error.
Corpus augment_dataset(const Corpus& input, const AugmentationSpec& spec);

}  // namespace cropscan
