#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "cropscan/tensor.hpp"

namespace cropscan {

/// W x H x B intensity block with one wavelength per band. Wavelengths are
/// strictly ascending within [400, 1000] nm. Blocks are band-major:
/// value(b, y, x) = data[(b*height + y)*width + x]. Immutable once built;
/// calibration returns a new cube.
struct DataCube {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> wavelengths_nm;
    std::vector<double> raw;
    std::vector<double> calibrated;  // empty until calibrate()

    std::size_t band_count() const { return wavelengths_nm.size(); }
    bool is_calibrated() const { return !calibrated.empty(); }

    double raw_at(std::size_t band, std::size_t y, std::size_t x) const {
        return raw[(band * height + y) * width + x];
    }
    double calibrated_at(std::size_t band, std::size_t y, std::size_t x) const {
        return calibrated[(band * height + y) * width + x];
    }
};

/// Validates the invariants above and assembles a cube.
DataCube make_cube(std::size_t width, std::size_t height,
                   std::vector<double> wavelengths_nm, std::vector<double> raw);

/// Per-band affine sensor correction; gains must be positive.
struct CalibrationProfile {
    std::vector<double> gains;
    std::vector<double> offsets;

    static CalibrationProfile identity(std::size_t bands);
};

/// calibrated = max(0, gain * raw + offset), band by band.
DataCube calibrate(const DataCube& cube, const CalibrationProfile& profile);

/// Index of the band nearest the target wavelength; equidistant pairs
/// resolve to the lower wavelength.
std::size_t nearest_band(const DataCube& cube, double wavelength_nm);

/// R/G/B = calibrated bands nearest 660/550/470 nm, each min-max normalized
/// over its own band (constant band -> zeros). Requires a calibrated cube
/// whose bands span [470, 660] nm.
Tensor project_to_rgb(const DataCube& cube);

/// Deterministic cube whose RGB projection reproduces the scene up to
/// per-channel min-max normalization: the three bands nearest 660/550/470 nm
/// carry the scene channels affinely; remaining bands hold a wavelength-
/// interpolated mix plus low-level seeded noise.
DataCube synthesize_cube(const Tensor& scene,
                         const std::vector<double>& wavelengths_nm,
                         std::uint64_t seed);

// Cube file layout (little-endian): magic "CSCB0001", u32 width, u32 height,
// u32 band count, f32 wavelengths[bands], f32 raw block in band-major order.
void save_cube(const DataCube& cube, const std::filesystem::path& path);
DataCube load_cube(const std::filesystem::path& path);

}  // namespace cropscan
