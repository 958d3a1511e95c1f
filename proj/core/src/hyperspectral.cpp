#include "cropscan/hyperspectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "cropscan/rng.hpp"

namespace cropscan {

namespace {

constexpr char kCubeMagic[8] = {'C', 'S', 'C', 'B', '0', '0', '0', '1'};
constexpr double kRedNm = 660.0;
constexpr double kGreenNm = 550.0;
constexpr double kBlueNm = 470.0;

void validate_wavelengths(const std::vector<double>& wavelengths) {
    if (wavelengths.empty()) throw ShapeError("cube needs at least one band");
    for (std::size_t i = 0; i < wavelengths.size(); ++i) {
        if (wavelengths[i] < 400.0 || wavelengths[i] > 1000.0)
            throw DomainError("band wavelength " +
                              std::to_string(wavelengths[i]) +
                              " nm outside [400, 1000]");
        if (i > 0 && wavelengths[i] <= wavelengths[i - 1])
            throw DomainError("band wavelengths must be strictly ascending");
    }
}

}  // namespace

DataCube make_cube(std::size_t width, std::size_t height,
                   std::vector<double> wavelengths_nm,
                   std::vector<double> raw) {
    if (width == 0 || height == 0)
        throw ShapeError("cube dimensions must be positive");
    validate_wavelengths(wavelengths_nm);
    if (raw.size() != width * height * wavelengths_nm.size())
        throw ShapeError("raw block size does not match width*height*bands");
    for (const double v : raw)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw DomainError("raw intensities must be finite and nonnegative");

    DataCube cube;
    cube.width = width;
    cube.height = height;
    cube.wavelengths_nm = std::move(wavelengths_nm);
    cube.raw = std::move(raw);
    return cube;
}

CalibrationProfile CalibrationProfile::identity(std::size_t bands) {
    CalibrationProfile profile;
    profile.gains.assign(bands, 1.0);
    profile.offsets.assign(bands, 0.0);
    return profile;
}

DataCube calibrate(const DataCube& cube, const CalibrationProfile& profile) {
    if (profile.gains.size() != cube.band_count() ||
        profile.offsets.size() != cube.band_count())
        throw ShapeError("calibration profile has " +
                         std::to_string(profile.gains.size()) +
                         " bands, cube has " +
                         std::to_string(cube.band_count()));
    for (const double g : profile.gains)
        if (!(g > 0.0)) throw DomainError("calibration gains must be positive");

    DataCube out = cube;
    out.calibrated.resize(cube.raw.size());
    const std::size_t plane = cube.width * cube.height;
    for (std::size_t b = 0; b < cube.band_count(); ++b) {
        const double gain = profile.gains[b];
        const double offset = profile.offsets[b];
        const double* src = cube.raw.data() + b * plane;
        double* dst = out.calibrated.data() + b * plane;
        for (std::size_t i = 0; i < plane; ++i)
            dst[i] = std::max(0.0, gain * src[i] + offset);
    }
    return out;
}

std::size_t nearest_band(const DataCube& cube, double wavelength_nm) {
    std::size_t best = 0;
    double best_d = std::abs(cube.wavelengths_nm[0] - wavelength_nm);
    for (std::size_t b = 1; b < cube.band_count(); ++b) {
        const double d = std::abs(cube.wavelengths_nm[b] - wavelength_nm);
        if (d < best_d) {  // strict: ascending order keeps the lower wavelength
            best_d = d;
            best = b;
        }
    }
    return best;
}

Tensor project_to_rgb(const DataCube& cube) {
    if (!cube.is_calibrated())
        throw InputError("project_to_rgb requires a calibrated cube");
    if (cube.wavelengths_nm.front() > kBlueNm ||
        cube.wavelengths_nm.back() < kRedNm)
        throw CoverageError("cube bands span [" +
                            std::to_string(cube.wavelengths_nm.front()) + ", " +
                            std::to_string(cube.wavelengths_nm.back()) +
                            "] nm; RGB projection needs [470, 660]");

    const std::size_t bands[3] = {nearest_band(cube, kRedNm),
                                  nearest_band(cube, kGreenNm),
                                  nearest_band(cube, kBlueNm)};
    const std::size_t plane = cube.width * cube.height;
    Tensor rgb({3, cube.height, cube.width});
    for (std::size_t c = 0; c < 3; ++c) {
        const double* src = cube.calibrated.data() + bands[c] * plane;
        double lo = src[0], hi = src[0];
        for (std::size_t i = 1; i < plane; ++i) {
            lo = std::min(lo, src[i]);
            hi = std::max(hi, src[i]);
        }
        double* dst = rgb.data() + c * plane;
        if (hi == lo) {
            std::memset(dst, 0, plane * sizeof(double));
        } else {
            const double inv = 1.0 / (hi - lo);
            for (std::size_t i = 0; i < plane; ++i)
                dst[i] = (src[i] - lo) * inv;
        }
    }
    return rgb;
}

DataCube synthesize_cube(const Tensor& scene,
                         const std::vector<double>& wavelengths_nm,
                         std::uint64_t seed) {
    if (scene.rank() != 3 || scene.extent(0) != 3)
        throw ShapeError("scene must be [3,H,W]");
    validate_wavelengths(wavelengths_nm);

    const std::size_t h = scene.extent(1);
    const std::size_t w = scene.extent(2);
    const std::size_t plane = h * w;
    const std::size_t bands = wavelengths_nm.size();

    // synthetic sensor range in raw counts
    constexpr double kLow = 120.0;
    constexpr double kSpan = 3600.0;

    DataCube probe;
    probe.wavelengths_nm = wavelengths_nm;
    const std::size_t anchor[3] = {
        nearest_band(probe, kRedNm),
        nearest_band(probe, kGreenNm),
        nearest_band(probe, kBlueNm),
    };

    Rng rng(mix_seed(seed, 0xC0BEULL));
    std::vector<double> raw(bands * plane);
    for (std::size_t b = 0; b < bands; ++b) {
        double* dst = raw.data() + b * plane;
        int channel = -1;
        for (int c = 0; c < 3; ++c)
            if (anchor[c] == b) channel = c;
        if (channel >= 0) {
            const double* src = scene.data() + channel * plane;
            for (std::size_t i = 0; i < plane; ++i)
                dst[i] = kLow + kSpan * src[i];
        } else {
            // off-anchor band: wavelength-weighted mix of the scene channels
            // with a touch of band-specific noise; projection never reads it
            const double wl = wavelengths_nm[b];
            const double wr = std::max(0.0, 1.0 - std::abs(wl - kRedNm) / 300.0);
            const double wg = std::max(0.0, 1.0 - std::abs(wl - kGreenNm) / 300.0);
            const double wb = std::max(0.0, 1.0 - std::abs(wl - kBlueNm) / 300.0);
            const double norm = wr + wg + wb;
            const double ripple = rng.uniform(0.95, 1.05);
            for (std::size_t i = 0; i < plane; ++i) {
                double mix = 0.0;
                if (norm > 0.0)
                    mix = (wr * scene[0 * plane + i] + wg * scene[1 * plane + i] +
                           wb * scene[2 * plane + i]) /
                          norm;
                dst[i] = (kLow + kSpan * mix) * ripple;
            }
        }
    }
    return make_cube(w, h, wavelengths_nm, std::move(raw));
}

void save_cube(const DataCube& cube, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");

    const std::uint32_t width = static_cast<std::uint32_t>(cube.width);
    const std::uint32_t height = static_cast<std::uint32_t>(cube.height);
    const std::uint32_t bands = static_cast<std::uint32_t>(cube.band_count());
    out.write(kCubeMagic, sizeof(kCubeMagic));
    out.write(reinterpret_cast<const char*>(&width), sizeof(width));
    out.write(reinterpret_cast<const char*>(&height), sizeof(height));
    out.write(reinterpret_cast<const char*>(&bands), sizeof(bands));
    for (const double wl : cube.wavelengths_nm) {
        const float f = static_cast<float>(wl);
        out.write(reinterpret_cast<const char*>(&f), sizeof(f));
    }
    for (const double v : cube.raw) {
        const float f = static_cast<float>(v);
        out.write(reinterpret_cast<const char*>(&f), sizeof(f));
    }
    if (!out) throw IoError("cube write failed: " + path.string());
}

DataCube load_cube(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open cube: " + path.string());

    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kCubeMagic, sizeof(magic)) != 0)
        throw IoError("not a cube file (bad magic): " + path.string());

    std::uint32_t width = 0, height = 0, bands = 0;
    in.read(reinterpret_cast<char*>(&width), sizeof(width));
    in.read(reinterpret_cast<char*>(&height), sizeof(height));
    in.read(reinterpret_cast<char*>(&bands), sizeof(bands));
    if (!in) throw IoError("truncated cube header: " + path.string());

    std::vector<double> wavelengths(bands);
    for (auto& wl : wavelengths) {
        float f = 0;
        in.read(reinterpret_cast<char*>(&f), sizeof(f));
        wl = f;
    }
    std::vector<double> raw(static_cast<std::size_t>(width) * height * bands);
    for (auto& v : raw) {
        float f = 0;
        in.read(reinterpret_cast<char*>(&f), sizeof(f));
        v = f;
    }
    if (!in) throw IoError("cube block shorter than header promises: " +
                           path.string());
    in.peek();
    if (!in.eof())
        throw IoError("cube block longer than header promises: " +
                      path.string());
    return make_cube(width, height, std::move(wavelengths), std::move(raw));
}

}  // namespace cropscan
