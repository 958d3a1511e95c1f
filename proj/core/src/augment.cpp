#include "cropscan/augment.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "cropscan/image_io.hpp"
#include "cropscan/rng.hpp"

namespace cropscan {

namespace {

void check_image(const Tensor& image) {
    if (image.rank() != 3)
        throw ShapeError("augment expects [C,H,W], got " +
                         shape_to_string(image.shape()));
    if (!image.all_finite())
        throw DomainError("augment input contains non-finite pixels");
}

}  // namespace

Tensor flip_horizontal(const Tensor& image) {
    check_image(image);
    const std::size_t c = image.extent(0);
    const std::size_t h = image.extent(1);
    const std::size_t w = image.extent(2);
    Tensor out(image.shape());
    for (std::size_t ch = 0; ch < c; ++ch)
        for (std::size_t y = 0; y < h; ++y) {
            const double* src = image.data() + (ch * h + y) * w;
            double* dst = out.data() + (ch * h + y) * w;
            for (std::size_t x = 0; x < w; ++x) dst[x] = src[w - 1 - x];
        }
    return out;
}

Tensor flip_vertical(const Tensor& image) {
    check_image(image);
    const std::size_t c = image.extent(0);
    const std::size_t h = image.extent(1);
    const std::size_t w = image.extent(2);
    Tensor out(image.shape());
    for (std::size_t ch = 0; ch < c; ++ch)
        for (std::size_t y = 0; y < h; ++y)
            std::copy_n(image.data() + (ch * h + (h - 1 - y)) * w, w,
                        out.data() + (ch * h + y) * w);
    return out;
}

Tensor rotate_bilinear(const Tensor& image, double degrees) {
    check_image(image);
    const std::size_t c = image.extent(0);
    const std::size_t h = image.extent(1);
    const std::size_t w = image.extent(2);
    const double rad = degrees * 3.14159265358979323846 / 180.0;
    const double cos_r = std::cos(rad);
    const double sin_r = std::sin(rad);
    const double cy = (static_cast<double>(h) - 1.0) / 2.0;
    const double cx = (static_cast<double>(w) - 1.0) / 2.0;

    Tensor out(image.shape());
    const std::size_t plane = h * w;
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            // inverse map: rotate the output coordinate back into the source
            const double dy = static_cast<double>(y) - cy;
            const double dx = static_cast<double>(x) - cx;
            const double sy = cy + dy * cos_r - dx * sin_r;
            const double sx = cx + dy * sin_r + dx * cos_r;

            const double fy = std::floor(sy);
            const double fx = std::floor(sx);
            const std::ptrdiff_t y0 = static_cast<std::ptrdiff_t>(fy);
            const std::ptrdiff_t x0 = static_cast<std::ptrdiff_t>(fx);
            const double wy = sy - fy;
            const double wx = sx - fx;

            auto tap = [&](const double* p, std::ptrdiff_t yy,
                           std::ptrdiff_t xx) -> double {
                if (yy < 0 || yy >= static_cast<std::ptrdiff_t>(h) || xx < 0 ||
                    xx >= static_cast<std::ptrdiff_t>(w))
                    return 0.0;  // zero fill outside bounds
                return p[static_cast<std::size_t>(yy) * w +
                         static_cast<std::size_t>(xx)];
            };
            for (std::size_t ch = 0; ch < c; ++ch) {
                const double* p = image.data() + ch * plane;
                const double top =
                    tap(p, y0, x0) * (1.0 - wx) + tap(p, y0, x0 + 1) * wx;
                const double bot =
                    tap(p, y0 + 1, x0) * (1.0 - wx) + tap(p, y0 + 1, x0 + 1) * wx;
                out[ch * plane + y * w + x] = top * (1.0 - wy) + bot * wy;
            }
        }
    }
    return out;
}

Tensor scale_brightness(const Tensor& image, double factor) {
    check_image(image);
    Tensor out(image.shape());
    for (std::size_t i = 0; i < image.size(); ++i)
        out[i] = std::clamp(image[i] * factor, 0.0, 1.0);
    return out;
}

std::array<Tensor, 4> augment_image(const Tensor& image,
                                    const AugmentParams& params) {
    check_image(image);
    return {flip_horizontal(image), flip_vertical(image),
            rotate_bilinear(image, params.rotation_deg),
            scale_brightness(image, params.brightness)};
}

Corpus augment_dataset(const Corpus& input, const AugmentationSpec& spec) {
    if (input.manifest.records.size() != input.images.size())
        throw InputError("corpus manifest and images are out of step");
    {
        std::set<std::string_view> seen;
        for (const auto& r : input.manifest.records)
            if (!seen.insert(r.id).second)
                throw InputError("duplicate id in input manifest: " + r.id);
    }

    Rng rng(spec.seed);
    Corpus out;
    out.manifest.records.reserve(input.manifest.records.size() * 5);
    out.images.reserve(input.images.size() * 5);

    for (std::size_t i = 0; i < input.manifest.records.size(); ++i) {
        const ManifestRecord& original = input.manifest.records[i];

        AugmentParams params;
        params.rotation_deg =
            rng.uniform(-spec.rotation_max_degrees, spec.rotation_max_degrees);
        params.brightness = rng.uniform(spec.brightness_min, spec.brightness_max);

        ManifestRecord kept = original;
        kept.path.clear();
        kept.provenance.original_id = original.id;
        kept.provenance.transform = "original";
        out.manifest.records.push_back(std::move(kept));
        out.images.push_back(input.images[i]);

        auto variants = augment_image(input.images[i], params);
        for (std::size_t t = 0; t < variants.size(); ++t) {
            ManifestRecord r;
            r.id = original.id + "#" + kTransformNames[t];
            r.label = original.label;
            r.provenance.original_id = original.id;
            r.provenance.transform = kTransformNames[t];
            if (kTransformNames[t] == std::string_view("rotate"))
                r.provenance.rotation_deg = params.rotation_deg;
            if (kTransformNames[t] == std::string_view("brightness"))
                r.provenance.brightness = params.brightness;
            out.manifest.records.push_back(std::move(r));
            out.images.push_back(quantize_8bit(variants[t]));
        }
    }
    return out;
}

}  // namespace cropscan
