#include "cropscan/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <vector>

#include <png.h>

namespace cropscan {

namespace {

void check_rgb(const Tensor& image) {
    if (image.rank() != 3 || image.extent(0) != 3)
        throw ShapeError("expected a [3,H,W] image, got " +
                         shape_to_string(image.shape()));
}

unsigned char to_byte(double v) {
    const double c = std::clamp(v, 0.0, 1.0);
    return static_cast<unsigned char>(std::lround(c * 255.0));
}

Tensor from_bytes(const std::vector<unsigned char>& rgb, std::size_t h,
                  std::size_t w) {
    Tensor image({3, h, w});
    const std::size_t plane = h * w;
    for (std::size_t i = 0; i < plane; ++i) {
        image[0 * plane + i] = rgb[3 * i + 0] / 255.0;
        image[1 * plane + i] = rgb[3 * i + 1] / 255.0;
        image[2 * plane + i] = rgb[3 * i + 2] / 255.0;
    }
    return image;
}

Tensor read_ppm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());

    std::string magic;
    in >> magic;
    if (magic != "P6") throw IoError("not a binary PPM (P6): " + path.string());

    // header tokens may be separated by whitespace and '#' comments
    auto next_int = [&in, &path]() {
        for (;;) {
            int c = in.peek();
            if (c == '#') {
                std::string line;
                std::getline(in, line);
            } else if (std::isspace(c)) {
                in.get();
            } else {
                break;
            }
        }
        std::size_t v = 0;
        if (!(in >> v)) throw IoError("bad PPM header: " + path.string());
        return v;
    };
    const std::size_t w = next_int();
    const std::size_t h = next_int();
    const std::size_t maxval = next_int();
    if (maxval != 255)
        throw IoError("unsupported PPM maxval " + std::to_string(maxval) +
                      ": " + path.string());
    in.get();  // single whitespace before the raster

    std::vector<unsigned char> rgb(3 * w * h);
    in.read(reinterpret_cast<char*>(rgb.data()),
            static_cast<std::streamsize>(rgb.size()));
    if (!in) throw IoError("truncated PPM raster: " + path.string());
    return from_bytes(rgb, h, w);
}

struct PngReadCloser {
    png_structp png = nullptr;
    png_infop info = nullptr;
    std::FILE* fp = nullptr;
    ~PngReadCloser() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (fp) std::fclose(fp);
    }
};

Tensor read_png_file(const std::filesystem::path& path) {
    PngReadCloser ctx;
    ctx.fp = std::fopen(path.c_str(), "rb");
    if (!ctx.fp) throw IoError("cannot open " + path.string());

    ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                     nullptr);
    if (!ctx.png) throw IoError("png init failed");
    ctx.info = png_create_info_struct(ctx.png);
    if (!ctx.info) throw IoError("png init failed");
    if (setjmp(png_jmpbuf(ctx.png)))
        throw IoError("png decode failed: " + path.string());

    png_init_io(ctx.png, ctx.fp);
    png_read_info(ctx.png, ctx.info);

    // normalize whatever we get to 8-bit RGB
    png_set_strip_16(ctx.png);
    png_set_strip_alpha(ctx.png);
    png_set_palette_to_rgb(ctx.png);
    png_set_expand_gray_1_2_4_to_8(ctx.png);
    png_set_gray_to_rgb(ctx.png);
    png_read_update_info(ctx.png, ctx.info);

    const std::size_t w = png_get_image_width(ctx.png, ctx.info);
    const std::size_t h = png_get_image_height(ctx.png, ctx.info);
    if (png_get_rowbytes(ctx.png, ctx.info) != 3 * w)
        throw IoError("unexpected png row size: " + path.string());

    std::vector<unsigned char> rgb(3 * w * h);
    std::vector<png_bytep> rows(h);
    for (std::size_t y = 0; y < h; ++y) rows[y] = rgb.data() + y * 3 * w;
    png_read_image(ctx.png, rows.data());
    png_read_end(ctx.png, nullptr);
    return from_bytes(rgb, h, w);
}

struct PngWriteCloser {
    png_structp png = nullptr;
    png_infop info = nullptr;
    std::FILE* fp = nullptr;
    ~PngWriteCloser() {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
        if (fp) std::fclose(fp);
    }
};

}  // namespace

Tensor read_image(const std::filesystem::path& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw IoError("cannot open " + path.string());
    unsigned char sig[8] = {};
    probe.read(reinterpret_cast<char*>(sig), sizeof(sig));
    probe.close();
    if (sig[0] == 'P' && sig[1] == '6') return read_ppm(path);
    if (!png_sig_cmp(sig, 0, 8)) return read_png_file(path);
    throw IoError("unsupported image format: " + path.string());
}

void write_ppm(const Tensor& image, const std::filesystem::path& path) {
    check_rgb(image);
    const std::size_t h = image.extent(1);
    const std::size_t w = image.extent(2);
    const std::size_t plane = h * w;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "P6\n" << w << " " << h << "\n255\n";
    std::vector<unsigned char> row(3 * w);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            row[3 * x + 0] = to_byte(image[0 * plane + y * w + x]);
            row[3 * x + 1] = to_byte(image[1 * plane + y * w + x]);
            row[3 * x + 2] = to_byte(image[2 * plane + y * w + x]);
        }
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size()));
    }
    if (!out) throw IoError("write failed: " + path.string());
}

void write_png(const Tensor& image, const std::filesystem::path& path) {
    check_rgb(image);
    const std::size_t h = image.extent(1);
    const std::size_t w = image.extent(2);
    const std::size_t plane = h * w;

    PngWriteCloser ctx;
    ctx.fp = std::fopen(path.c_str(), "wb");
    if (!ctx.fp) throw IoError("cannot open " + path.string() + " for writing");
    ctx.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                      nullptr);
    if (!ctx.png) throw IoError("png init failed");
    ctx.info = png_create_info_struct(ctx.png);
    if (!ctx.info) throw IoError("png init failed");
    if (setjmp(png_jmpbuf(ctx.png)))
        throw IoError("png encode failed: " + path.string());

    png_init_io(ctx.png, ctx.fp);
    png_set_IHDR(ctx.png, ctx.info, static_cast<png_uint_32>(w),
                 static_cast<png_uint_32>(h), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(ctx.png, ctx.info);

    std::vector<unsigned char> row(3 * w);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            row[3 * x + 0] = to_byte(image[0 * plane + y * w + x]);
            row[3 * x + 1] = to_byte(image[1 * plane + y * w + x]);
            row[3 * x + 2] = to_byte(image[2 * plane + y * w + x]);
        }
        png_write_row(ctx.png, row.data());
    }
    png_write_end(ctx.png, nullptr);
}

void write_image(const Tensor& image, const std::filesystem::path& path) {
    const std::string ext = path.extension().string();
    if (ext == ".ppm")
        write_ppm(image, path);
    else if (ext == ".png")
        write_png(image, path);
    else
        throw IoError("unsupported output extension: " + path.string());
}

Tensor resize_bilinear(const Tensor& image, std::size_t out_h,
                       std::size_t out_w) {
    check_rgb(image);
    const std::size_t h = image.extent(1);
    const std::size_t w = image.extent(2);
    if (h == out_h && w == out_w) return image;
    if (out_h == 0 || out_w == 0)
        throw ShapeError("resize target must be positive");

    Tensor out({3, out_h, out_w});
    const std::size_t in_plane = h * w;
    const std::size_t out_plane = out_h * out_w;
    // edge-aligned sample grid; degenerate axes collapse to coordinate 0
    const double sy = out_h > 1 ? double(h - 1) / double(out_h - 1) : 0.0;
    const double sx = out_w > 1 ? double(w - 1) / double(out_w - 1) : 0.0;
    for (std::size_t y = 0; y < out_h; ++y) {
        const double fy = y * sy;
        const std::size_t y0 = static_cast<std::size_t>(fy);
        const std::size_t y1 = std::min(y0 + 1, h - 1);
        const double wy = fy - static_cast<double>(y0);
        for (std::size_t x = 0; x < out_w; ++x) {
            const double fx = x * sx;
            const std::size_t x0 = static_cast<std::size_t>(fx);
            const std::size_t x1 = std::min(x0 + 1, w - 1);
            const double wx = fx - static_cast<double>(x0);
            for (std::size_t c = 0; c < 3; ++c) {
                const double* p = image.data() + c * in_plane;
                const double top = p[y0 * w + x0] * (1.0 - wx) + p[y0 * w + x1] * wx;
                const double bot = p[y1 * w + x0] * (1.0 - wx) + p[y1 * w + x1] * wx;
                out[c * out_plane + y * out_w + x] = top * (1.0 - wy) + bot * wy;
            }
        }
    }
    return out;
}

Tensor quantize_8bit(const Tensor& image) {
    Tensor out(image.shape());
    for (std::size_t i = 0; i < image.size(); ++i)
        out[i] = to_byte(image[i]) / 255.0;
    return out;
}

}  // namespace cropscan
