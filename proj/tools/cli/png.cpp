#include "png.hpp"

#include <png.h>

#include <cmath>
#include <algorithm>
#include <cstdio>
#include <memory>
#include <vector>

#include "lsap/error.hpp"

namespace lsap::cli {

std::size_t write_png(const std::string& path, const Tensor& image) {
    if (image.rank() != 3 || image.dim(0) != 3) throw ShapeError("png: image must be 3xHxW");
    const std::size_t h = image.dim(1), w = image.dim(2);
    std::size_t clamped = 0;
    std::vector<png_byte> pixels(h * w * 3);
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x) {
                double v = image[(c * h + y) * w + x];
                if (!std::isfinite(v)) throw NumericError("png: non-finite pixel");
                if (v < -1.0 || v > 1.0) {
                    ++clamped;
                    v = std::clamp(v, -1.0, 1.0);
                }
                pixels[(y * w + x) * 3 + c] = static_cast<png_byte>(std::lround((v + 1.0) * 127.5));
            }

    std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.c_str(), "wb"), &std::fclose);
    if (!file) throw ConfigError("cannot open " + path + " for writing");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw ConfigError("png: cannot create writer");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw ConfigError("png: cannot create info");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw ConfigError("png: write failed for " + path);
    }
    png_init_io(png, file.get());
    png_set_compression_level(png, 9);
    png_set_filter(png, PNG_FILTER_TYPE_BASE, PNG_FILTER_NONE);
    png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_BASE, PNG_FILTER_TYPE_BASE);
    png_write_info(png, info);
    std::vector<png_bytep> rows(h);
    for (std::size_t y = 0; y < h; ++y) rows[y] = pixels.data() + y * w * 3;
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return clamped;
}

}  // namespace lsap::cli
