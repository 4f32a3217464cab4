#include "metagrad/image_io.hpp"

#include <png.h>
#include <zlib.h>

#include <cstdio>
#include <fstream>
#include <memory>

#include "metagrad/error.hpp"

namespace metagrad::data {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

Image read_png(const std::filesystem::path& file) {
    FilePtr fp(std::fopen(file.string().c_str(), "rb"));
    if (!fp) throw IngestError("cannot open image " + file.string());

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IngestError("png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw IngestError("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IngestError("undecodable image " + file.string());
    }

    png_init_io(png, fp.get());
    png_read_info(png, info);

    // Normalize to 8-bit gray or rgb.
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    if (png_get_color_type(png, info) == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY &&
        png_get_bit_depth(png, info) < 8) {
        png_set_expand_gray_1_2_4_to_8(png);
    }
    png_read_update_info(png, info);

    Image img;
    img.height = png_get_image_height(png, info);
    img.width = png_get_image_width(png, info);
    img.channels = png_get_channels(png, info);
    if (img.channels != 1 && img.channels != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IngestError("image " + file.string() + ": unsupported channel count " +
                          std::to_string(img.channels));
    }

    img.pixels.resize(img.channels * img.height * img.width);
    std::vector<png_bytep> rows(img.height);
    const std::size_t stride = img.channels * img.width;
    for (std::size_t i = 0; i < img.height; ++i) rows[i] = img.pixels.data() + i * stride;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

void write_png_gray(const std::filesystem::path& file, std::size_t height, std::size_t width,
                    const std::uint8_t* pixels) {
    FilePtr fp(std::fopen(file.string().c_str(), "wb"));
    if (!fp) throw Error("cannot open image for writing: " + file.string());

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw Error("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw Error("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error("png write failed: " + file.string());
    }

    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
                 PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_bytep> rows(height);
    for (std::size_t i = 0; i < height; ++i)
        rows[i] = const_cast<png_bytep>(pixels + i * width);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

std::uint32_t crc32_of_bytes(const std::uint8_t* data, std::size_t size) {
    return static_cast<std::uint32_t>(
        ::crc32(0L, reinterpret_cast<const Bytef*>(data), static_cast<uInt>(size)));
}

std::uint32_t crc32_of(const std::filesystem::path& file) {
    std::ifstream is(file, std::ios::binary);
    if (!is) throw IngestError("cannot open file for checksum: " + file.string());
    uLong crc = ::crc32(0L, Z_NULL, 0);
    char buf[65536];
    while (is.read(buf, sizeof(buf)) || is.gcount() > 0) {
        crc = ::crc32(crc, reinterpret_cast<const Bytef*>(buf), static_cast<uInt>(is.gcount()));
    }
    return static_cast<std::uint32_t>(crc);
}

}  // namespace metagrad::data
