#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace metagrad::data {

// 8-bit image, channel-interleaved row-major (as stored in the PNG).
struct Image {
    std::size_t channels = 0;  // 1 (gray) or 3 (rgb)
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<std::uint8_t> pixels;
};

Image read_png(const std::filesystem::path& file);
void write_png_gray(const std::filesystem::path& file, std::size_t height, std::size_t width,
                    const std::uint8_t* pixels);

std::uint32_t crc32_of(const std::filesystem::path& file);
std::uint32_t crc32_of_bytes(const std::uint8_t* data, std::size_t size);

}  // namespace metagrad::data
