#include "metagrad/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "metagrad/error.hpp"

namespace metagrad::nn {

namespace {

constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ostream& os, double v) { put_u64(os, std::bit_cast<std::uint64_t>(v)); }

std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

double get_f64(std::istream& is) { return std::bit_cast<double>(get_u64(is)); }

}  // namespace

void save_paramset(const ParamSet& params, const std::filesystem::path& file) {
    std::ofstream os(file, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open checkpoint for writing: " + file.string());
    put_u32(os, kVersion);
    put_u64(os, params.size());
    for (const auto& [path, tensor] : params.entries()) {
        put_u32(os, static_cast<std::uint32_t>(path.size()));
        os.write(path.data(), static_cast<std::streamsize>(path.size()));
        put_u32(os, static_cast<std::uint32_t>(tensor.rank()));
        for (std::size_t e : tensor.shape()) put_u64(os, e);
        for (double v : tensor.values()) put_f64(os, v);
    }
    if (!os) throw Error("checkpoint write failed: " + file.string());
}

ParamSet load_paramset(const std::filesystem::path& file) {
    std::ifstream is(file, std::ios::binary);
    if (!is) throw Error("cannot open checkpoint: " + file.string());
    const std::uint32_t version = get_u32(is);
    if (version != kVersion) {
        throw Error("checkpoint " + file.string() + ": unsupported format version " +
                    std::to_string(version));
    }
    const std::uint64_t count = get_u64(is);
    ParamSet out;
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::uint32_t path_len = get_u32(is);
        std::string path(path_len, '\0');
        is.read(path.data(), path_len);
        const std::uint32_t rank = get_u32(is);
        std::vector<std::size_t> shape(rank);
        for (auto& e : shape) e = static_cast<std::size_t>(get_u64(is));
        std::vector<double> values(ad::shape_numel(shape));
        for (auto& v : values) v = get_f64(is);
        if (!is) throw Error("checkpoint " + file.string() + ": truncated file");
        out.insert(std::move(path), ad::Tensor(std::move(shape), std::move(values)));
    }
    return out;
}

}  // namespace metagrad::nn
