#pragma once

#include <filesystem>

#include "metagrad/param_set.hpp"

namespace metagrad::nn {

// Flat binary checkpoint, little-endian:
//   u32 format version (currently 1)
//   u64 entry count
//   per entry: u32 path length, path bytes, u32 rank, u64 extents[rank],
//              f64 values (raw IEEE-754 bits)
// Round-trips bit-exactly.
void save_paramset(const ParamSet& params, const std::filesystem::path& file);
ParamSet load_paramset(const std::filesystem::path& file);

}  // namespace metagrad::nn
