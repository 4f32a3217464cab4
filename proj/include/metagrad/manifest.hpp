#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "metagrad/meta_split.hpp"

namespace metagrad::data {

// Versioned, checksummed description of an on-disk class-indexed dataset:
// which classes exist, which meta-split owns each class, and which image
// files (with CRC32) make up each class. This makes the class split an
// explicit, citable artifact.
//
// Line-oriented text format (tokens separated by single spaces):
//   metagrad-manifest 1
//   image <channels> <height> <width>
//   class <name> <train|val|test>
//   file <relative/path.png> <crc32 hex>
//   ...
// Class ids are dense 0..C-1 in declaration order.
struct ManifestFile {
    std::string relpath;
    std::uint32_t crc32 = 0;
};

struct ManifestClass {
    std::string name;
    MetaSplit split = MetaSplit::Train;
    std::vector<ManifestFile> files;
};

struct DatasetManifest {
    std::uint32_t version = 1;
    std::vector<std::size_t> image_shape;  // [channels, height, width]
    std::vector<ManifestClass> classes;

    // Structural checks: unique class names (one split per class), sane shape,
    // non-empty classes, no whitespace in names/paths.
    void validate() const;

    std::size_t split_size(MetaSplit split) const;

    static DatasetManifest load(const std::filesystem::path& file);
    void save(const std::filesystem::path& file) const;
};

}  // namespace metagrad::data
