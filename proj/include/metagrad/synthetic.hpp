#pragma once

#include <filesystem>

#include "metagrad/manifest.hpp"

namespace metagrad::data {

// Procedural glyph corpus: each class is a seeded stroke pattern, each example
// a jittered noisy rendering of it. Classes are linearly separable on raw
// pixels by a wide margin, which the tests rely on. Regenerating with the same
// spec is bit-identical.
struct SyntheticSpec {
    std::size_t num_classes = 100;
    std::size_t examples_per_class = 20;
    std::size_t image_size = 28;  // square, >= 8
    std::uint64_t seed = 0;
    // Default split fractions: 64% train / 16% val / rest test, by class order.
    double train_fraction = 0.64;
    double val_fraction = 0.16;
};

// Writes root/<class>/<example>.png plus root/manifest.txt; returns the manifest.
DatasetManifest generate_synthetic_corpus(const std::filesystem::path& root,
                                          const SyntheticSpec& spec);

}  // namespace metagrad::data
