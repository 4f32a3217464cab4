#pragma once

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "metagrad/meta_split.hpp"
#include "metagrad/tensor.hpp"

namespace metagrad::data {

// Read-only pool of class candidates backing few-shot classification tasks.
// Class ids are dense 0..C-1 in manifest order; the per-split pools partition
// them. Immutable after construction, safe to share across threads.
class ClassStore {
public:
    virtual ~ClassStore() = default;

    virtual std::size_t num_classes() const = 0;
    virtual const std::string& class_name(std::size_t class_id) const = 0;
    virtual std::size_t num_examples(std::size_t class_id) const = 0;
    virtual ad::Tensor example(std::size_t class_id, std::size_t index) const = 0;
    virtual const std::vector<std::size_t>& example_shape() const = 0;  // [C,H,W]
    virtual std::span<const std::size_t> split_pool(MetaSplit split) const = 0;
};

class MemoryClassStore : public ClassStore {
public:
    struct ClassData {
        std::string name;
        std::vector<ad::Tensor> examples;
    };

    MemoryClassStore(std::vector<ClassData> classes,
                     std::array<std::vector<std::size_t>, 3> split_pools,
                     std::vector<std::size_t> example_shape);

    std::size_t num_classes() const override { return classes_.size(); }
    const std::string& class_name(std::size_t class_id) const override;
    std::size_t num_examples(std::size_t class_id) const override;
    ad::Tensor example(std::size_t class_id, std::size_t index) const override;
    const std::vector<std::size_t>& example_shape() const override { return example_shape_; }
    std::span<const std::size_t> split_pool(MetaSplit split) const override;

private:
    std::vector<ClassData> classes_;
    std::array<std::vector<std::size_t>, 3> split_pools_;
    std::vector<std::size_t> example_shape_;
};

// Deterministic class-level input transform; each (class, transform) pair in
// an augmented store is a distinct class.
struct ClassTransform {
    std::string name;
    std::function<ad::Tensor(const ad::Tensor&)> apply;
};

// Quarter-turn rotation of a [C,H,W] tensor. 90/270 degrees require square
// images; 180 is an involution on any shape.
ClassTransform rotation_transform(int quarter_turns);
ad::Tensor rotate_image(const ad::Tensor& image, int quarter_turns);

// Pool = original classes x (identity + transforms). Variant v of base class c
// gets id v * base_count + c (v = 0 is identity), keeping base ids stable, and
// inherits the base class's meta-split. Examples transform lazily on access.
std::shared_ptr<ClassStore> augment_classes(std::shared_ptr<const ClassStore> base,
                                            std::vector<ClassTransform> transforms);

// Lazy nearest-neighbour resize to [height, width], replicating grayscale to
// `channels` when requested (1 or 3).
std::shared_ptr<ClassStore> reshape_store(std::shared_ptr<const ClassStore> base,
                                          std::size_t channels, std::size_t height,
                                          std::size_t width);

}  // namespace metagrad::data
