#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "metagrad/class_store.hpp"
#include "metagrad/meta_split.hpp"
#include "metagrad/tensor.hpp"

namespace metagrad::tasks {

// Unique task identity. Combination tasks carry the strictly increasing tuple
// of global class ids; toy tasks carry the task index plus the sampled
// function parameters.
struct TaskDescriptor {
    std::vector<std::size_t> class_ids;
    std::size_t index = 0;
    std::vector<double> params;

    // Stable 64-bit digest used for per-task seed derivation.
    std::uint64_t hash() const;
    std::string to_string() const;
    bool operator==(const TaskDescriptor&) const = default;
};

// One example of a task's dataset. `uid` identifies the underlying stored
// example (class id and in-class index for classification; sample index for
// toy tasks) so support/query disjointness is checkable by identity.
struct Example {
    ad::Tensor input;
    ad::Tensor target;       // regression target, or the label as a scalar
    std::size_t label = 0;   // classification label: position within the descriptor tuple
    std::uint64_t uid = 0;
};

struct TaskDataset {
    TaskDescriptor descriptor;
    std::vector<Example> examples;
    std::size_t num_classes = 0;              // 0 for regression tasks
    std::vector<std::size_t> class_counts;    // per-label example counts (classification)
};

// A dataset of datasets: get_task(i) materializes the i-th task's full example
// set, deterministically in (construction seed, index).
class MetaDataset {
public:
    virtual ~MetaDataset() = default;
    virtual std::size_t num_tasks() const = 0;
    virtual TaskDataset get_task(std::size_t index) const = 0;
    virtual MetaSplit meta_split() const = 0;
};

// Tasks are N-way combinations of the store's class pool for the chosen
// split, enumerated in lexicographic order of the class-id tuple. Labels are
// positions within the sorted tuple. num_tasks() is C(pool, n_way), saturating
// at uint64 max for astronomically large pools.
class CombinationDataset : public MetaDataset {
public:
    CombinationDataset(std::shared_ptr<const data::ClassStore> store, std::size_t n_way,
                       MetaSplit split);

    std::size_t num_tasks() const override;
    TaskDataset get_task(std::size_t index) const override;
    MetaSplit meta_split() const override { return split_; }

    std::size_t n_way() const { return n_way_; }
    const std::vector<std::size_t>& pool() const { return pool_; }
    const data::ClassStore& store() const { return *store_; }

private:
    std::shared_ptr<const data::ClassStore> store_;
    std::vector<std::size_t> pool_;
    std::size_t n_way_;
    MetaSplit split_;
};

std::uint64_t example_uid(std::size_t class_id, std::size_t index);

}  // namespace metagrad::tasks
