#pragma once

#include <memory>

#include "metagrad/meta_dataset.hpp"

namespace metagrad::tasks {

// One task split into disjoint support (train) and query (test) parts.
struct SplitTask {
    TaskDescriptor descriptor;
    std::vector<Example> train;
    std::vector<Example> test;
    std::size_t num_classes = 0;  // 0 for regression tasks
};

// Per class (per task for regression): the first k_train of the optionally
// shuffled example sequence go to train, the next k_test to test, so the two
// parts are disjoint by construction. The shuffle is seeded by mixing (seed,
// descriptor hash, label), making tasks independent but reproducible.
SplitTask class_splitter(const TaskDataset& task, std::size_t k_train, std::size_t k_test,
                         bool shuffle, std::uint64_t seed);

struct SplitConfig {
    std::size_t k_train = 1;
    std::size_t k_test = 15;
    bool shuffle = true;
    std::uint64_t seed = 0;
};

// A meta-dataset wrapped with its support/query split policy.
class SplitDataset {
public:
    SplitDataset(std::shared_ptr<const MetaDataset> base, SplitConfig config)
        : base_(std::move(base)), config_(config) {}

    std::size_t num_tasks() const { return base_->num_tasks(); }
    MetaSplit meta_split() const { return base_->meta_split(); }
    const SplitConfig& config() const { return config_; }
    const MetaDataset& base() const { return *base_; }

    SplitTask get(std::size_t index) const {
        return class_splitter(base_->get_task(index), config_.k_train, config_.k_test,
                              config_.shuffle, config_.seed);
    }

private:
    std::shared_ptr<const MetaDataset> base_;
    SplitConfig config_;
};

}  // namespace metagrad::tasks
