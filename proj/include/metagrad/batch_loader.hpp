#pragma once

#include <memory>
#include <optional>

#include "metagrad/rng.hpp"
#include "metagrad/splitter.hpp"

namespace metagrad::tasks {

// Dense collation of a batch of split tasks. Inputs get shape
// [B, per-task count, ...example dims]; classification labels get [B, count]
// and regression targets [B, count, ...target dims]. Row b of every field
// refers to the task of descriptors[b].
struct TaskBatch {
    ad::Tensor train_inputs;
    ad::Tensor train_targets;
    ad::Tensor test_inputs;
    ad::Tensor test_targets;
    std::vector<TaskDescriptor> descriptors;
    bool classification = false;

    std::size_t size() const { return descriptors.size(); }
};

TaskBatch collate(const std::vector<SplitTask>& batch);

// Iterates a split meta-dataset in batches. Small datasets are walked as a
// full epoch (optionally a seeded permutation); datasets with more than
// kLazyThreshold tasks switch to lazily drawing uniform task ranks per step,
// tolerating duplicates within an epoch.
class BatchLoader {
public:
    static constexpr std::size_t kLazyThreshold = 10'000'000;

    BatchLoader(std::shared_ptr<const SplitDataset> dataset, std::size_t batch_size, bool shuffle,
                std::uint64_t seed);

    // Next batch, or nullopt at epoch end (exact mode only; lazy mode never
    // ends). The final batch of an epoch may be partial.
    std::optional<TaskBatch> next();

    // Begins the next epoch; reshuffles with an epoch-mixed seed.
    void restart();

    bool lazy() const { return lazy_; }
    std::size_t epoch_tasks() const { return dataset_->num_tasks(); }

private:
    std::uint64_t draw_index();
    void prepare_epoch();

    std::shared_ptr<const SplitDataset> dataset_;
    std::size_t batch_size_;
    bool shuffle_;
    std::uint64_t seed_;
    bool lazy_;
    std::size_t epoch_ = 0;
    std::size_t cursor_ = 0;
    std::vector<std::size_t> order_;   // exact mode
    Rng rng_;                          // lazy mode
};

}  // namespace metagrad::tasks
