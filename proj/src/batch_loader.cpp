#include "metagrad/batch_loader.hpp"

#include <omp.h>

#include <numeric>
#include <sstream>

#include "metagrad/error.hpp"

namespace metagrad::tasks {

namespace {

void append_values(std::vector<double>& out, const ad::Tensor& t) {
    out.insert(out.end(), t.values().begin(), t.values().end());
}

std::vector<std::size_t> batched_shape(std::size_t b, std::size_t count,
                                       const std::vector<std::size_t>& dims) {
    std::vector<std::size_t> shape{b, count};
    shape.insert(shape.end(), dims.begin(), dims.end());
    return shape;
}

}  // namespace

TaskBatch collate(const std::vector<SplitTask>& batch) {
    if (batch.empty()) throw ContractError("collate: empty batch");

    const SplitTask& head = batch.front();
    if (head.train.empty() || head.test.empty()) {
        throw ContractError("collate: tasks must have non-empty train and test parts");
    }
    const std::vector<std::size_t> input_dims = head.train.front().input.shape();
    const std::vector<std::size_t> target_dims = head.train.front().target.shape();
    const std::size_t n_train = head.train.size();
    const std::size_t n_test = head.test.size();
    const bool classification = head.num_classes > 0;

    for (const SplitTask& task : batch) {
        if (task.train.size() != n_train || task.test.size() != n_test ||
            (task.num_classes > 0) != classification) {
            throw ContractError("collate: tasks in a batch must have identical layout");
        }
        for (const auto* part : {&task.train, &task.test}) {
            for (const Example& ex : *part) {
                if (ex.input.shape() != input_dims) {
                    std::ostringstream oss;
                    oss << "collate: heterogeneous input shapes "
                        << ad::format_shape(input_dims) << " vs "
                        << ad::format_shape(ex.input.shape());
                    throw ContractError(oss.str());
                }
            }
        }
    }

    const std::size_t b = batch.size();
    TaskBatch out;
    out.classification = classification;

    std::vector<double> train_in, test_in, train_tg, test_tg;
    train_in.reserve(b * n_train * ad::shape_numel(input_dims));
    test_in.reserve(b * n_test * ad::shape_numel(input_dims));
    for (const SplitTask& task : batch) {
        for (const Example& ex : task.train) append_values(train_in, ex.input);
        for (const Example& ex : task.test) append_values(test_in, ex.input);
        if (classification) {
            for (const Example& ex : task.train) train_tg.push_back(double(ex.label));
            for (const Example& ex : task.test) test_tg.push_back(double(ex.label));
        } else {
            for (const Example& ex : task.train) append_values(train_tg, ex.target);
            for (const Example& ex : task.test) append_values(test_tg, ex.target);
        }
        out.descriptors.push_back(task.descriptor);
    }

    out.train_inputs = ad::Tensor(batched_shape(b, n_train, input_dims), std::move(train_in));
    out.test_inputs = ad::Tensor(batched_shape(b, n_test, input_dims), std::move(test_in));
    if (classification) {
        out.train_targets = ad::Tensor({b, n_train}, std::move(train_tg));
        out.test_targets = ad::Tensor({b, n_test}, std::move(test_tg));
    } else {
        out.train_targets = ad::Tensor(batched_shape(b, n_train, target_dims), std::move(train_tg));
        out.test_targets = ad::Tensor(batched_shape(b, n_test, target_dims), std::move(test_tg));
    }
    return out;
}

BatchLoader::BatchLoader(std::shared_ptr<const SplitDataset> dataset, std::size_t batch_size,
                         bool shuffle, std::uint64_t seed)
    : dataset_(std::move(dataset)),
      batch_size_(batch_size),
      shuffle_(shuffle),
      seed_(seed),
      lazy_(dataset_->num_tasks() > kLazyThreshold),
      rng_(mix64(seed, 0xba7c4)) {
    if (batch_size_ == 0) throw ConfigError("BatchLoader: batch_size must be positive");
    prepare_epoch();
}

void BatchLoader::restart() {
    ++epoch_;
    prepare_epoch();
}

void BatchLoader::prepare_epoch() {
    cursor_ = 0;
    if (lazy_) return;
    order_.resize(dataset_->num_tasks());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    if (shuffle_) {
        Rng rng(mix64(mix64(seed_, 0xba7c4), epoch_));
        for (std::size_t i = order_.size() - 1; i > 0; --i) {
            const std::size_t j = rng.next_below(i + 1);
            std::swap(order_[i], order_[j]);
        }
    }
}

std::uint64_t BatchLoader::draw_index() {
    return rng_.next_below(dataset_->num_tasks());
}

std::optional<TaskBatch> BatchLoader::next() {
    std::vector<std::size_t> indices;
    if (lazy_) {
        // Uniform rank draws; duplicates within an epoch are tolerated.
        indices.reserve(batch_size_);
        for (std::size_t i = 0; i < batch_size_; ++i) indices.push_back(draw_index());
    } else {
        if (cursor_ >= order_.size()) return std::nullopt;
        const std::size_t end = std::min(cursor_ + batch_size_, order_.size());
        indices.assign(order_.begin() + static_cast<std::ptrdiff_t>(cursor_),
                       order_.begin() + static_cast<std::ptrdiff_t>(end));
        cursor_ = end;
    }

    // Tasks are materialized in parallel into fixed slots; emission order is
    // the single-threaded order regardless of schedule.
    std::vector<SplitTask> tasks(indices.size());
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(indices.size()); ++i) {
        try {
            tasks[static_cast<std::size_t>(i)] = dataset_->get(indices[static_cast<std::size_t>(i)]);
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return collate(tasks);
}

}  // namespace metagrad::tasks
