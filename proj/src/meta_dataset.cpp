#include "metagrad/meta_dataset.hpp"

#include <bit>
#include <sstream>

#include "metagrad/combinatorics.hpp"
#include "metagrad/error.hpp"
#include "metagrad/rng.hpp"

namespace metagrad::tasks {

std::uint64_t TaskDescriptor::hash() const {
    std::uint64_t h = mix64(0x6d65746167726164ULL);
    h = mix64(h, index);
    for (std::size_t c : class_ids) h = mix64(h, c);
    for (double p : params) h = mix64(h, std::bit_cast<std::uint64_t>(p));
    return h;
}

std::string TaskDescriptor::to_string() const {
    std::ostringstream oss;
    if (!class_ids.empty()) {
        oss << "(";
        for (std::size_t i = 0; i < class_ids.size(); ++i) {
            if (i) oss << ",";
            oss << class_ids[i];
        }
        oss << ")";
    } else {
        oss << "task" << index;
    }
    return oss.str();
}

std::uint64_t example_uid(std::size_t class_id, std::size_t index) {
    return (static_cast<std::uint64_t>(class_id) << 32) | static_cast<std::uint64_t>(index);
}

CombinationDataset::CombinationDataset(std::shared_ptr<const data::ClassStore> store,
                                       std::size_t n_way, MetaSplit split)
    : store_(std::move(store)), n_way_(n_way), split_(split) {
    auto pool = store_->split_pool(split);
    pool_.assign(pool.begin(), pool.end());
    if (n_way_ == 0) throw ConfigError("CombinationDataset: n_way must be positive");
    if (pool_.size() < n_way_) {
        std::ostringstream oss;
        oss << "CombinationDataset: split '" << to_string(split) << "' has " << pool_.size()
            << " classes, fewer than n_way=" << n_way_;
        throw ConfigError(oss.str());
    }
}

std::size_t CombinationDataset::num_tasks() const {
    return binomial(pool_.size(), n_way_);
}

TaskDataset CombinationDataset::get_task(std::size_t index) const {
    const std::vector<std::size_t> positions = unrank_combination(index, pool_.size(), n_way_);

    TaskDataset task;
    task.num_classes = n_way_;
    task.descriptor.index = index;
    task.descriptor.class_ids.reserve(n_way_);
    for (std::size_t p : positions) task.descriptor.class_ids.push_back(pool_[p]);

    task.class_counts.reserve(n_way_);
    for (std::size_t label = 0; label < n_way_; ++label) {
        const std::size_t class_id = task.descriptor.class_ids[label];
        const std::size_t count = store_->num_examples(class_id);
        task.class_counts.push_back(count);
        for (std::size_t e = 0; e < count; ++e) {
            Example ex;
            ex.input = store_->example(class_id, e);
            ex.label = label;
            ex.target = ad::Tensor::scalar(static_cast<double>(label));
            ex.uid = example_uid(class_id, e);
            task.examples.push_back(std::move(ex));
        }
    }
    return task;
}

}  // namespace metagrad::tasks
