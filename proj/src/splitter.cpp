#include "metagrad/splitter.hpp"

#include <sstream>

#include "metagrad/error.hpp"
#include "metagrad/rng.hpp"

namespace metagrad::tasks {

SplitTask class_splitter(const TaskDataset& task, std::size_t k_train, std::size_t k_test,
                         bool shuffle, std::uint64_t seed) {
    const std::size_t groups = task.num_classes == 0 ? 1 : task.num_classes;

    // Example positions per group, in the task's canonical order.
    std::vector<std::vector<std::size_t>> by_group(groups);
    for (std::size_t i = 0; i < task.examples.size(); ++i) {
        const std::size_t g = task.num_classes == 0 ? 0 : task.examples[i].label;
        by_group[g].push_back(i);
    }

    SplitTask out;
    out.descriptor = task.descriptor;
    out.num_classes = task.num_classes;
    const std::uint64_t task_seed = mix64(seed, task.descriptor.hash());

    for (std::size_t g = 0; g < groups; ++g) {
        auto& order = by_group[g];
        if (order.size() < k_train + k_test) {
            std::ostringstream oss;
            if (task.num_classes == 0) {
                oss << "class_splitter: task " << task.descriptor.to_string() << " has "
                    << order.size() << " examples, need k_train+k_test = " << (k_train + k_test);
            } else {
                oss << "class_splitter: class " << task.descriptor.class_ids[g] << " in task "
                    << task.descriptor.to_string() << " has " << order.size()
                    << " examples, need k_train+k_test = " << (k_train + k_test);
            }
            throw ConfigError(oss.str());
        }
        if (shuffle) {
            Rng rng(mix64(task_seed, g));
            for (std::size_t i = order.size() - 1; i > 0; --i) {
                const std::size_t j = rng.next_below(i + 1);
                std::swap(order[i], order[j]);
            }
        }
        for (std::size_t i = 0; i < k_train; ++i) out.train.push_back(task.examples[order[i]]);
        for (std::size_t i = 0; i < k_test; ++i)
            out.test.push_back(task.examples[order[k_train + i]]);
    }
    return out;
}

}  // namespace metagrad::tasks
