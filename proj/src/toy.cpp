#include "metagrad/toy.hpp"

#include <cmath>

#include "metagrad/error.hpp"
#include "metagrad/rng.hpp"

namespace metagrad::toy {

namespace {

// Sub-stream tags for deriving independent generators from one task seed.
constexpr std::uint64_t kParamStream = 1;
constexpr std::uint64_t kInputStream = 2;
constexpr std::uint64_t kNoiseStream = 3;
constexpr std::uint64_t kKindStream = 4;

std::uint64_t task_seed(const ToyConfig& cfg, std::size_t index) {
    return mix64(cfg.seed, index);
}

// Builds the task's example list from sampled inputs and a closed-form target.
template <typename Fn>
tasks::TaskDataset materialize(const ToyConfig& cfg, std::size_t index,
                               std::vector<double> params, Fn&& target_of) {
    tasks::TaskDataset task;
    task.descriptor.index = index;
    task.descriptor.params = std::move(params);
    task.num_classes = 0;
    task.class_counts = {cfg.num_samples_per_task};

    const std::uint64_t ts = task_seed(cfg, index);
    Rng input_rng(mix64(ts, kInputStream));
    Rng noise_rng(mix64(ts, kNoiseStream));

    task.examples.reserve(cfg.num_samples_per_task);
    for (std::size_t i = 0; i < cfg.num_samples_per_task; ++i) {
        const double x = input_rng.uniform(cfg.input_lo, cfg.input_hi);
        double y = target_of(x);
        if (cfg.noise_std) y += noise_rng.normal(0.0, *cfg.noise_std);
        tasks::Example ex;
        ex.input = ad::Tensor({1}, {x});
        ex.target = ad::Tensor({1}, {y});
        ex.uid = i;
        task.examples.push_back(std::move(ex));
    }
    return task;
}

void check_index(std::size_t index, std::size_t count) {
    if (index >= count) {
        throw ContractError("task index " + std::to_string(index) + " out of range [0, " +
                            std::to_string(count) + ")");
    }
}

}  // namespace

void ToyConfig::validate() const {
    if (input_lo >= input_hi) throw ConfigError("ToyConfig: input range is empty");
    if (amplitude_lo > amplitude_hi || phase_lo > phase_hi || slope_lo > slope_hi ||
        intercept_lo > intercept_hi || omega_lo > omega_hi) {
        throw ConfigError("ToyConfig: a parameter range is reversed");
    }
    if (noise_std && *noise_std < 0.0) throw ConfigError("ToyConfig: noise_std must be >= 0");
    if (num_samples_per_task == 0) throw ConfigError("ToyConfig: num_samples_per_task must be > 0");
    if (num_tasks == 0) throw ConfigError("ToyConfig: num_tasks must be > 0");
}

SinusoidDataset::SinusoidDataset(ToyConfig config) : config_(std::move(config)) {
    config_.validate();
}

tasks::TaskDataset SinusoidDataset::get_task(std::size_t index) const {
    check_index(index, config_.num_tasks);
    Rng prng(mix64(task_seed(config_, index), kParamStream));
    const double a = prng.uniform(config_.amplitude_lo, config_.amplitude_hi);
    const double b = prng.uniform(config_.phase_lo, config_.phase_hi);
    return materialize(config_, index, {a, b},
                       [a, b](double x) { return a * std::sin(x + b); });
}

HarmonicDataset::HarmonicDataset(ToyConfig config) : config_(std::move(config)) {
    config_.validate();
}

tasks::TaskDataset HarmonicDataset::get_task(std::size_t index) const {
    check_index(index, config_.num_tasks);
    Rng prng(mix64(task_seed(config_, index), kParamStream));
    const double a1 = prng.uniform(config_.amplitude_lo, config_.amplitude_hi);
    const double b1 = prng.uniform(config_.phase_lo, config_.phase_hi);
    const double a2 = prng.uniform(config_.amplitude_lo, config_.amplitude_hi);
    const double b2 = prng.uniform(config_.phase_lo, config_.phase_hi);
    const double w = prng.uniform(config_.omega_lo, config_.omega_hi);
    return materialize(config_, index, {a1, b1, a2, b2, w}, [=](double x) {
        return a1 * std::sin(w * x + b1) + a2 * std::sin(2.0 * w * x + b2);
    });
}

SinusoidAndLineDataset::SinusoidAndLineDataset(ToyConfig config) : config_(std::move(config)) {
    config_.validate();
}

tasks::TaskDataset SinusoidAndLineDataset::get_task(std::size_t index) const {
    check_index(index, config_.num_tasks);
    const std::uint64_t ts = task_seed(config_, index);
    Rng kind_rng(mix64(ts, kKindStream));
    Rng prng(mix64(ts, kParamStream));
    const bool is_sinusoid = kind_rng.next_double() < 0.5;
    if (is_sinusoid) {
        const double a = prng.uniform(config_.amplitude_lo, config_.amplitude_hi);
        const double b = prng.uniform(config_.phase_lo, config_.phase_hi);
        return materialize(config_, index, {1.0, a, b},
                           [a, b](double x) { return a * std::sin(x + b); });
    }
    const double m = prng.uniform(config_.slope_lo, config_.slope_hi);
    const double c = prng.uniform(config_.intercept_lo, config_.intercept_hi);
    return materialize(config_, index, {0.0, m, c}, [m, c](double x) { return m * x + c; });
}

}  // namespace metagrad::toy
