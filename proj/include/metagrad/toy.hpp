#pragma once

#include <memory>
#include <optional>

#include "metagrad/meta_dataset.hpp"

namespace metagrad::toy {

// Few-shot regression meta-dataset configuration. Task parameters and inputs
// derive purely from (seed, task index): nothing is stored, yet every access
// reproduces the values the task was "created" with.
struct ToyConfig {
    std::size_t num_samples_per_task = 10;
    std::size_t num_tasks = 1'000'000;
    std::optional<double> noise_std;     // absent = noiseless
    double input_lo = -5.0;
    double input_hi = 5.0;
    std::uint64_t seed = 0;
    metagrad::MetaSplit meta_split = metagrad::MetaSplit::Train;

    // Parameter ranges (library conventions, all configurable).
    double amplitude_lo = 0.1, amplitude_hi = 5.0;
    double phase_lo = 0.0, phase_hi = 3.14159265358979323846;
    double slope_lo = -3.0, slope_hi = 3.0;
    double intercept_lo = -3.0, intercept_hi = 3.0;
    double omega_lo = 0.5, omega_hi = 2.0;

    void validate() const;
};

// y = a * sin(x + b); descriptor params = {a, b}.
class SinusoidDataset : public tasks::MetaDataset {
public:
    explicit SinusoidDataset(ToyConfig config);
    std::size_t num_tasks() const override { return config_.num_tasks; }
    tasks::TaskDataset get_task(std::size_t index) const override;
    MetaSplit meta_split() const override { return config_.meta_split; }
    const ToyConfig& config() const { return config_; }

private:
    ToyConfig config_;
};

// y = a1 * sin(w x + b1) + a2 * sin(2 w x + b2); params = {a1, b1, a2, b2, w}.
class HarmonicDataset : public tasks::MetaDataset {
public:
    explicit HarmonicDataset(ToyConfig config);
    std::size_t num_tasks() const override { return config_.num_tasks; }
    tasks::TaskDataset get_task(std::size_t index) const override;
    MetaSplit meta_split() const override { return config_.meta_split; }

private:
    ToyConfig config_;
};

// Half the tasks are sinusoids (params = {1, a, b}), half are lines
// y = m x + c (params = {0, m, c}); the kind is drawn per task.
class SinusoidAndLineDataset : public tasks::MetaDataset {
public:
    explicit SinusoidAndLineDataset(ToyConfig config);
    std::size_t num_tasks() const override { return config_.num_tasks; }
    tasks::TaskDataset get_task(std::size_t index) const override;
    MetaSplit meta_split() const override { return config_.meta_split; }

private:
    ToyConfig config_;
};

}  // namespace metagrad::toy
