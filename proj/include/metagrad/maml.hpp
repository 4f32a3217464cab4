#pragma once

#include <filesystem>
#include <span>

#include "metagrad/batch_loader.hpp"
#include "metagrad/modules.hpp"
#include "metagrad/splitter.hpp"

namespace metagrad::maml {

enum class LossKind { Mse, CrossEntropy };
enum class OuterOpt { Sgd, Adam };

struct MamlConfig {
    double inner_lr = 0.01;
    double outer_lr = 0.001;
    std::size_t inner_steps = 1;
    bool first_order = false;
    std::size_t meta_batch_size = 4;
    std::size_t total_outer_steps = 1000;
    std::uint64_t seed = 0;
    LossKind loss = LossKind::Mse;
    std::size_t eval_tasks = 100;
    // Meta-optimizer. Plain gradient descent is available, but an outer lr in
    // the usual 1e-3 regime only trains at a useful pace with Adam's scaling.
    OuterOpt outer_opt = OuterOpt::Adam;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;

    void validate() const;
};

// Deterministic meta-optimizer state over the module's flattened parameters.
class OuterOptimizer {
public:
    OuterOptimizer(const MamlConfig& config, const nn::ParamSet& params);

    // Applies one update from the mean outer gradients (one flat vector per
    // parameter path, in named_parameters() order).
    void apply(nn::MetaModule& module, const std::vector<std::vector<double>>& mean_grads);

private:
    OuterOpt kind_;
    double lr_, beta1_, beta2_, eps_;
    std::size_t step_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

struct StepRecord {
    std::size_t step = 0;
    double outer_loss = 0;        // mean post-adaptation query loss over the batch
    double pre_adapt_loss = 0;    // mean query loss at the unadapted parameters
    double post_adapt_loss = 0;   // == outer_loss for the reference trainer
    double wall_ms = 0;
};

struct TrainReport {
    std::vector<StepRecord> records;
};

// CSV with header step,outer_loss,pre_adapt_loss,post_adapt_loss,wall_ms.
// Values are printed with 17 significant digits so curves round-trip exactly.
void write_report_csv(const TrainReport& report, const std::filesystem::path& file);

struct EvalSummary {
    std::size_t tasks = 0;
    double mean_post_loss = 0, std_post_loss = 0;
    double mean_pre_loss = 0;
    double mean_accuracy = 0, std_accuracy = 0;  // classification only
    std::vector<double> pre_losses, post_losses, accuracies;
};

// Dense per-part matrices of one task: inputs flattened to [n, d].
struct TaskMatrices {
    ad::Tensor inputs;
    ad::Tensor targets;                // regression targets [n, t]
    std::vector<std::size_t> labels;   // classification labels
    bool classification = false;
};

TaskMatrices task_matrices(std::span<const tasks::Example> examples, bool classification);

ad::Tensor apply_loss(LossKind kind, const ad::Tensor& predictions, const TaskMatrices& data);

// Inner-loop adaptation from an attached starting ParamSet: inner_steps
// iterations of support loss -> grad (create_graph unless first_order) ->
// sgd_step. The result's provenance reaches `start` (fully when second-order,
// through the linear update path when first-order).
nn::ParamSet adapt_from(const nn::MetaModule& module, const nn::ParamSet& start,
                        const TaskMatrices& support, const MamlConfig& config);

// Convenience form starting at named_parameters() attached to g. Only the
// task's train part is ever read.
nn::ParamSet adapt(ad::Graph& g, const nn::MetaModule& module, const tasks::SplitTask& task,
                   const MamlConfig& config);

struct OuterStepResult {
    double outer_loss = 0;
    double pre_adapt_loss = 0;
};

// One meta-optimization step over a collated batch: adapt per task, evaluate
// the query loss through the adaptation, average, and update the module's
// stored parameters. Without an optimizer this is a plain gradient-descent
// step at outer_lr; meta_train threads the configured optimizer through.
// Per-task work runs on parallel threads; gradients are summed in task-index
// order, so the result is schedule-independent.
OuterStepResult outer_step(nn::MetaModule& module, const tasks::TaskBatch& batch,
                           const MamlConfig& config, OuterOptimizer* optimizer = nullptr);

TrainReport meta_train(const tasks::SplitDataset& dataset, nn::MetaModule& module,
                       const MamlConfig& config);

// Adapts on each evaluation task's support set only and reports query metrics.
// Task choice is a deterministic function of (config.seed, config.eval_tasks).
EvalSummary evaluate(const tasks::SplitDataset& dataset, const nn::MetaModule& module,
                     const MamlConfig& config);

}  // namespace metagrad::maml
