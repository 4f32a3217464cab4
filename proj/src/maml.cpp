#include "metagrad/maml.hpp"

#include <omp.h>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "metagrad/error.hpp"
#include "metagrad/ops.hpp"

namespace metagrad::maml {

namespace {

constexpr std::uint64_t kEvalStream = 0xe7a1;

std::size_t flat_dim(const std::vector<std::size_t>& shape) {
    std::size_t d = 1;
    for (std::size_t e : shape) d *= e;
    return d;
}

nn::ParamSet zip_params(const std::vector<std::string>& paths,
                        const std::vector<ad::Tensor>& tensors) {
    nn::ParamSet out;
    for (std::size_t i = 0; i < paths.size(); ++i) out.insert(paths[i], tensors[i]);
    return out;
}

// Row b of a [B, n, dims...] tensor as a flattened [n, prod(dims)] matrix.
ad::Tensor slice_task_matrix(const ad::Tensor& batched, std::size_t b) {
    const std::size_t n = batched.extent(1);
    std::size_t d = 1;
    for (std::size_t i = 2; i < batched.rank(); ++i) d *= batched.extent(i);
    std::vector<double> values(n * d);
    const std::size_t offset = b * n * d;
    std::copy(batched.values().begin() + static_cast<std::ptrdiff_t>(offset),
              batched.values().begin() + static_cast<std::ptrdiff_t>(offset + n * d),
              values.begin());
    return ad::Tensor({n, d}, std::move(values));
}

std::vector<std::size_t> slice_task_labels(const ad::Tensor& batched, std::size_t b) {
    const std::size_t n = batched.extent(1);
    std::vector<std::size_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        labels[i] = static_cast<std::size_t>(batched.at(b * n + i));
    }
    return labels;
}

TaskMatrices matrices_from_batch_row(const tasks::TaskBatch& batch, std::size_t b, bool train) {
    TaskMatrices m;
    m.classification = batch.classification;
    m.inputs = slice_task_matrix(train ? batch.train_inputs : batch.test_inputs, b);
    if (batch.classification) {
        m.labels = slice_task_labels(train ? batch.train_targets : batch.test_targets, b);
    } else {
        m.targets = slice_task_matrix(train ? batch.train_targets : batch.test_targets, b);
    }
    return m;
}

double mean_of(const std::vector<double>& xs) {
    double acc = 0;
    for (double x : xs) acc += x;
    return xs.empty() ? 0.0 : acc / double(xs.size());
}

double std_of(const std::vector<double>& xs, double mean) {
    if (xs.size() < 2) return 0.0;
    double acc = 0;
    for (double x : xs) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / double(xs.size() - 1));
}

}  // namespace

void MamlConfig::validate() const {
    if (inner_lr < 0 || outer_lr < 0) throw ConfigError("MamlConfig: learning rates must be >= 0");
    if (inner_steps == 0) throw ConfigError("MamlConfig: inner_steps must be >= 1");
    if (meta_batch_size == 0) throw ConfigError("MamlConfig: meta_batch_size must be >= 1");
}

OuterOptimizer::OuterOptimizer(const MamlConfig& config, const nn::ParamSet& params)
    : kind_(config.outer_opt),
      lr_(config.outer_lr),
      beta1_(config.adam_beta1),
      beta2_(config.adam_beta2),
      eps_(config.adam_eps) {
    for (const auto& [path, t] : params.entries()) {
        m_.emplace_back(t.numel(), 0.0);
        v_.emplace_back(t.numel(), 0.0);
    }
}

void OuterOptimizer::apply(nn::MetaModule& module,
                           const std::vector<std::vector<double>>& mean_grads) {
    const nn::ParamSet current = module.named_parameters();
    const auto paths = current.paths();
    ++step_;

    nn::ParamSet updated;
    for (std::size_t p = 0; p < paths.size(); ++p) {
        const ad::Tensor& old = current.at(paths[p]);
        std::vector<double> values(old.numel());
        if (kind_ == OuterOpt::Sgd) {
            for (std::size_t i = 0; i < values.size(); ++i) {
                values[i] = old.at(i) - lr_ * mean_grads[p][i];
            }
        } else {
            const double bc1 = 1.0 - std::pow(beta1_, double(step_));
            const double bc2 = 1.0 - std::pow(beta2_, double(step_));
            for (std::size_t i = 0; i < values.size(); ++i) {
                const double g = mean_grads[p][i];
                m_[p][i] = beta1_ * m_[p][i] + (1.0 - beta1_) * g;
                v_[p][i] = beta2_ * v_[p][i] + (1.0 - beta2_) * g * g;
                const double mhat = m_[p][i] / bc1;
                const double vhat = v_[p][i] / bc2;
                values[i] = old.at(i) - lr_ * mhat / (std::sqrt(vhat) + eps_);
            }
        }
        updated.insert(paths[p], ad::Tensor(old.shape(), std::move(values)));
    }
    module.load_parameters(updated);
}

TaskMatrices task_matrices(std::span<const tasks::Example> examples, bool classification) {
    if (examples.empty()) throw ContractError("task_matrices: no examples");
    const std::size_t n = examples.size();
    const std::size_t d = flat_dim(examples.front().input.shape());

    TaskMatrices m;
    m.classification = classification;
    std::vector<double> xs;
    xs.reserve(n * d);
    for (const tasks::Example& ex : examples) {
        xs.insert(xs.end(), ex.input.values().begin(), ex.input.values().end());
    }
    m.inputs = ad::Tensor({n, d}, std::move(xs));

    if (classification) {
        m.labels.reserve(n);
        for (const tasks::Example& ex : examples) m.labels.push_back(ex.label);
    } else {
        const std::size_t t = flat_dim(examples.front().target.shape());
        std::vector<double> ys;
        ys.reserve(n * t);
        for (const tasks::Example& ex : examples) {
            ys.insert(ys.end(), ex.target.values().begin(), ex.target.values().end());
        }
        m.targets = ad::Tensor({n, t}, std::move(ys));
    }
    return m;
}

ad::Tensor apply_loss(LossKind kind, const ad::Tensor& predictions, const TaskMatrices& data) {
    switch (kind) {
        case LossKind::Mse: return ad::mse_loss(predictions, data.targets);
        case LossKind::CrossEntropy:
            return ad::softmax_cross_entropy(predictions,
                                             std::span<const std::size_t>(data.labels));
    }
    throw ContractError("apply_loss: unknown loss kind");
}

nn::ParamSet adapt_from(const nn::MetaModule& module, const nn::ParamSet& start,
                        const TaskMatrices& support, const MamlConfig& config) {
    const bool second_order = !config.first_order;
    const std::vector<std::string> paths = start.paths();

    nn::ParamSet current = start;
    for (std::size_t step = 0; step < config.inner_steps; ++step) {
        ad::Tensor predictions = module.forward_with(support.inputs, nn::ParamView(current));
        ad::Tensor inner_loss = apply_loss(config.loss, predictions, support);
        std::vector<ad::Tensor> grads = ad::grad(inner_loss, current.tensors(), second_order);
        current = nn::sgd_step(current, zip_params(paths, grads), config.inner_lr, second_order);
    }
    return current;
}

nn::ParamSet adapt(ad::Graph& g, const nn::MetaModule& module, const tasks::SplitTask& task,
                   const MamlConfig& config) {
    config.validate();
    const TaskMatrices support = task_matrices(task.train, task.num_classes > 0);
    return adapt_from(module, module.named_parameters().attached_to(g), support, config);
}

OuterStepResult outer_step(nn::MetaModule& module, const tasks::TaskBatch& batch,
                           const MamlConfig& config, OuterOptimizer* optimizer) {
    config.validate();
    if (batch.size() == 0) throw ContractError("outer_step: empty batch");

    const nn::ParamSet init = module.named_parameters();
    const std::vector<std::string> paths = init.paths();
    const std::size_t b = batch.size();

    struct TaskResult {
        double outer_loss = 0;
        double pre_loss = 0;
        std::vector<ad::Tensor> grads;
    };
    std::vector<TaskResult> results(b);
    std::exception_ptr failure;

    // Tasks are independent graphs; gradients are reduced in task-index order
    // below, so the parallel schedule never changes the outcome.
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t ti = 0; ti < static_cast<std::int64_t>(b); ++ti) {
        try {
            const std::size_t t = static_cast<std::size_t>(ti);
            const TaskMatrices support = matrices_from_batch_row(batch, t, /*train=*/true);
            const TaskMatrices query = matrices_from_batch_row(batch, t, /*train=*/false);

            ad::Graph g;
            nn::ParamSet leaves = init.attached_to(g);
            nn::ParamSet adapted = adapt_from(module, leaves, support, config);

            ad::Tensor outer_loss =
                apply_loss(config.loss, module.forward_with(query.inputs, nn::ParamView(adapted)),
                           query);
            std::vector<ad::Tensor> grads = ad::grad(outer_loss, leaves.tensors());

            ad::Tensor pre_loss = apply_loss(config.loss, module.forward(query.inputs), query);

            TaskResult& r = results[t];
            r.outer_loss = outer_loss.item();
            r.pre_loss = pre_loss.item();
            r.grads = std::move(grads);
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    // Mean gradient over tasks, accumulated in task order.
    std::vector<std::vector<double>> acc(paths.size());
    for (std::size_t p = 0; p < paths.size(); ++p) {
        acc[p].assign(init.at(paths[p]).numel(), 0.0);
    }
    OuterStepResult out;
    for (std::size_t t = 0; t < b; ++t) {
        out.outer_loss += results[t].outer_loss;
        out.pre_adapt_loss += results[t].pre_loss;
        for (std::size_t p = 0; p < paths.size(); ++p) {
            const auto& g = results[t].grads[p].values();
            for (std::size_t i = 0; i < g.size(); ++i) acc[p][i] += g[i];
        }
    }
    out.outer_loss /= double(b);
    out.pre_adapt_loss /= double(b);
    for (auto& g : acc) {
        for (double& x : g) x /= double(b);
    }

    if (optimizer) {
        optimizer->apply(module, acc);
    } else {
        nn::ParamSet updated;
        for (std::size_t p = 0; p < paths.size(); ++p) {
            const ad::Tensor& old = init.at(paths[p]);
            std::vector<double> values(old.numel());
            for (std::size_t i = 0; i < values.size(); ++i) {
                values[i] = old.at(i) - config.outer_lr * acc[p][i];
            }
            updated.insert(paths[p], ad::Tensor(old.shape(), std::move(values)));
        }
        module.load_parameters(updated);
    }
    return out;
}

TrainReport meta_train(const tasks::SplitDataset& dataset, nn::MetaModule& module,
                       const MamlConfig& config) {
    config.validate();
    auto shared = std::make_shared<const tasks::SplitDataset>(dataset);
    tasks::BatchLoader loader(shared, config.meta_batch_size, /*shuffle=*/true, config.seed);
    OuterOptimizer optimizer(config, module.named_parameters());

    TrainReport report;
    report.records.reserve(config.total_outer_steps);
    for (std::size_t step = 0; step < config.total_outer_steps; ++step) {
        auto batch = loader.next();
        if (!batch) {
            loader.restart();
            batch = loader.next();
            if (!batch) throw ContractError("meta_train: dataset yields no batches");
        }
        const auto start = std::chrono::steady_clock::now();
        const OuterStepResult r = outer_step(module, *batch, config, &optimizer);
        const auto end = std::chrono::steady_clock::now();

        StepRecord rec;
        rec.step = step;
        rec.outer_loss = r.outer_loss;
        rec.pre_adapt_loss = r.pre_adapt_loss;
        rec.post_adapt_loss = r.outer_loss;
        rec.wall_ms = std::chrono::duration<double, std::milli>(end - start).count();
        report.records.push_back(rec);
    }
    return report;
}

EvalSummary evaluate(const tasks::SplitDataset& dataset, const nn::MetaModule& module,
                     const MamlConfig& config) {
    config.validate();
    if (dataset.num_tasks() == 0) throw ContractError("evaluate: empty dataset");

    // Evaluation task indices are a pure function of (seed, eval_tasks).
    std::vector<std::size_t> indices(config.eval_tasks);
    {
        Rng rng(mix64(config.seed, kEvalStream));
        for (auto& i : indices) i = rng.next_below(dataset.num_tasks());
    }

    EvalSummary summary;
    summary.tasks = indices.size();
    summary.pre_losses.resize(indices.size());
    summary.post_losses.resize(indices.size());
    summary.accuracies.resize(indices.size());
    bool classification = false;
    std::exception_ptr failure;

#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t ti = 0; ti < static_cast<std::int64_t>(indices.size()); ++ti) {
        try {
            const std::size_t t = static_cast<std::size_t>(ti);
            const tasks::SplitTask task = dataset.get(indices[t]);
            const TaskMatrices support = task_matrices(task.train, task.num_classes > 0);
            const TaskMatrices query = task_matrices(task.test, task.num_classes > 0);

            // Adapted parameter values do not depend on graph recording, so
            // evaluation runs the cheaper first-order path.
            MamlConfig eval_cfg = config;
            eval_cfg.first_order = true;

            ad::Graph g;
            nn::ParamSet leaves = module.named_parameters().attached_to(g);
            nn::ParamSet adapted = adapt_from(module, leaves, support, eval_cfg);

            ad::Tensor post_pred = module.forward_with(query.inputs, nn::ParamView(adapted));
            summary.post_losses[t] = apply_loss(config.loss, post_pred, query).item();
            summary.pre_losses[t] =
                apply_loss(config.loss, module.forward(query.inputs), query).item();

            if (task.num_classes > 0) {
                classification = true;
                std::size_t hits = 0;
                const std::size_t n = post_pred.extent(0), c = post_pred.extent(1);
                for (std::size_t i = 0; i < n; ++i) {
                    std::size_t best = 0;
                    for (std::size_t j = 1; j < c; ++j) {
                        if (post_pred.at(i, j) > post_pred.at(i, best)) best = j;
                    }
                    hits += best == query.labels[i] ? 1 : 0;
                }
                summary.accuracies[t] = double(hits) / double(n);
            }
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    summary.mean_post_loss = mean_of(summary.post_losses);
    summary.std_post_loss = std_of(summary.post_losses, summary.mean_post_loss);
    summary.mean_pre_loss = mean_of(summary.pre_losses);
    if (classification) {
        summary.mean_accuracy = mean_of(summary.accuracies);
        summary.std_accuracy = std_of(summary.accuracies, summary.mean_accuracy);
    }
    return summary;
}

void write_report_csv(const TrainReport& report, const std::filesystem::path& file) {
    std::ofstream os(file, std::ios::trunc);
    if (!os) throw Error("cannot write report " + file.string());
    os << "step,outer_loss,pre_adapt_loss,post_adapt_loss,wall_ms\n";
    os << std::setprecision(17);
    for (const StepRecord& r : report.records) {
        os << r.step << "," << r.outer_loss << "," << r.pre_adapt_loss << ","
           << r.post_adapt_loss << "," << r.wall_ms << "\n";
    }
    if (!os) throw Error("report write failed: " + file.string());
}

}  // namespace metagrad::maml
