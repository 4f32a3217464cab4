// Command-line front end: synthetic corpus generation, dataset inspection,
// and the reference MAML trainer for few-shot regression and classification.

#include <iomanip>
#include <iostream>

#include "CLI11.hpp"
#include "metagrad/checkpoint.hpp"
#include "metagrad/combinatorics.hpp"
#include "metagrad/ingest.hpp"
#include "metagrad/maml.hpp"
#include "metagrad/synthetic.hpp"
#include "metagrad/toy.hpp"

using namespace metagrad;

namespace {

constexpr std::uint64_t kInitStream = 0x101;
constexpr std::uint64_t kDataStream = 0x202;
constexpr std::uint64_t kEvalDataStream = 0x303;

struct TrainFlags {
    double inner_lr = 0.01;
    double outer_lr = 0.001;
    std::size_t inner_steps = 1;
    std::size_t meta_batch = 4;
    std::size_t outer_steps = 2000;
    std::uint64_t seed = 0;
    bool first_order = false;
    std::string report;
    std::string checkpoint_out;
    std::vector<std::size_t> hidden = {40, 40};
    std::size_t eval_tasks = 100;
    std::string outer_opt = "adam";
};

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
    cmd->add_option("--inner-lr", f.inner_lr, "Inner-loop learning rate (alpha)");
    cmd->add_option("--outer-lr", f.outer_lr, "Outer-loop learning rate");
    cmd->add_option("--inner-steps", f.inner_steps, "Adaptation steps per task");
    cmd->add_option("--meta-batch", f.meta_batch, "Tasks per outer step");
    cmd->add_option("--outer-steps", f.outer_steps, "Total outer steps");
    cmd->add_option("--seed", f.seed, "Seed controlling every random choice");
    cmd->add_flag("--first-order", f.first_order, "First-order approximation");
    cmd->add_option("--report", f.report, "Write per-step CSV here");
    cmd->add_option("--checkpoint-out", f.checkpoint_out, "Save final parameters here");
    cmd->add_option("--hidden", f.hidden, "Hidden layer widths")->expected(-1);
    cmd->add_option("--eval-tasks", f.eval_tasks, "Held-out tasks for the final evaluation");
    cmd->add_option("--outer-opt", f.outer_opt, "Outer optimizer: adam or sgd")
        ->check(CLI::IsMember({"adam", "sgd"}));
}

maml::MamlConfig to_config(const TrainFlags& f, maml::LossKind loss) {
    maml::MamlConfig cfg;
    cfg.inner_lr = f.inner_lr;
    cfg.outer_lr = f.outer_lr;
    cfg.inner_steps = f.inner_steps;
    cfg.first_order = f.first_order;
    cfg.meta_batch_size = f.meta_batch;
    cfg.total_outer_steps = f.outer_steps;
    cfg.seed = f.seed;
    cfg.loss = loss;
    cfg.eval_tasks = f.eval_tasks;
    return cfg;
}

void finish_run(const maml::TrainReport& report, const maml::EvalSummary& eval,
                const TrainFlags& flags, const nn::MetaModule& module, bool classification) {
    if (!flags.report.empty()) {
        maml::write_report_csv(report, flags.report);
        std::cout << "report: " << flags.report << "\n";
    }
    if (!flags.checkpoint_out.empty()) {
        nn::save_paramset(module.named_parameters(), flags.checkpoint_out);
        std::cout << "checkpoint: " << flags.checkpoint_out << "\n";
    }
    if (!report.records.empty()) {
        const auto& last = report.records.back();
        std::cout << "final outer loss: " << last.outer_loss << "\n";
    }
    std::cout << "eval over " << eval.tasks << " held-out tasks:\n";
    std::cout << "  post-adaptation loss: " << eval.mean_post_loss << " +- " << eval.std_post_loss
              << " (pre-adaptation " << eval.mean_pre_loss << ")\n";
    if (classification) {
        std::cout << "  accuracy: " << eval.mean_accuracy << " +- " << eval.std_accuracy << "\n";
    }
}

tasks::SplitDataset sinusoid_dataset(std::uint64_t seed, MetaSplit split, std::size_t shots,
                                     std::size_t test_shots, std::optional<double> noise_std,
                                     std::uint64_t stream) {
    toy::ToyConfig cfg;
    cfg.num_samples_per_task = shots + test_shots;
    cfg.num_tasks = 1'000'000;
    cfg.noise_std = noise_std;
    cfg.seed = mix64(seed, stream);
    cfg.meta_split = split;
    auto base = std::make_shared<toy::SinusoidDataset>(cfg);
    tasks::SplitConfig sc{.k_train = shots, .k_test = test_shots, .shuffle = true,
                          .seed = mix64(seed, stream + 1)};
    return tasks::SplitDataset(base, sc);
}

int run_train_sinusoid(const TrainFlags& flags, std::size_t shots, std::size_t test_shots,
                       std::optional<double> noise_std) {
    auto train_ds = sinusoid_dataset(flags.seed, MetaSplit::Train, shots, test_shots, noise_std,
                                     kDataStream);
    auto eval_ds = sinusoid_dataset(flags.seed, MetaSplit::Test, shots, test_shots, noise_std,
                                    kEvalDataStream);

    Rng init_rng(mix64(flags.seed, kInitStream));
    auto mlp = nn::make_mlp(1, flags.hidden, 1, nn::Activation::Tanh, init_rng);

    maml::MamlConfig cfg = to_config(flags, maml::LossKind::Mse);
    maml::TrainReport report = maml::meta_train(train_ds, *mlp, cfg);
    maml::EvalSummary eval = maml::evaluate(eval_ds, *mlp, cfg);
    finish_run(report, eval, flags, *mlp, false);
    return 0;
}

struct FewshotData {
    std::shared_ptr<data::ClassStore> store;
    std::size_t input_dim = 0;
};

FewshotData load_fewshot(const std::string& root, const std::string& manifest_file,
                         std::size_t channels, std::size_t image_size) {
    FewshotData out;
    out.store = data::ingest_directory(root, std::filesystem::path(manifest_file));
    if (channels != 0 || image_size != 0) {
        const auto& shape = out.store->example_shape();
        const std::size_t c = channels ? channels : shape[0];
        const std::size_t s = image_size ? image_size : shape[1];
        out.store = data::reshape_store(out.store, c, s, s);
    }
    const auto& shape = out.store->example_shape();
    out.input_dim = shape[0] * shape[1] * shape[2];
    return out;
}

tasks::SplitDataset fewshot_dataset(const FewshotData& d, std::size_t ways, MetaSplit split,
                                    std::size_t shots, std::size_t test_shots,
                                    std::uint64_t seed) {
    auto base = std::make_shared<tasks::CombinationDataset>(d.store, ways, split);
    tasks::SplitConfig sc{.k_train = shots, .k_test = test_shots, .shuffle = true,
                          .seed = mix64(seed, kDataStream)};
    return tasks::SplitDataset(base, sc);
}

int run_train_fewshot(const TrainFlags& flags, const std::string& root,
                      const std::string& manifest, std::size_t ways, std::size_t shots,
                      std::size_t test_shots, std::size_t channels, std::size_t image_size) {
    FewshotData d = load_fewshot(root, manifest, channels, image_size);
    auto train_ds = fewshot_dataset(d, ways, MetaSplit::Train, shots, test_shots, flags.seed);
    auto eval_ds = fewshot_dataset(d, ways, MetaSplit::Test, shots, test_shots, flags.seed);

    Rng init_rng(mix64(flags.seed, kInitStream));
    auto mlp = nn::make_mlp(d.input_dim, flags.hidden, ways, nn::Activation::Relu, init_rng);

    maml::MamlConfig cfg = to_config(flags, maml::LossKind::CrossEntropy);
    maml::TrainReport report = maml::meta_train(train_ds, *mlp, cfg);
    maml::EvalSummary eval = maml::evaluate(eval_ds, *mlp, cfg);
    finish_run(report, eval, flags, *mlp, true);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"metagrad: gradient-based meta-learning toolkit"};
    app.require_subcommand(1);

    // train-sinusoid
    TrainFlags sin_flags;
    std::size_t sin_shots = 5, sin_test_shots = 10;
    double sin_noise = -1.0;
    auto* train_sin = app.add_subcommand("train-sinusoid", "Meta-train on sine-wave regression");
    train_sin->add_option("--shots", sin_shots, "Support examples per task");
    train_sin->add_option("--test-shots", sin_test_shots, "Query examples per task");
    train_sin->add_option("--noise-std", sin_noise, "Target noise standard deviation");
    add_train_flags(train_sin, sin_flags);

    // train-fewshot
    TrainFlags few_flags;
    std::string few_root, few_manifest;
    std::size_t few_ways = 5, few_shots = 1, few_test_shots = 15;
    std::size_t few_channels = 0, few_size = 0;
    auto* train_few =
        app.add_subcommand("train-fewshot", "Meta-train N-way k-shot classification");
    train_few->add_option("--data", few_root, "Dataset root directory")->required();
    train_few->add_option("--manifest", few_manifest, "Manifest file")->required();
    train_few->add_option("--ways", few_ways, "Classes per task");
    train_few->add_option("--shots", few_shots, "Support examples per class");
    train_few->add_option("--test-shots", few_test_shots, "Query examples per class");
    train_few->add_option("--channels", few_channels, "Replicate grayscale to this many channels");
    train_few->add_option("--image-size", few_size, "Nearest-neighbour resize to this size");
    add_train_flags(train_few, few_flags);

    // eval
    TrainFlags eval_flags;
    std::string eval_checkpoint, eval_root, eval_manifest;
    std::size_t eval_ways = 5, eval_shots = 5, eval_test_shots = 10;
    std::size_t eval_channels = 0, eval_size = 0;
    double eval_noise = -1.0;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on the meta-test split");
    eval_cmd->add_option("--checkpoint", eval_checkpoint, "ParamSet checkpoint")->required();
    eval_cmd->add_option("--data", eval_root, "Dataset root (classification mode)");
    eval_cmd->add_option("--manifest", eval_manifest, "Manifest file (classification mode)");
    eval_cmd->add_option("--ways", eval_ways, "Classes per task");
    eval_cmd->add_option("--shots", eval_shots, "Support examples");
    eval_cmd->add_option("--test-shots", eval_test_shots, "Query examples");
    eval_cmd->add_option("--channels", eval_channels, "Replicate grayscale channels");
    eval_cmd->add_option("--image-size", eval_size, "Resize to this size");
    eval_cmd->add_option("--noise-std", eval_noise, "Sinusoid target noise");
    add_train_flags(eval_cmd, eval_flags);

    // inspect-dataset
    std::string insp_root, insp_manifest;
    std::size_t insp_ways = 5;
    auto* inspect = app.add_subcommand("inspect-dataset", "Print split sizes and task counts");
    inspect->add_option("--data", insp_root, "Dataset root directory")->required();
    inspect->add_option("--manifest", insp_manifest, "Manifest file")->required();
    inspect->add_option("--ways", insp_ways, "Classes per task for the count");

    // gen-synthetic
    data::SyntheticSpec spec;
    std::string gen_out;
    auto* gen = app.add_subcommand("gen-synthetic", "Generate the procedural glyph corpus");
    gen->add_option("--classes", spec.num_classes, "Number of classes");
    gen->add_option("--per-class", spec.examples_per_class, "Examples per class");
    gen->add_option("--size", spec.image_size, "Image side length");
    gen->add_option("--seed", spec.seed, "Generator seed");
    gen->add_option("--out", gen_out, "Output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (train_sin->parsed()) {
            std::optional<double> noise;
            if (sin_noise >= 0.0) noise = sin_noise;
            return run_train_sinusoid(sin_flags, sin_shots, sin_test_shots, noise);
        }
        if (train_few->parsed()) {
            return run_train_fewshot(few_flags, few_root, few_manifest, few_ways, few_shots,
                                     few_test_shots, few_channels, few_size);
        }
        if (eval_cmd->parsed()) {
            nn::ParamSet params = nn::load_paramset(eval_checkpoint);
            maml::EvalSummary summary;
            bool classification = !eval_root.empty();
            if (classification) {
                FewshotData d = load_fewshot(eval_root, eval_manifest, eval_channels, eval_size);
                auto ds = fewshot_dataset(d, eval_ways, MetaSplit::Test, eval_shots,
                                          eval_test_shots, eval_flags.seed);
                Rng init_rng(mix64(eval_flags.seed, kInitStream));
                auto mlp = nn::make_mlp(d.input_dim, eval_flags.hidden, eval_ways,
                                        nn::Activation::Relu, init_rng);
                mlp->load_parameters(params);
                summary = maml::evaluate(ds, *mlp, to_config(eval_flags, maml::LossKind::CrossEntropy));
                std::cout << "accuracy: " << summary.mean_accuracy << " +- "
                          << summary.std_accuracy << "\n";
            } else {
                std::optional<double> noise;
                if (eval_noise >= 0.0) noise = eval_noise;
                auto ds = sinusoid_dataset(eval_flags.seed, MetaSplit::Test, eval_shots,
                                           eval_test_shots, noise, kEvalDataStream);
                Rng init_rng(mix64(eval_flags.seed, kInitStream));
                auto mlp = nn::make_mlp(1, eval_flags.hidden, 1, nn::Activation::Tanh, init_rng);
                mlp->load_parameters(params);
                summary = maml::evaluate(ds, *mlp, to_config(eval_flags, maml::LossKind::Mse));
            }
            std::cout << "post-adaptation loss: " << summary.mean_post_loss << " +- "
                      << summary.std_post_loss << " (pre-adaptation " << summary.mean_pre_loss
                      << ") over " << summary.tasks << " tasks\n";
            return 0;
        }
        if (inspect->parsed()) {
            data::DatasetManifest manifest =
                data::DatasetManifest::load(std::filesystem::path(insp_manifest));
            std::size_t files = 0;
            for (const auto& c : manifest.classes) files += c.files.size();
            std::cout << "root: " << insp_root << "\n";
            std::cout << "image shape: [" << manifest.image_shape[0] << ", "
                      << manifest.image_shape[1] << ", " << manifest.image_shape[2] << "]\n";
            std::cout << "classes: " << manifest.classes.size() << ", files: " << files << "\n";
            for (MetaSplit s : {MetaSplit::Train, MetaSplit::Val, MetaSplit::Test}) {
                const std::size_t n = manifest.split_size(s);
                std::cout << "  " << to_string(s) << ": " << n << " classes, C(" << n << ", "
                          << insp_ways << ") = " << tasks::binomial(n, insp_ways) << " tasks\n";
            }
            return 0;
        }
        if (gen->parsed()) {
            data::DatasetManifest manifest = data::generate_synthetic_corpus(gen_out, spec);
            std::size_t files = 0;
            for (const auto& c : manifest.classes) files += c.files.size();
            std::cout << "wrote " << files << " images across " << manifest.classes.size()
                      << " classes to " << gen_out << "\n";
            std::cout << "manifest: " << (std::filesystem::path(gen_out) / "manifest.txt").string()
                      << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
