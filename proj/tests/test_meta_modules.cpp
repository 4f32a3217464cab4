#include <cstdio>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "metagrad/checkpoint.hpp"
#include "metagrad/modules.hpp"
#include "metagrad/ops.hpp"
#include "metagrad/rng.hpp"
#include "support/finite_diff.hpp"

using namespace metagrad;
using namespace metagrad::ad;
using namespace metagrad::nn;

namespace {

Tensor random_tensor(std::mt19937_64& rng, std::vector<std::size_t> shape) {
    std::uniform_real_distribution<double> dis(-1.0, 1.0);
    std::vector<double> v(shape_numel(shape));
    for (double& x : v) x = dis(rng);
    return Tensor(std::move(shape), std::move(v));
}

}  // namespace

TEST_CASE("named_parameters paths and determinism") {
    Rng rng(1);
    MetaLinear lin(3, 2, true, rng);
    ParamSet p = lin.named_parameters();
    CHECK(p.paths() == std::vector<std::string>{"weight", "bias"});
    CHECK(p.at("weight").shape() == std::vector<std::size_t>{2, 3});
    CHECK(p.at("bias").shape() == std::vector<std::size_t>{2});

    MetaSequential seq;
    seq.add(std::make_unique<MetaLinear>(3, 4, true, rng));
    seq.add(std::make_unique<MetaLinear>(4, 2, true, rng));
    CHECK(seq.named_parameters().paths() ==
          std::vector<std::string>{"0.weight", "0.bias", "1.weight", "1.bias"});
    CHECK(seq.named_parameters().paths() == seq.named_parameters().paths());
}

TEST_CASE("mlp paths include activation slots") {
    Rng rng(2);
    auto mlp = make_mlp(1, {40, 40}, 1, Activation::Tanh, rng);
    CHECK(mlp->named_parameters().paths() ==
          std::vector<std::string>{"0.weight", "0.bias", "2.weight", "2.bias", "4.weight",
                                   "4.bias"});
}

TEST_CASE("default forward equals substituted stored parameters bit-exactly") {
    Rng rng(3);
    auto mlp = make_mlp(2, {5}, 3, Activation::Relu, rng);
    std::mt19937_64 trng(4);
    Tensor x = random_tensor(trng, {7, 2});

    Tensor y_default = mlp->forward(x);
    Tensor y_explicit = mlp->forward(x, mlp->named_parameters());
    CHECK(y_default.values() == y_explicit.values());
    CHECK(y_default.shape() == std::vector<std::size_t>{7, 3});
}

TEST_CASE("zero-step substitution reproduces default output bit-exactly") {
    Rng rng(5);
    MetaLinear lin(3, 2, true, rng);
    std::mt19937_64 trng(6);
    Tensor x = random_tensor(trng, {4, 3});

    Graph g;
    ParamSet leaves = lin.named_parameters().attached_to(g);
    Tensor loss = reduce_mean(lin.forward_with(x, ParamView(leaves)));
    auto grads = ad::grad(loss, leaves.tensors(), true);
    ParamSet grad_set;
    {
        auto paths = leaves.paths();
        for (std::size_t i = 0; i < paths.size(); ++i) grad_set.insert(paths[i], grads[i]);
    }
    ParamSet stepped = sgd_step(leaves, grad_set, 0.0, true);
    Tensor y_stepped = lin.forward(x, stepped);
    CHECK(y_stepped.values() == lin.forward(x).values());
}

TEST_CASE("sgd_step arithmetic") {
    ParamSet params, grads;
    params.insert("w", tensor_from({1, 2}, {2}));
    grads.insert("w", tensor_from({0.5, -1}, {2}));
    ParamSet out = sgd_step(params, grads, 0.1, false);
    CHECK(out.at("w").at(0) == doctest::Approx(0.95).epsilon(1e-12));
    CHECK(out.at("w").at(1) == doctest::Approx(2.1).epsilon(1e-12));
}

TEST_CASE("sgd_step path mismatch lists the symmetric difference") {
    ParamSet params, grads;
    params.insert("a", Tensor::scalar(1));
    params.insert("b", Tensor::scalar(2));
    grads.insert("b", Tensor::scalar(1));
    grads.insert("c", Tensor::scalar(1));
    try {
        sgd_step(params, grads, 0.1, false);
        FAIL("expected ContractError");
    } catch (const ContractError& e) {
        std::string msg = e.what();
        CHECK(msg.find("a") != std::string::npos);
        CHECK(msg.find("c") != std::string::npos);
        CHECK(msg.find("b") == std::string::npos);
    }
}

TEST_CASE("missing parameter path is an explicit error, not a fallback") {
    Rng rng(7);
    MetaSequential seq;
    seq.add(std::make_unique<MetaLinear>(3, 2, true, rng));
    Tensor x = Tensor::zeros({1, 3});

    ParamSet partial;
    partial.insert("0.weight", Tensor::zeros({2, 3}));
    try {
        seq.forward(x, partial);
        FAIL("expected ContractError");
    } catch (const ContractError& e) {
        CHECK(std::string(e.what()).find("missing parameter 0.bias") != std::string::npos);
    }
}

TEST_CASE("substituted parameter shape mismatch names the path") {
    Rng rng(8);
    MetaSequential seq;
    seq.add(std::make_unique<MetaLinear>(3, 2, false, rng));
    ParamSet bad;
    bad.insert("0.weight", Tensor::zeros({3, 2}));
    try {
        seq.forward(Tensor::zeros({1, 3}), bad);
        FAIL("expected ShapeError");
    } catch (const ShapeError& e) {
        std::string msg = e.what();
        CHECK(msg.find("0.weight") != std::string::npos);
        CHECK(msg.find("[2, 3]") != std::string::npos);
        CHECK(msg.find("[3, 2]") != std::string::npos);
    }
}

TEST_CASE("constant substitution cuts gradient flow to stored parameters") {
    Rng rng(9);
    MetaLinear lin(2, 2, true, rng);
    std::mt19937_64 trng(10);
    Tensor x = random_tensor(trng, {3, 2});

    Graph g;
    ParamSet stored_leaves = lin.named_parameters().attached_to(g);
    // Supplied parameters are fresh constants, unrelated to the stored leaves.
    ParamSet constants;
    constants.insert("weight", random_tensor(trng, {2, 2}));
    constants.insert("bias", random_tensor(trng, {2}));
    ParamSet attached_constants = constants.attached_to(g);

    Tensor loss = reduce_mean(lin.forward_with(x, ParamView(attached_constants)));
    auto grads = ad::grad(loss, stored_leaves.tensors());
    for (const Tensor& t : grads) {
        for (std::size_t i = 0; i < t.numel(); ++i) CHECK(t.at(i) == 0.0);
    }
}

TEST_CASE("outer gradient through one substituted step matches finite differences") {
    // 2-unit linear layer, one inner mse step on a support example, outer mse
    // on a query example; the whole pipeline as a black box.
    Rng rng(11);
    std::mt19937_64 trng(12);
    Tensor x_train = random_tensor(trng, {4, 2});
    Tensor y_train = random_tensor(trng, {4, 2});
    Tensor x_test = random_tensor(trng, {3, 2});
    Tensor y_test = random_tensor(trng, {3, 2});
    const double alpha = 0.1;

    MetaLinear lin(2, 2, true, rng);
    ParamSet init = lin.named_parameters();
    auto paths = init.paths();

    auto pipeline = [&](const ParamSet& start, Graph& g, bool second_order) {
        ParamSet leaves = start.attached_to(g);
        Tensor inner = mse_loss(lin.forward_with(x_train, ParamView(leaves)), y_train);
        auto gs = ad::grad(inner, leaves.tensors(), second_order);
        ParamSet grad_set;
        for (std::size_t i = 0; i < paths.size(); ++i) grad_set.insert(paths[i], gs[i]);
        ParamSet adapted = sgd_step(leaves, grad_set, alpha, second_order);
        Tensor outer = mse_loss(lin.forward_with(x_test, ParamView(adapted)), y_test);
        return std::pair{outer, leaves};
    };

    Graph g;
    auto [outer, leaves] = pipeline(init, g, true);
    auto engine_grads = ad::grad(outer, leaves.tensors());

    std::vector<std::vector<double>> flat;
    for (const auto& [p, t] : init.entries()) flat.push_back(t.values());
    auto f = [&](const std::vector<std::vector<double>>& xs) {
        ParamSet start;
        for (std::size_t i = 0; i < paths.size(); ++i)
            start.insert(paths[i], Tensor(init.at(paths[i]).shape(), xs[i]));
        Graph fg;
        return pipeline(start, fg, true).first.item();
    };
    auto fd = testsupport::finite_diff(f, flat);

    for (std::size_t i = 0; i < paths.size(); ++i) {
        for (std::size_t j = 0; j < engine_grads[i].numel(); ++j) {
            CHECK(testsupport::close(engine_grads[i].at(j), fd[i][j], 1e-9, 1e-4));
        }
    }
}

TEST_CASE("first-order step detaches the gradient path") {
    Rng rng(13);
    std::mt19937_64 trng(14);
    Tensor x_train = random_tensor(trng, {4, 2});
    Tensor y_train = random_tensor(trng, {4, 2});
    Tensor x_test = random_tensor(trng, {3, 2});
    Tensor y_test = random_tensor(trng, {3, 2});

    MetaLinear lin(2, 2, true, rng);
    ParamSet init = lin.named_parameters();
    auto paths = init.paths();

    auto outer_grads = [&](bool second_order) {
        Graph g;
        ParamSet leaves = init.attached_to(g);
        Tensor inner = mse_loss(lin.forward_with(x_train, ParamView(leaves)), y_train);
        auto gs = ad::grad(inner, leaves.tensors(), second_order);
        ParamSet grad_set;
        for (std::size_t i = 0; i < paths.size(); ++i) grad_set.insert(paths[i], gs[i]);
        ParamSet adapted = sgd_step(leaves, grad_set, 0.1, second_order);
        Tensor outer = mse_loss(lin.forward_with(x_test, ParamView(adapted)), y_test);
        return std::pair{outer.item(), ad::grad(outer, leaves.tensors())};
    };

    auto [loss_second, g_second] = outer_grads(true);
    auto [loss_first, g_first] = outer_grads(false);

    // The forward losses agree; the gradients must not.
    CHECK(loss_second == loss_first);
    double diff_norm = 0;
    for (std::size_t i = 0; i < g_second.size(); ++i)
        for (std::size_t j = 0; j < g_second[i].numel(); ++j) {
            const double d = g_second[i].at(j) - g_first[i].at(j);
            diff_norm += d * d;
        }
    CHECK(diff_norm > 0);

    // First-order equals the analytic detached chain: gradient of the outer
    // loss at the adapted parameters, taken w.r.t. the adapted parameters.
    Graph g;
    ParamSet leaves = init.attached_to(g);
    Tensor inner = mse_loss(lin.forward_with(x_train, ParamView(leaves)), y_train);
    auto gs = ad::grad(inner, leaves.tensors(), false);
    ParamSet adapted_const;
    for (std::size_t i = 0; i < paths.size(); ++i) {
        adapted_const.insert(paths[i],
                             ad::sub(init.at(paths[i]), ad::scale(gs[i], 0.1)).detached());
    }
    Graph g2;
    ParamSet adapted_leaves = adapted_const.attached_to(g2);
    Tensor outer = mse_loss(lin.forward_with(x_test, ParamView(adapted_leaves)), y_test);
    auto direct = ad::grad(outer, adapted_leaves.tensors());
    for (std::size_t i = 0; i < paths.size(); ++i)
        for (std::size_t j = 0; j < direct[i].numel(); ++j)
            CHECK(g_first[i].at(j) == doctest::Approx(direct[i].at(j)).epsilon(1e-12));
}

TEST_CASE("paramset checkpoint round-trips bit-exactly") {
    std::mt19937_64 trng(15);
    ParamSet params;
    params.insert("layers.0.weight", random_tensor(trng, {4, 3}));
    params.insert("layers.0.bias", random_tensor(trng, {4}));
    params.insert("scalar", Tensor::scalar(-0.0));  // sign bit must survive
    params.insert("deep.nested.path.value", random_tensor(trng, {2, 2}));

    auto file = std::filesystem::temp_directory_path() / "metagrad_ckpt_test.bin";
    save_paramset(params, file);
    ParamSet loaded = load_paramset(file);

    CHECK(loaded.paths() == params.paths());
    for (const auto& [path, tensor] : params.entries()) {
        const Tensor& back = loaded.at(path);
        CHECK(back.shape() == tensor.shape());
        for (std::size_t i = 0; i < tensor.numel(); ++i) {
            CHECK(std::bit_cast<std::uint64_t>(back.at(i)) ==
                  std::bit_cast<std::uint64_t>(tensor.at(i)));
        }
    }
    std::filesystem::remove(file);
}

TEST_CASE("duplicate parameter path rejected") {
    ParamSet p;
    p.insert("w", Tensor::scalar(1));
    CHECK_THROWS_AS(p.insert("w", Tensor::scalar(2)), ContractError);
}
