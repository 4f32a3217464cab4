#include <cmath>
#include <random>

#include "doctest.h"
#include "metagrad/graph.hpp"
#include "metagrad/ops.hpp"
#include "metagrad/tensor.hpp"
#include "support/finite_diff.hpp"

using namespace metagrad;
using namespace metagrad::ad;
using testsupport::close;
using testsupport::finite_diff;

namespace {

std::vector<double> random_values(std::mt19937_64& rng, std::size_t n, double lo = -2.0,
                                  double hi = 2.0) {
    std::uniform_real_distribution<double> dis(lo, hi);
    std::vector<double> v(n);
    for (double& x : v) x = dis(rng);
    return v;
}

// Builds a scalar pipeline from leaf tensors attached to a fresh graph, then
// checks grad() against central finite differences of the same pipeline.
using BuildFn =
    std::function<Tensor(Graph&, const std::vector<Tensor>&)>;

void check_gradients(const BuildFn& build, const std::vector<Tensor>& inputs,
                     double atol = 1e-6, double rtol = 1e-5, double step = 1e-5) {
    Graph g;
    std::vector<Tensor> leaves;
    for (const Tensor& in : inputs) leaves.push_back(g.leaf(in));
    Tensor out = build(g, leaves);
    std::vector<Tensor> grads = ad::grad(out, leaves);

    std::vector<std::vector<double>> flat;
    for (const Tensor& in : inputs) flat.push_back(in.values());
    auto f = [&](const std::vector<std::vector<double>>& xs) {
        Graph fg;
        std::vector<Tensor> consts;
        for (std::size_t i = 0; i < xs.size(); ++i)
            consts.push_back(fg.leaf(Tensor(inputs[i].shape(), xs[i])));
        return build(fg, consts).item();
    };
    auto expected = finite_diff(f, flat, step);

    for (std::size_t i = 0; i < inputs.size(); ++i) {
        REQUIRE(grads[i].shape() == inputs[i].shape());
        for (std::size_t j = 0; j < grads[i].numel(); ++j) {
            INFO("input ", i, " coordinate ", j);
            CHECK(close(grads[i].at(j), expected[i][j], atol, rtol));
        }
    }
}

}  // namespace

TEST_CASE("tensor_from basics") {
    Tensor t = tensor_from({1, 2, 3, 4}, {2, 2});
    CHECK(t.at(0, 0) == 1.0);
    CHECK(t.at(1, 1) == 4.0);
    CHECK_FALSE(t.attached());

    Tensor s = tensor_from({5.0}, {});
    CHECK(s.item() == 5.0);

    CHECK_THROWS_AS(tensor_from({}, {}), ShapeError);          // [] implies one value
    CHECK_THROWS_AS(tensor_from({1, 2, 3}, {2, 2}), ShapeError);

    Tensor z = tensor_from(std::vector<double>(6, 0.0), {2, 3});
    CHECK(z.numel() == 6);
}

TEST_CASE("sin at zero") {
    Graph g;
    Tensor x = g.leaf(Tensor::scalar(0.0));
    Tensor y = ad::sin(x);
    CHECK(y.item() == 0.0);
    auto grads = ad::grad(y, std::vector<Tensor>{x});
    CHECK(grads[0].item() == 1.0);
}

TEST_CASE("add gradients are ones") {
    Graph g;
    Tensor a = g.leaf(tensor_from({1, 2}, {2}));
    Tensor b = g.leaf(tensor_from({3, 4}, {2}));
    Tensor y = add(a, b);
    CHECK(y.at(0) == 4.0);
    CHECK(y.at(1) == 6.0);
    auto grads = ad::grad(reduce_sum(y), std::vector<Tensor>{a, b});
    for (int i = 0; i < 2; ++i) {
        CHECK(grads[0].at(i) == 1.0);
        CHECK(grads[1].at(i) == 1.0);
    }
}

TEST_CASE("second derivative of sin") {
    // d2/dx2 sin(x) = -sin(x); cross-checked against finite differences of cos.
    const double x0 = 0.3;
    Graph g;
    Tensor x = g.leaf(Tensor::scalar(x0));
    Tensor y = ad::sin(x);
    Tensor dy = ad::grad(y, std::vector<Tensor>{x}, /*create_graph=*/true)[0];
    Tensor d2y = ad::grad(dy, std::vector<Tensor>{x})[0];
    CHECK(close(d2y.item(), -std::sin(x0), 1e-12, 0));

    const double h = 1e-6;
    const double fd_of_cos = (std::cos(x0 + h) - std::cos(x0 - h)) / (2 * h);
    CHECK(close(d2y.item(), fd_of_cos, 1e-8, 1e-6));
}

TEST_CASE("higher-order correctness across random points") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dis(-2.0, 2.0);
    for (int i = 0; i < 100; ++i) {
        const double x0 = dis(rng);
        Graph g;
        Tensor x = g.leaf(Tensor::scalar(x0));
        Tensor dy = ad::grad(ad::sin(x), std::vector<Tensor>{x}, true)[0];
        Tensor d2y = ad::grad(dy, std::vector<Tensor>{x})[0];
        CHECK(std::abs(d2y.item() - (-std::sin(x0))) < 1e-8);
    }
}

TEST_CASE("matmul identity and hand product") {
    std::mt19937_64 rng(3);
    Tensor eye = tensor_from({1, 0, 0, 1}, {2, 2});
    Tensor x = Tensor({2, 3}, random_values(rng, 6));
    Graph g;
    Tensor y = matmul(g.leaf(eye), g.leaf(x));
    for (std::size_t i = 0; i < 6; ++i) CHECK(y.at(i) == x.at(i));

    Tensor a = tensor_from({1, 2, 3, 4}, {2, 2});
    Tensor b = tensor_from({1, 1}, {2, 1});
    Tensor p = matmul(a, b);
    CHECK(p.at(0) == 3.0);
    CHECK(p.at(1) == 7.0);

    CHECK_THROWS_AS(matmul(tensor_from({1, 2}, {1, 2}), tensor_from({1, 2, 3}, {1, 3})),
                    ShapeError);
}

TEST_CASE("matmul gradient vs finite differences") {
    std::mt19937_64 rng(11);
    Tensor a = Tensor({3, 4}, random_values(rng, 12));
    Tensor b = Tensor({4, 2}, random_values(rng, 8));
    check_gradients(
        [](Graph&, const std::vector<Tensor>& in) { return reduce_sum(matmul(in[0], in[1])); },
        {a, b}, 1e-6, 0.0);
}

TEST_CASE("reduce ops") {
    Graph g;
    Tensor v = g.leaf(tensor_from({2, 4}, {2}));
    Tensor m = reduce_mean(v);
    CHECK(m.item() == 3.0);
    auto grads = ad::grad(m, std::vector<Tensor>{v});
    CHECK(grads[0].at(0) == 0.5);
    CHECK(grads[0].at(1) == 0.5);

    CHECK(reduce_sum(Tensor::zeros({3, 3})).item() == 0.0);

    std::mt19937_64 rng(5);
    Tensor x = Tensor({5}, random_values(rng, 5));
    check_gradients(
        [](Graph&, const std::vector<Tensor>& in) { return reduce_sum(ad::sin(in[0])); }, {x});
    check_gradients(
        [](Graph&, const std::vector<Tensor>& in) { return reduce_mean(ad::tanh(in[0])); }, {x});
}

TEST_CASE("finite-difference sweep across ops") {
    std::mt19937_64 rng(17);
    Tensor m = Tensor({3, 4}, random_values(rng, 12));
    Tensor m2 = Tensor({3, 4}, random_values(rng, 12));
    Tensor v = Tensor({4}, random_values(rng, 4));
    Tensor col = Tensor({3}, random_values(rng, 3));
    Tensor pos = Tensor({3, 4}, random_values(rng, 12, 0.5, 2.5));  // log/recip domain

    auto sum_of = [](Tensor t) { return reduce_sum(std::move(t)); };

    check_gradients([&](Graph&, const std::vector<Tensor>& in) { return sum_of(add(in[0], in[1])); }, {m, m2});
    check_gradients([&](Graph&, const std::vector<Tensor>& in) { return sum_of(sub(in[0], in[1])); }, {m, m2});
    check_gradients([&](Graph&, const std::vector<Tensor>& in) { return sum_of(mul(in[0], in[1])); }, {m, m2});
    check_gradients([&](Graph&, const std::vector<Tensor>& in) { return sum_of(add(in[0], in[1])); }, {m, v});
    check_gradients([&](Graph&, const std::vector<Tensor>& in) { return sum_of(sub(in[0], in[1])); }, {m, v});
    check_gradients([&](Graph&, const std::vector<Tensor>& in) { return sum_of(mul(in[0], in[1])); }, {m, v});
    check_gradients([&](Graph&, const std::vector<Tensor>& in) { return sum_of(mul(in[1], in[0])); }, {m, v});
    check_gradients([&](Graph&, const std::vector<Tensor>& in) { return sum_of(neg(in[0])); }, {m});
    check_gradients([&](Graph&, const std::vector<Tensor>& in) { return sum_of(scale(in[0], -1.7)); }, {m});
    check_gradients([&](Graph&, const std::vector<Tensor>& in) { return sum_of(ad::sin(in[0])); }, {m});
    check_gradients([&](Graph&, const std::vector<Tensor>& in) { return sum_of(ad::cos(in[0])); }, {m});
    check_gradients([&](Graph&, const std::vector<Tensor>& in) { return sum_of(ad::tanh(in[0])); }, {m});
    check_gradients([&](Graph&, const std::vector<Tensor>& in) { return sum_of(ad::exp(in[0])); }, {m});
    check_gradients([&](Graph&, const std::vector<Tensor>& in) { return sum_of(ad::log(in[0])); }, {pos});
    check_gradients([&](Graph&, const std::vector<Tensor>& in) { return sum_of(reciprocal(in[0])); }, {pos});
    check_gradients([&](Graph&, const std::vector<Tensor>& in) { return sum_of(transpose(in[0])); }, {m});
    check_gradients([&](Graph&, const std::vector<Tensor>& in) { return sum_of(ad::relu(in[0])); }, {m});
    check_gradients([&](Graph&, const std::vector<Tensor>& in) {
        return sum_of(mul(sum_rows(in[0]), sum_rows(in[0])));
    }, {m});
    check_gradients([&](Graph&, const std::vector<Tensor>& in) {
        return sum_of(mul(sum_cols(in[0]), sum_cols(in[0])));
    }, {m});
    check_gradients([&](Graph&, const std::vector<Tensor>& in) {
        return sum_of(mul(repeat_rows(in[0], 3), repeat_rows(in[0], 3)));
    }, {v});
    check_gradients([&](Graph&, const std::vector<Tensor>& in) {
        return sum_of(mul(repeat_cols(in[0], 4), repeat_cols(in[0], 4)));
    }, {col});
    check_gradients([&](Graph&, const std::vector<Tensor>& in) {
        return reduce_mean(broadcast_scalar(reduce_sum(in[0]), {4, 5}));
    }, {col});
    std::vector<std::size_t> idx = {2, 0, 3};
    check_gradients([&](Graph&, const std::vector<Tensor>& in) {
        return sum_of(mul(select_rows(in[0], idx), select_rows(in[0], idx)));
    }, {m});
    check_gradients([&](Graph&, const std::vector<Tensor>& in) {
        return sum_of(mul(scatter_rows(in[0], idx, 4), scatter_rows(in[0], idx, 4)));
    }, {col});
}

TEST_CASE("loss values and gradients") {
    std::mt19937_64 rng(23);
    Tensor x = Tensor({4, 3}, random_values(rng, 12));

    SUBCASE("mse of identical tensors is zero with zero gradient") {
        Graph g;
        Tensor a = g.leaf(x);
        Tensor loss = mse_loss(a, x.detached());
        CHECK(loss.item() == 0.0);
        auto grads = ad::grad(loss, std::vector<Tensor>{a});
        for (std::size_t i = 0; i < grads[0].numel(); ++i) CHECK(grads[0].at(i) == 0.0);
    }

    SUBCASE("mse matches finite differences") {
        Tensor target = Tensor({4, 3}, random_values(rng, 12));
        check_gradients(
            [&](Graph&, const std::vector<Tensor>& in) { return mse_loss(in[0], target); }, {x});
    }

    SUBCASE("uniform logits give ln(C)") {
        const std::size_t classes = 7;
        Tensor logits = Tensor::full({3, classes}, 0.42);
        Tensor labels = tensor_from({0, 3, 6}, {3});
        Tensor loss = softmax_cross_entropy(logits, labels);
        CHECK(close(loss.item(), std::log(double(classes)), 1e-12, 0));
    }

    SUBCASE("cross-entropy gradient vs finite differences") {
        std::vector<std::size_t> labels = {2, 0, 1, 2};
        check_gradients(
            [&](Graph&, const std::vector<Tensor>& in) {
                return softmax_cross_entropy(in[0], std::span<const std::size_t>(labels));
            },
            {x}, 1e-6, 0.0);
    }

    SUBCASE("out-of-range label rejected") {
        Tensor logits = Tensor::zeros({2, 3});
        CHECK_THROWS_AS(softmax_cross_entropy(logits, tensor_from({1, 3}, {2})), ContractError);
        CHECK_THROWS_AS(softmax_cross_entropy(logits, tensor_from({1, 0.5}, {2})), ContractError);
    }
}

TEST_CASE("grad of linear map returns the coefficients") {
    Graph g;
    Tensor w = g.leaf(tensor_from({0.5, -1.0, 2.0}, {1, 3}));
    Tensor x = tensor_from({1, 2, 3}, {3, 1});
    Tensor y = reduce_sum(matmul(w, x));
    auto grads = ad::grad(y, std::vector<Tensor>{w});
    CHECK(grads[0].at(0) == 1.0);
    CHECK(grads[0].at(1) == 2.0);
    CHECK(grads[0].at(2) == 3.0);
}

TEST_CASE("create_graph=false yields constant gradients") {
    Graph g;
    Tensor x = g.leaf(Tensor::scalar(0.8));
    Tensor dy = ad::grad(ad::sin(x), std::vector<Tensor>{x}, /*create_graph=*/false)[0];
    CHECK_FALSE(dy.attached());
    // Differentiating a constant yields exact zero.
    Tensor d2y = ad::grad(dy, std::vector<Tensor>{x})[0];
    CHECK(d2y.item() == 0.0);
}

TEST_CASE("create_graph=true attaches every returned gradient") {
    Graph g;
    Tensor x = g.leaf(Tensor::scalar(1.5));
    Tensor c = g.leaf(Tensor::scalar(2.0));
    Tensor y = add(x, c);  // dy/dx is the constant 1
    auto grads = ad::grad(reduce_sum(y), std::vector<Tensor>{x}, true);
    CHECK(grads[0].attached());
}

TEST_CASE("gradients accumulate across reuse") {
    Graph g;
    Tensor x = g.leaf(tensor_from({3.0}, {}));
    Tensor y = mul(x, x);
    auto grads = ad::grad(y, std::vector<Tensor>{x});
    CHECK(grads[0].item() == 6.0);
}

TEST_CASE("unreachable inputs get exact zeros") {
    Graph g;
    Tensor x = g.leaf(Tensor::scalar(1.0));
    Tensor z = g.leaf(tensor_from({1, 2, 3}, {3}));
    Tensor constant = tensor_from({4, 5}, {2});
    Tensor y = ad::sin(x);
    auto grads = ad::grad(y, std::vector<Tensor>{z, constant});
    CHECK(grads[0].shape() == std::vector<std::size_t>{3});
    for (std::size_t i = 0; i < 3; ++i) CHECK(grads[0].at(i) == 0.0);
    CHECK(grads[1].shape() == std::vector<std::size_t>{2});
    CHECK(grads[1].at(0) == 0.0);
}

TEST_CASE("linearity of the gradient") {
    std::mt19937_64 rng(31);
    Tensor x0 = Tensor({6}, random_values(rng, 6));
    const double a = 1.7, b = -0.4;

    Graph g;
    Tensor x = g.leaf(x0);
    Tensor f = reduce_sum(ad::sin(x));
    Tensor h = reduce_mean(mul(x, x));
    Tensor combined = add(scale(f, a), scale(h, b));
    Tensor grad_combined = ad::grad(combined, std::vector<Tensor>{x})[0];
    Tensor grad_f = ad::grad(f, std::vector<Tensor>{x})[0];
    Tensor grad_h = ad::grad(h, std::vector<Tensor>{x})[0];
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(std::abs(grad_combined.at(i) - (a * grad_f.at(i) + b * grad_h.at(i))) < 1e-10);
    }
}

TEST_CASE("non-scalar grad output rejected") {
    Graph g;
    Tensor x = g.leaf(tensor_from({1, 2}, {2}));
    CHECK_THROWS_AS(ad::grad(ad::sin(x), std::vector<Tensor>{x}), ContractError);
}

TEST_CASE("non-broadcastable shapes named in error") {
    Tensor a = Tensor::zeros({2, 3});
    Tensor b = Tensor::zeros({4});
    try {
        add(a, b);
        FAIL("expected ShapeError");
    } catch (const ShapeError& e) {
        std::string msg = e.what();
        CHECK(msg.find("[2, 3]") != std::string::npos);
        CHECK(msg.find("[4]") != std::string::npos);
    }
}

TEST_CASE("operands from different graphs rejected") {
    Graph g1, g2;
    Tensor a = g1.leaf(Tensor::scalar(1.0));
    Tensor b = g2.leaf(Tensor::scalar(2.0));
    CHECK_THROWS_AS(add(a, b), ContractError);
    CHECK_THROWS_AS(ad::grad(ad::sin(a), std::vector<Tensor>{b}), ContractError);
}

TEST_CASE("determinism: identical graphs give bit-identical results") {
    auto run = [] {
        std::mt19937_64 rng(41);
        Graph g;
        Tensor a = g.leaf(Tensor({4, 4}, random_values(rng, 16)));
        Tensor b = g.leaf(Tensor({4, 4}, random_values(rng, 16)));
        Tensor out = reduce_mean(ad::tanh(matmul(a, ad::sin(b))));
        auto grads = ad::grad(out, std::vector<Tensor>{a, b});
        return std::tuple{out.item(), grads[0].values(), grads[1].values()};
    };
    auto [v1, ga1, gb1] = run();
    auto [v2, ga2, gb2] = run();
    CHECK(v1 == v2);
    CHECK(ga1 == ga2);
    CHECK(gb1 == gb2);
}

TEST_CASE("replaying recorded nodes reproduces outputs bit-exactly") {
    std::mt19937_64 rng(43);
    Graph g;
    Tensor a = g.leaf(Tensor({3, 3}, random_values(rng, 9)));
    Tensor b = g.leaf(Tensor({3}, random_values(rng, 3)));
    Tensor out = reduce_mean(ad::relu(add(matmul(a, transpose(a)), b)));
    ad::grad(out, std::vector<Tensor>{a, b}, /*create_graph=*/true);
    for (NodeId id = 0; id < g.size(); ++id) {
        Tensor replayed = replay_node(g, id);
        CHECK(replayed.values() == g.node(id).out.values());
    }
}
