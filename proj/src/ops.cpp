#include "metagrad/ops.hpp"

#include <cmath>
#include <optional>
#include <sstream>

#include "metagrad/kernels.hpp"

namespace metagrad::ad {

namespace {

// How a binary elementwise op pairs its operand shapes.
enum class Pairing {
    Same,      // identical shapes
    VecRight,  // [m,n] (op) [n]
    VecLeft,   // [n] (op) [m,n]
};

Pairing classify_pair(const Tensor& a, const Tensor& b, const char* what) {
    if (a.shape() == b.shape()) return Pairing::Same;
    if (a.rank() == 2 && b.rank() == 1 && a.extent(1) == b.extent(0)) return Pairing::VecRight;
    if (a.rank() == 1 && b.rank() == 2 && b.extent(1) == a.extent(0)) return Pairing::VecLeft;
    std::ostringstream oss;
    oss << what << ": shapes " << format_shape(a.shape()) << " and " << format_shape(b.shape())
        << " are neither equal nor bias-broadcastable";
    throw ShapeError(oss.str());
}

kernels::Binary to_kernel(OpKind op) {
    switch (op) {
        case OpKind::Add: return kernels::Binary::Add;
        case OpKind::Sub: return kernels::Binary::Sub;
        default: return kernels::Binary::Mul;
    }
}

kernels::Unary to_kernel_unary(OpKind op) {
    switch (op) {
        case OpKind::Neg: return kernels::Unary::Neg;
        case OpKind::Sin: return kernels::Unary::Sin;
        case OpKind::Cos: return kernels::Unary::Cos;
        case OpKind::Tanh: return kernels::Unary::Tanh;
        case OpKind::Relu: return kernels::Unary::Relu;
        case OpKind::Exp: return kernels::Unary::Exp;
        case OpKind::Log: return kernels::Unary::Log;
        default: return kernels::Unary::Recip;
    }
}

struct Payload {
    std::vector<std::size_t> shape;
    std::vector<double> values;
};

// Shared forward evaluation; used by the recording ops and by replay_node.
Payload forward_op(OpKind op, const std::vector<Tensor>& ins, double scalar,
                   const std::vector<std::size_t>& extents,
                   const std::vector<std::size_t>& indices) {
    switch (op) {
        case OpKind::Constant:
            return {ins[0].shape(), ins[0].values()};
        case OpKind::Add:
        case OpKind::Sub:
        case OpKind::Mul: {
            const Tensor& a = ins[0];
            const Tensor& b = ins[1];
            if (a.shape() == b.shape()) {
                Payload p{a.shape(), std::vector<double>(a.numel())};
                kernels::binary_map(to_kernel(op), a.values().data(), b.values().data(),
                                    p.values.data(), a.numel());
                return p;
            }
            const bool vec_left = a.rank() == 1;
            const Tensor& mat = vec_left ? b : a;
            const Tensor& vec = vec_left ? a : b;
            Payload p{mat.shape(), std::vector<double>(mat.numel())};
            kernels::binary_rowvec(to_kernel(op), mat.values().data(), vec.values().data(),
                                   p.values.data(), mat.extent(0), mat.extent(1), vec_left);
            return p;
        }
        case OpKind::Neg:
        case OpKind::Sin:
        case OpKind::Cos:
        case OpKind::Tanh:
        case OpKind::Relu:
        case OpKind::Exp:
        case OpKind::Log:
        case OpKind::Recip: {
            Payload p{ins[0].shape(), std::vector<double>(ins[0].numel())};
            kernels::unary_map(to_kernel_unary(op), ins[0].values().data(), p.values.data(),
                               ins[0].numel());
            return p;
        }
        case OpKind::Scale: {
            Payload p{ins[0].shape(), std::vector<double>(ins[0].numel())};
            kernels::scale(ins[0].values().data(), p.values.data(), ins[0].numel(), scalar);
            return p;
        }
        case OpKind::MatMul: {
            const std::size_t m = ins[0].extent(0), k = ins[0].extent(1), n = ins[1].extent(1);
            Payload p{{m, n}, std::vector<double>(m * n)};
            kernels::matmul(ins[0].values().data(), ins[1].values().data(), p.values.data(), m, k,
                            n);
            return p;
        }
        case OpKind::Transpose: {
            const std::size_t m = ins[0].extent(0), n = ins[0].extent(1);
            Payload p{{n, m}, std::vector<double>(m * n)};
            kernels::transpose(ins[0].values().data(), p.values.data(), m, n);
            return p;
        }
        case OpKind::ReduceSum:
            return {{}, {kernels::reduce_sum(ins[0].values().data(), ins[0].numel())}};
        case OpKind::ReduceMean: {
            const double total = kernels::reduce_sum(ins[0].values().data(), ins[0].numel());
            return {{}, {total / static_cast<double>(ins[0].numel())}};
        }
        case OpKind::BroadcastScalar: {
            Payload p{extents, std::vector<double>(shape_numel(extents), ins[0].at(0))};
            return p;
        }
        case OpKind::SumRows: {
            const std::size_t m = ins[0].extent(0), n = ins[0].extent(1);
            Payload p{{n}, std::vector<double>(n)};
            kernels::sum_rows(ins[0].values().data(), p.values.data(), m, n);
            return p;
        }
        case OpKind::SumCols: {
            const std::size_t m = ins[0].extent(0), n = ins[0].extent(1);
            Payload p{{m}, std::vector<double>(m)};
            kernels::sum_cols(ins[0].values().data(), p.values.data(), m, n);
            return p;
        }
        case OpKind::RepeatRows: {
            const std::size_t m = extents[0], n = ins[0].extent(0);
            Payload p{{m, n}, std::vector<double>(m * n)};
            kernels::repeat_rows(ins[0].values().data(), p.values.data(), m, n);
            return p;
        }
        case OpKind::RepeatCols: {
            const std::size_t m = ins[0].extent(0), n = extents[0];
            Payload p{{m, n}, std::vector<double>(m * n)};
            kernels::repeat_cols(ins[0].values().data(), p.values.data(), m, n);
            return p;
        }
        case OpKind::SelectRows: {
            const std::size_t m = ins[0].extent(0), n = ins[0].extent(1);
            Payload p{{m}, std::vector<double>(m)};
            for (std::size_t i = 0; i < m; ++i) p.values[i] = ins[0].at(i * n + indices[i]);
            return p;
        }
        case OpKind::ScatterRows: {
            const std::size_t m = ins[0].extent(0), n = extents[0];
            Payload p{{m, n}, std::vector<double>(m * n, 0.0)};
            for (std::size_t i = 0; i < m; ++i) p.values[i * n + indices[i]] = ins[0].at(i);
            return p;
        }
    }
    throw ContractError("forward_op: unknown op");
}

// Records the op when any operand is attached; otherwise returns a constant.
Tensor finish(OpKind op, std::initializer_list<Tensor> operands, const char* what,
              double scalar = 0.0, std::vector<std::size_t> extents = {},
              std::vector<std::size_t> indices = {}) {
    std::vector<Tensor> ins(operands);
    Graph* g = nullptr;
    for (const Tensor& t : ins) {
        if (!t.attached()) continue;
        if (g == nullptr) {
            g = t.graph();
        } else if (g != t.graph()) {
            throw ContractError(std::string(what) + ": operands belong to different graphs");
        }
    }
    Payload p = forward_op(op, ins, scalar, extents, indices);
    if (g == nullptr) return Tensor(std::move(p.shape), std::move(p.values));
    std::vector<NodeId> ids;
    ids.reserve(ins.size());
    for (const Tensor& t : ins) {
        ids.push_back(t.attached() ? t.node() : g->leaf(t).node());
    }
    return g->emit(op, std::move(ids), std::move(p.shape), std::move(p.values), scalar,
                   std::move(extents), std::move(indices));
}

void require_rank2(const Tensor& t, const char* what) {
    if (t.rank() != 2) {
        throw ShapeError(std::string(what) + ": expected a rank-2 tensor, got shape " +
                         format_shape(t.shape()));
    }
}

void require_rank1(const Tensor& t, const char* what) {
    if (t.rank() != 1) {
        throw ShapeError(std::string(what) + ": expected a rank-1 tensor, got shape " +
                         format_shape(t.shape()));
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Public ops
// ---------------------------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) {
    classify_pair(a, b, "add");
    return finish(OpKind::Add, {a, b}, "add");
}

Tensor sub(const Tensor& a, const Tensor& b) {
    classify_pair(a, b, "sub");
    return finish(OpKind::Sub, {a, b}, "sub");
}

Tensor mul(const Tensor& a, const Tensor& b) {
    classify_pair(a, b, "mul");
    return finish(OpKind::Mul, {a, b}, "mul");
}

Tensor neg(const Tensor& a) { return finish(OpKind::Neg, {a}, "neg"); }
Tensor scale(const Tensor& a, double c) { return finish(OpKind::Scale, {a}, "scale", c); }
Tensor sin(const Tensor& a) { return finish(OpKind::Sin, {a}, "sin"); }
Tensor cos(const Tensor& a) { return finish(OpKind::Cos, {a}, "cos"); }
Tensor tanh(const Tensor& a) { return finish(OpKind::Tanh, {a}, "tanh"); }
Tensor relu(const Tensor& a) { return finish(OpKind::Relu, {a}, "relu"); }
Tensor exp(const Tensor& a) { return finish(OpKind::Exp, {a}, "exp"); }
Tensor log(const Tensor& a) { return finish(OpKind::Log, {a}, "log"); }
Tensor reciprocal(const Tensor& a) { return finish(OpKind::Recip, {a}, "reciprocal"); }

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_rank2(a, "matmul lhs");
    require_rank2(b, "matmul rhs");
    if (a.extent(1) != b.extent(0)) {
        std::ostringstream oss;
        oss << "matmul: inner extents differ, " << format_shape(a.shape()) << " vs "
            << format_shape(b.shape());
        throw ShapeError(oss.str());
    }
    return finish(OpKind::MatMul, {a, b}, "matmul");
}

Tensor transpose(const Tensor& a) {
    require_rank2(a, "transpose");
    return finish(OpKind::Transpose, {a}, "transpose");
}

Tensor reduce_sum(const Tensor& a) { return finish(OpKind::ReduceSum, {a}, "reduce_sum"); }
Tensor reduce_mean(const Tensor& a) { return finish(OpKind::ReduceMean, {a}, "reduce_mean"); }

Tensor broadcast_scalar(const Tensor& s, std::vector<std::size_t> shape) {
    if (!s.shape().empty()) {
        throw ShapeError("broadcast_scalar: expected a scalar, got shape " +
                         format_shape(s.shape()));
    }
    return finish(OpKind::BroadcastScalar, {s}, "broadcast_scalar", 0.0, std::move(shape));
}

Tensor sum_rows(const Tensor& a) {
    require_rank2(a, "sum_rows");
    return finish(OpKind::SumRows, {a}, "sum_rows");
}

Tensor repeat_rows(const Tensor& v, std::size_t m) {
    require_rank1(v, "repeat_rows");
    return finish(OpKind::RepeatRows, {v}, "repeat_rows", 0.0, {m});
}

Tensor sum_cols(const Tensor& a) {
    require_rank2(a, "sum_cols");
    return finish(OpKind::SumCols, {a}, "sum_cols");
}

Tensor repeat_cols(const Tensor& v, std::size_t n) {
    require_rank1(v, "repeat_cols");
    return finish(OpKind::RepeatCols, {v}, "repeat_cols", 0.0, {n});
}

Tensor select_rows(const Tensor& a, std::vector<std::size_t> idx) {
    require_rank2(a, "select_rows");
    if (idx.size() != a.extent(0)) {
        throw ShapeError("select_rows: index count does not match row count");
    }
    for (std::size_t i : idx) {
        if (i >= a.extent(1)) {
            std::ostringstream oss;
            oss << "select_rows: index " << i << " out of range [0, " << a.extent(1) << ")";
            throw ContractError(oss.str());
        }
    }
    return finish(OpKind::SelectRows, {a}, "select_rows", 0.0, {}, std::move(idx));
}

Tensor scatter_rows(const Tensor& v, std::vector<std::size_t> idx, std::size_t columns) {
    require_rank1(v, "scatter_rows");
    if (idx.size() != v.extent(0)) {
        throw ShapeError("scatter_rows: index count does not match element count");
    }
    for (std::size_t i : idx) {
        if (i >= columns) {
            std::ostringstream oss;
            oss << "scatter_rows: index " << i << " out of range [0, " << columns << ")";
            throw ContractError(oss.str());
        }
    }
    return finish(OpKind::ScatterRows, {v}, "scatter_rows", 0.0, {columns}, std::move(idx));
}

// ---------------------------------------------------------------------------
// Losses
// ---------------------------------------------------------------------------

Tensor mse_loss(const Tensor& predictions, const Tensor& targets) {
    if (!predictions.same_shape(targets)) {
        std::ostringstream oss;
        oss << "mse_loss: shape mismatch " << format_shape(predictions.shape()) << " vs "
            << format_shape(targets.shape());
        throw ShapeError(oss.str());
    }
    Tensor d = sub(predictions, targets);
    return reduce_mean(mul(d, d));
}

Tensor softmax_cross_entropy(const Tensor& logits, std::span<const std::size_t> labels) {
    require_rank2(logits, "softmax_cross_entropy logits");
    const std::size_t batch = logits.extent(0), classes = logits.extent(1);
    if (labels.size() != batch) {
        throw ShapeError("softmax_cross_entropy: label count does not match batch size");
    }
    std::vector<std::size_t> idx(labels.begin(), labels.end());
    for (std::size_t i : idx) {
        if (i >= classes) {
            std::ostringstream oss;
            oss << "softmax_cross_entropy: target index " << i << " out of range [0, " << classes
                << ")";
            throw ContractError(oss.str());
        }
    }

    // Row maxima are detached shift constants: the shift cancels exactly in
    // log-sum-exp, so derivatives of every order are unaffected.
    std::vector<double> row_max(batch);
    for (std::size_t i = 0; i < batch; ++i) {
        double m = logits.at(i * classes);
        for (std::size_t j = 1; j < classes; ++j) m = std::max(m, logits.at(i * classes + j));
        row_max[i] = m;
    }
    std::vector<double> shift_mat(batch * classes);
    for (std::size_t i = 0; i < batch; ++i)
        for (std::size_t j = 0; j < classes; ++j) shift_mat[i * classes + j] = row_max[i];

    Tensor shifted = sub(logits, Tensor({batch, classes}, std::move(shift_mat)));
    Tensor sum_exp = sum_cols(exp(shifted));                       // [batch]
    Tensor lse = add(log(sum_exp), Tensor({batch}, std::move(row_max)));
    Tensor picked = select_rows(logits, std::move(idx));           // [batch]
    return reduce_mean(sub(lse, picked));
}

Tensor softmax_cross_entropy(const Tensor& logits, const Tensor& labels) {
    require_rank1(labels, "softmax_cross_entropy labels");
    std::vector<std::size_t> idx(labels.numel());
    for (std::size_t i = 0; i < labels.numel(); ++i) {
        const double v = labels.at(i);
        if (v < 0.0 || v != std::floor(v)) {
            std::ostringstream oss;
            oss << "softmax_cross_entropy: label " << v << " is not a non-negative integer";
            throw ContractError(oss.str());
        }
        idx[i] = static_cast<std::size_t>(v);
    }
    return softmax_cross_entropy(logits, std::span<const std::size_t>(idx));
}

// ---------------------------------------------------------------------------
// Reverse-mode engine
// ---------------------------------------------------------------------------

namespace {

// Sums a same-shape upstream gradient down to a bias-broadcast operand.
Tensor unbroadcast_to(const Tensor& g, const Tensor& operand) {
    if (g.same_shape(operand)) return g;
    return sum_rows(g);
}

// Vector-Jacobian products of one node, expressed through the public ops so
// the results are themselves differentiable. `ins`, `out` and `g` arrive
// detached when create_graph is false.
std::vector<Tensor> backward_rule(const Node& node, const std::vector<Tensor>& ins,
                                  const Tensor& out, const Tensor& g) {
    switch (node.op) {
        case OpKind::Constant:
            return {};
        case OpKind::Add:
            return {unbroadcast_to(g, ins[0]), unbroadcast_to(g, ins[1])};
        case OpKind::Sub:
            return {unbroadcast_to(g, ins[0]), unbroadcast_to(neg(g), ins[1])};
        case OpKind::Mul:
            return {unbroadcast_to(mul(g, ins[1]), ins[0]),
                    unbroadcast_to(mul(g, ins[0]), ins[1])};
        case OpKind::Neg:
            return {neg(g)};
        case OpKind::Scale:
            return {scale(g, node.scalar)};
        case OpKind::Sin:
            return {mul(g, cos(ins[0]))};
        case OpKind::Cos:
            return {neg(mul(g, sin(ins[0])))};
        case OpKind::Tanh:
            return {mul(g, sub(Tensor::full(out.shape(), 1.0), mul(out, out)))};
        case OpKind::Relu: {
            // Subgradient at 0 is 0. The mask is piecewise constant, so it is
            // a detached constant; its own derivative vanishes.
            std::vector<double> mask(ins[0].numel());
            for (std::size_t i = 0; i < mask.size(); ++i)
                mask[i] = ins[0].at(i) > 0.0 ? 1.0 : 0.0;
            return {mul(g, Tensor(ins[0].shape(), std::move(mask)))};
        }
        case OpKind::Exp:
            return {mul(g, out)};
        case OpKind::Log:
            return {mul(g, reciprocal(ins[0]))};
        case OpKind::Recip:
            return {neg(mul(g, mul(out, out)))};
        case OpKind::MatMul:
            return {matmul(g, transpose(ins[1])), matmul(transpose(ins[0]), g)};
        case OpKind::Transpose:
            return {transpose(g)};
        case OpKind::ReduceSum:
            return {broadcast_scalar(g, ins[0].shape())};
        case OpKind::ReduceMean:
            return {broadcast_scalar(scale(g, 1.0 / static_cast<double>(ins[0].numel())),
                                     ins[0].shape())};
        case OpKind::BroadcastScalar:
            return {reduce_sum(g)};
        case OpKind::SumRows:
            return {repeat_rows(g, ins[0].extent(0))};
        case OpKind::RepeatRows:
            return {sum_rows(g)};
        case OpKind::SumCols:
            return {repeat_cols(g, ins[0].extent(1))};
        case OpKind::RepeatCols:
            return {sum_cols(g)};
        case OpKind::SelectRows:
            return {scatter_rows(g, node.indices, ins[0].extent(1))};
        case OpKind::ScatterRows:
            return {select_rows(g, node.indices)};
    }
    throw ContractError("backward_rule: unknown op");
}

}  // namespace

std::vector<Tensor> grad(const GradRequest& request) {
    const Tensor& output = request.output;
    if (!output.shape().empty()) {
        throw ContractError("grad: output must be scalar, got shape " +
                            format_shape(output.shape()));
    }

    auto zeros_like = [](const Tensor& t) { return Tensor::zeros(t.shape()); };

    if (!output.attached()) {
        // Constant output: nothing is reachable.
        std::vector<Tensor> result;
        result.reserve(request.inputs.size());
        for (const Tensor& in : request.inputs) result.push_back(zeros_like(in));
        return result;
    }

    Graph& g = *output.graph();
    for (std::size_t i = 0; i < request.inputs.size(); ++i) {
        const Tensor& in = request.inputs[i];
        if (in.attached() && in.graph() != &g) {
            std::ostringstream oss;
            oss << "grad: input " << i << " belongs to a different graph";
            throw ContractError(oss.str());
        }
    }

    const bool create_graph = request.create_graph;
    const NodeId root = output.node();
    std::vector<std::optional<Tensor>> acc(static_cast<std::size_t>(root) + 1);
    acc[root] = Tensor::scalar(1.0);

    for (NodeId id = root;; --id) {
        if (acc[id].has_value()) {
            // Copy the record: backward rules may append nodes and reallocate
            // the graph's storage while this one is being processed.
            const Node node = g.node(id);
            if (node.op != OpKind::Constant) {
                std::vector<Tensor> ins;
                ins.reserve(node.inputs.size());
                for (NodeId in_id : node.inputs) {
                    Tensor t = g.tensor_at(in_id);
                    ins.push_back(create_graph ? t : t.detached());
                }
                Tensor out_t = create_graph ? node.out : node.out.detached();
                Tensor grad_in = create_graph ? *acc[id] : acc[id]->detached();
                std::vector<Tensor> vjps = backward_rule(node, ins, out_t, grad_in);
                for (std::size_t k = 0; k < vjps.size(); ++k) {
                    const NodeId in_id = node.inputs[k];
                    if (acc[in_id].has_value()) {
                        acc[in_id] = add(*acc[in_id], vjps[k]);
                    } else {
                        acc[in_id] = std::move(vjps[k]);
                    }
                }
            }
        }
        if (id == 0) break;
    }

    std::vector<Tensor> result;
    result.reserve(request.inputs.size());
    for (const Tensor& in : request.inputs) {
        Tensor value = zeros_like(in);
        if (in.attached() && in.node() <= root && acc[in.node()].has_value()) {
            value = *acc[in.node()];
        }
        if (create_graph && !value.attached()) value = g.leaf(value);
        if (!create_graph && value.attached()) value = value.detached();
        result.push_back(std::move(value));
    }
    return result;
}

std::vector<Tensor> grad(const Tensor& output, std::span<const Tensor> inputs,
                         bool create_graph) {
    GradRequest req;
    req.output = output;
    req.inputs.assign(inputs.begin(), inputs.end());
    req.create_graph = create_graph;
    return grad(req);
}

Tensor replay_node(const Graph& g, NodeId id) {
    const Node& node = g.node(id);
    std::vector<Tensor> ins;
    ins.reserve(std::max<std::size_t>(node.inputs.size(), 1));
    if (node.op == OpKind::Constant) {
        ins.push_back(node.out.detached());
    } else {
        for (NodeId in_id : node.inputs) ins.push_back(g.tensor_at(in_id).detached());
    }
    Payload p = forward_op(node.op, ins, node.scalar, node.extents, node.indices);
    return Tensor(std::move(p.shape), std::move(p.values));
}

}  // namespace metagrad::ad
