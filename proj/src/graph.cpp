#include "metagrad/graph.hpp"

namespace metagrad::ad {

const char* op_name(OpKind op) {
    switch (op) {
        case OpKind::Constant: return "constant";
        case OpKind::Add: return "add";
        case OpKind::Sub: return "sub";
        case OpKind::Mul: return "mul";
        case OpKind::Neg: return "neg";
        case OpKind::Scale: return "scale";
        case OpKind::Sin: return "sin";
        case OpKind::Cos: return "cos";
        case OpKind::Tanh: return "tanh";
        case OpKind::Relu: return "relu";
        case OpKind::Exp: return "exp";
        case OpKind::Log: return "log";
        case OpKind::Recip: return "recip";
        case OpKind::MatMul: return "matmul";
        case OpKind::Transpose: return "transpose";
        case OpKind::ReduceSum: return "reduce_sum";
        case OpKind::ReduceMean: return "reduce_mean";
        case OpKind::BroadcastScalar: return "broadcast_scalar";
        case OpKind::SumRows: return "sum_rows";
        case OpKind::RepeatRows: return "repeat_rows";
        case OpKind::SumCols: return "sum_cols";
        case OpKind::RepeatCols: return "repeat_cols";
        case OpKind::SelectRows: return "select_rows";
        case OpKind::ScatterRows: return "scatter_rows";
    }
    return "?";
}

Tensor Graph::emit(OpKind op, std::vector<NodeId> inputs, std::vector<std::size_t> shape,
                   std::vector<double> values, double scalar, std::vector<std::size_t> extents,
                   std::vector<std::size_t> indices) {
    Node n;
    n.op = op;
    n.inputs = std::move(inputs);
    n.scalar = scalar;
    n.extents = std::move(extents);
    n.indices = std::move(indices);
    n.out = Tensor(std::move(shape), std::move(values));
    n.out.graph_ = this;
    n.out.node_ = static_cast<NodeId>(nodes_.size());
    nodes_.push_back(std::move(n));
    return nodes_.back().out;
}

Tensor Graph::leaf(const Tensor& constant) {
    Node n;
    n.op = OpKind::Constant;
    n.out = Tensor(constant.shape(), constant.data());
    n.out.graph_ = this;
    n.out.node_ = static_cast<NodeId>(nodes_.size());
    nodes_.push_back(std::move(n));
    return nodes_.back().out;
}

}  // namespace metagrad::ad
