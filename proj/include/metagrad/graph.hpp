#pragma once

#include <cstdint>
#include <vector>

#include "metagrad/tensor.hpp"

namespace metagrad::ad {

enum class OpKind : std::uint8_t {
    Constant,
    Add,
    Sub,
    Mul,
    Neg,
    Scale,
    Sin,
    Cos,
    Tanh,
    Relu,
    Exp,
    Log,
    Recip,
    MatMul,
    Transpose,
    ReduceSum,
    ReduceMean,
    BroadcastScalar,
    SumRows,
    RepeatRows,
    SumCols,
    RepeatCols,
    SelectRows,
    ScatterRows,
};

const char* op_name(OpKind op);

// One recorded operation. Entries are immutable once appended; inputs always
// reference earlier nodes, so node ids are a topological order.
struct Node {
    OpKind op = OpKind::Constant;
    std::vector<NodeId> inputs;
    Tensor out;                         // recorded output (attached to the owning graph)
    double scalar = 0.0;                // Scale factor / BroadcastScalar unused
    std::vector<std::size_t> extents;   // RepeatRows/RepeatCols/BroadcastScalar target
    std::vector<std::size_t> indices;   // SelectRows/ScatterRows class indices
};

// Append-only tape of operations. A Graph and its tensors are confined to one
// thread; create one per outer iteration and discard it afterwards.
class Graph {
public:
    Graph() = default;
    Graph(const Graph&) = delete;
    Graph& operator=(const Graph&) = delete;

    // Records a node whose output has the given shape/values and returns a
    // tensor attached to it.
    Tensor emit(OpKind op, std::vector<NodeId> inputs, std::vector<std::size_t> shape,
                std::vector<double> values, double scalar = 0.0,
                std::vector<std::size_t> extents = {}, std::vector<std::size_t> indices = {});

    // Inserts a constant tensor as a leaf node and returns the attached handle.
    Tensor leaf(const Tensor& constant);

    const Node& node(NodeId id) const { return nodes_[id]; }
    std::size_t size() const { return nodes_.size(); }

    // Tensor handle for an already-recorded node.
    Tensor tensor_at(NodeId id) const { return nodes_[id].out; }

private:
    std::vector<Node> nodes_;
};

// Recomputes the forward value of one node from its recorded inputs. Debugging
// hook backing the record/replay identity tests.
Tensor replay_node(const Graph& g, NodeId id);

}  // namespace metagrad::ad
