#pragma once

#include <span>
#include <vector>

#include "metagrad/graph.hpp"
#include "metagrad/tensor.hpp"

namespace metagrad::ad {

// Differentiable tensor operations. Each op records a node when at least one
// operand is attached to a graph; all-constant operands yield a constant.
// Binary elementwise ops support equal shapes plus the bias-style trailing
// broadcast [m,n] (op) [n]; anything else is a ShapeError naming both shapes.

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor neg(const Tensor& a);
Tensor scale(const Tensor& a, double c);
Tensor sin(const Tensor& a);
Tensor cos(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor reciprocal(const Tensor& a);

Tensor matmul(const Tensor& a, const Tensor& b);   // [m,k]·[k,n] -> [m,n]
Tensor transpose(const Tensor& a);                 // [m,n] -> [n,m]

Tensor reduce_sum(const Tensor& a);                // -> []
Tensor reduce_mean(const Tensor& a);               // -> []
Tensor broadcast_scalar(const Tensor& s, std::vector<std::size_t> shape);

Tensor sum_rows(const Tensor& a);                          // [m,n] -> [n]
Tensor repeat_rows(const Tensor& v, std::size_t m);        // [n] -> [m,n]
Tensor sum_cols(const Tensor& a);                          // [m,n] -> [m]
Tensor repeat_cols(const Tensor& v, std::size_t n);        // [m] -> [m,n]

// y[i] = a[i, idx[i]]; idx[i] must be < columns(a).
Tensor select_rows(const Tensor& a, std::vector<std::size_t> idx);
// y[i, idx[i]] = v[i], zero elsewhere.
Tensor scatter_rows(const Tensor& v, std::vector<std::size_t> idx, std::size_t columns);

// Mean of squared differences; shapes must match.
Tensor mse_loss(const Tensor& predictions, const Tensor& targets);

// Mean over the batch of -log softmax(logits)[label], computed in the
// log-sum-exp-stabilized form. logits is [batch, classes]; labels is a [batch]
// tensor holding integer class indices (validated).
Tensor softmax_cross_entropy(const Tensor& logits, const Tensor& labels);
Tensor softmax_cross_entropy(const Tensor& logits, std::span<const std::size_t> labels);

struct GradRequest {
    Tensor output;                 // must be scalar (shape [])
    std::vector<Tensor> inputs;
    bool create_graph = false;     // record the backward pass for further differentiation
};

// Reverse-mode gradients of output w.r.t. each input, in input order and with
// matching shapes. Inputs with no path to the output get exact zeros. With
// create_graph=true every returned gradient is attached to the graph and
// differentiable; with false the results are constants.
std::vector<Tensor> grad(const GradRequest& request);
std::vector<Tensor> grad(const Tensor& output, std::span<const Tensor> inputs,
                         bool create_graph = false);

}  // namespace metagrad::ad
