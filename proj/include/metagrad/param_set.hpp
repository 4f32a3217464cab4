#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "metagrad/graph.hpp"
#include "metagrad/tensor.hpp"

namespace metagrad::nn {

// Ordered map from hierarchical parameter path ("layers.0.weight") to tensor.
// Iteration order is insertion order; paths are unique.
class ParamSet {
public:
    using Entry = std::pair<std::string, ad::Tensor>;

    void insert(std::string path, ad::Tensor value);
    bool contains(std::string_view path) const { return find(path) != nullptr; }
    const ad::Tensor* find(std::string_view path) const;

    // Throws ContractError("missing parameter <path>") when absent.
    const ad::Tensor& at(std::string_view path) const;

    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    const std::vector<Entry>& entries() const { return entries_; }
    std::vector<std::string> paths() const;
    std::vector<ad::Tensor> tensors() const;

    // Same paths, tensors inserted as leaves of g (differentiable starting point).
    ParamSet attached_to(ad::Graph& g) const;
    // Same paths, constant tensors.
    ParamSet detached() const;

private:
    std::vector<Entry> entries_;
};

// One gradient-descent update: out[p] = params[p] - lr * grads[p]. Path sets
// must coincide (error lists the symmetric difference). With create_graph the
// subtraction stays differentiable through the gradients; without it the
// gradients are detached first (first-order approximation).
ParamSet sgd_step(const ParamSet& params, const ParamSet& grads, double lr, bool create_graph);

}  // namespace metagrad::nn
