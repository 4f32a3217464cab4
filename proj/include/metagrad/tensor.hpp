#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "metagrad/error.hpp"

namespace metagrad::ad {

class Graph;

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = 0xffffffffu;

std::string format_shape(std::span<const std::size_t> shape);

// Dense row-major tensor of 64-bit floats. Data is immutable and shared, so
// copies are cheap. A tensor is either a constant (graph() == nullptr) or a
// handle to a node of a Graph; constants have zero gradient everywhere.
class Tensor {
public:
    Tensor() = default;
    Tensor(std::vector<std::size_t> shape, std::vector<double> values);
    Tensor(std::vector<std::size_t> shape, std::shared_ptr<const std::vector<double>> values);

    static Tensor scalar(double v) { return Tensor({}, std::vector<double>{v}); }
    static Tensor zeros(std::vector<std::size_t> shape);
    static Tensor full(std::vector<std::size_t> shape, double v);

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t numel() const { return data_ ? data_->size() : 0; }
    std::size_t extent(std::size_t dim) const { return shape_[dim]; }

    const std::vector<double>& values() const { return *data_; }
    std::shared_ptr<const std::vector<double>> data() const { return data_; }

    double at(std::size_t i) const { return (*data_)[i]; }
    double at(std::size_t i, std::size_t j) const { return (*data_)[i * shape_[1] + j]; }

    // Value of a shape-[] tensor.
    double item() const;

    bool attached() const { return graph_ != nullptr; }
    Graph* graph() const { return graph_; }
    NodeId node() const { return node_; }

    // Same values, no graph provenance.
    Tensor detached() const { return Tensor(shape_, data_); }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

private:
    friend class Graph;

    std::vector<std::size_t> shape_;
    std::shared_ptr<const std::vector<double>> data_;
    Graph* graph_ = nullptr;
    NodeId node_ = kNoNode;
};

// Constructs a constant tensor; throws ShapeError when product(shape) does not
// equal values.size().
Tensor tensor_from(std::vector<double> values, std::vector<std::size_t> shape);

std::size_t shape_numel(std::span<const std::size_t> shape);

}  // namespace metagrad::ad
