#include "metagrad/tensor.hpp"

#include <sstream>

namespace metagrad::ad {

std::string format_shape(std::span<const std::size_t> shape) {
    std::ostringstream oss;
    oss << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) oss << ", ";
        oss << shape[i];
    }
    oss << "]";
    return oss.str();
}

std::size_t shape_numel(std::span<const std::size_t> shape) {
    std::size_t n = 1;
    for (std::size_t e : shape) n *= e;
    return n;
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)),
      data_(std::make_shared<const std::vector<double>>(std::move(values))) {
    if (shape_numel(shape_) != data_->size()) {
        std::ostringstream oss;
        oss << "tensor shape " << format_shape(shape_) << " implies " << shape_numel(shape_)
            << " values, got " << data_->size();
        throw ShapeError(oss.str());
    }
}

Tensor::Tensor(std::vector<std::size_t> shape, std::shared_ptr<const std::vector<double>> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
    if (shape_numel(shape_) != data_->size()) {
        std::ostringstream oss;
        oss << "tensor shape " << format_shape(shape_) << " implies " << shape_numel(shape_)
            << " values, got " << data_->size();
        throw ShapeError(oss.str());
    }
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
    std::size_t n = shape_numel(shape);
    return Tensor(std::move(shape), std::vector<double>(n, 0.0));
}

Tensor Tensor::full(std::vector<std::size_t> shape, double v) {
    std::size_t n = shape_numel(shape);
    return Tensor(std::move(shape), std::vector<double>(n, v));
}

double Tensor::item() const {
    if (!shape_.empty()) {
        throw ContractError("item() requires a scalar tensor, got shape " + format_shape(shape_));
    }
    return (*data_)[0];
}

Tensor tensor_from(std::vector<double> values, std::vector<std::size_t> shape) {
    return Tensor(std::move(shape), std::move(values));
}

}  // namespace metagrad::ad
