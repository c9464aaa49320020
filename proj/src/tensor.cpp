#include "r2m/tensor.hpp"

#include <cmath>
#include <sstream>

#include "r2m/errors.hpp"

namespace r2m {

std::size_t shape_numel(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int e : shape) n *= static_cast<std::size_t>(e);
    return n;
}

std::string shape_str(const std::vector<int>& shape) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ",";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

Tensor::Tensor(std::vector<int> shape_, std::vector<double> data_)
    : shape(std::move(shape_)), data(std::move(data_)) {
    for (int e : shape) {
        if (e <= 0) throw DimensionError("tensor: non-positive extent in " + shape_str(shape));
    }
    if (data.size() != shape_numel(shape)) {
        throw DimensionError("tensor: data length " + std::to_string(data.size()) +
                             " does not match shape " + shape_str(shape));
    }
}

Tensor Tensor::zeros(std::vector<int> shape) {
    std::size_t n = shape_numel(shape);
    return Tensor(std::move(shape), std::vector<double>(n, 0.0));
}

Tensor Tensor::full(std::vector<int> shape, double value) {
    std::size_t n = shape_numel(shape);
    return Tensor(std::move(shape), std::vector<double>(n, value));
}

Tensor Tensor::row(std::vector<double> values) {
    int n = static_cast<int>(values.size());
    return Tensor({1, n}, std::move(values));
}

int Tensor::rows() const {
    if (shape.empty()) throw DimensionError("tensor: rows() on empty shape");
    return shape.size() == 1 ? 1 : shape[0];
}

int Tensor::cols() const {
    if (shape.empty()) throw DimensionError("tensor: cols() on empty shape");
    return shape.size() == 1 ? shape[0] : shape[1];
}

double& Tensor::at(int r, int c) {
    return data[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols()) +
                static_cast<std::size_t>(c)];
}

double Tensor::at(int r, int c) const {
    return data[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols()) +
                static_cast<std::size_t>(c)];
}

void Tensor::alloc_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
}

void Tensor::zero_grad() {
    grad.assign(data.size(), 0.0);
}

bool Tensor::all_finite() const {
    for (double v : data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

} // namespace r2m
