#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace r2m {

// Dense row-major array of 64-bit floats with an optional gradient buffer.
// grad is empty until alloc_grad(); when present it always matches data in size.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> data;
    std::vector<double> grad;

    Tensor() = default;
    Tensor(std::vector<int> shape_, std::vector<double> data_);

    static Tensor zeros(std::vector<int> shape);
    static Tensor full(std::vector<int> shape, double value);
    // 1xN row vector.
    static Tensor row(std::vector<double> values);

    std::size_t numel() const { return data.size(); }
    int rank() const { return static_cast<int>(shape.size()); }
    // Rows/cols of a rank-2 tensor (rank-1 is treated as a single row).
    int rows() const;
    int cols() const;

    double& at(int r, int c);
    double at(int r, int c) const;

    bool has_grad() const { return !grad.empty(); }
    void alloc_grad();
    void zero_grad();

    bool all_finite() const;
};

std::size_t shape_numel(const std::vector<int>& shape);
std::string shape_str(const std::vector<int>& shape);

} // namespace r2m
