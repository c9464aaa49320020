#pragma once

#include <cstdint>
#include <deque>
#include <vector>

#include "r2m/tensor.hpp"

namespace r2m {

// A named, trainable tensor. grad is allocated on construction and
// accumulated into by Graph::backward for every graph the parameter joins.
struct Parameter {
    std::string name;
    Tensor value;

    Parameter() = default;
    Parameter(std::string name_, Tensor value_)
        : name(std::move(name_)), value(std::move(value_)) {
        value.alloc_grad();
    }
};

// Define-by-run computation tape. Node values are computed eagerly as ops
// are recorded; backward() performs one reverse sweep in the reverse of
// creation order, which is a reverse topological order by construction.
//
// Primitive set (everything else in the model composes from these):
//   matmul, add, sub, elementwise mul, scalar scale, tanh, sigmoid, relu,
//   softmax/log-softmax over rows, row layer norm, concat rows/cols,
//   embedding row gather, mean, sum of squares, scalar pick, reshape,
//   transpose, row L2-normalize.
class Graph {
public:
    using Node = int;

    Node constant(Tensor value);
    Node scalar(double v);
    // Leaf bound to an external parameter; backward adds into p.value.grad.
    Node param(Parameter& p);

    Node matmul(Node a, Node b);
    Node add(Node a, Node b);
    Node sub(Node a, Node b);
    Node mul(Node a, Node b);
    Node scale(Node a, double s);
    Node tanh_of(Node a);
    Node sigmoid_of(Node a);
    Node relu(Node a);
    Node softmax_rows(Node a);
    Node log_softmax_rows(Node a);
    // x: m x n, gain/bias: 1 x n. Rows are normalized to zero mean and,
    // unless the row variance is clamped by eps, unit variance.
    Node layer_norm(Node x, Node gain, Node bias, double eps);
    Node concat_rows(const std::vector<Node>& parts);
    Node concat_cols(const std::vector<Node>& parts);
    // Gathers rows of a (vocab x d) table; backward scatter-adds.
    Node embed_rows(Node table, std::vector<int> ids);
    Node mean_all(Node a);
    Node sum_squares(Node a);
    Node pick(Node a, int r, int c);
    Node reshape(Node a, std::vector<int> new_shape);
    Node transpose(Node a);
    Node normalize_rows(Node a, double eps);

    const Tensor& value(Node n) const { return nodes_[static_cast<std::size_t>(n)].value; }
    // Gradient of the loss w.r.t. node n; valid after backward().
    const std::vector<double>& grad_of(Node n) const {
        return nodes_[static_cast<std::size_t>(n)].grad;
    }

    // Seeds d(loss)/d(loss)=1 and sweeps the tape once. loss must be a
    // scalar (1 element); a second call on the same graph is an error.
    void backward(Node loss);

    std::size_t size() const { return nodes_.size(); }

private:
    enum class Op {
        Constant, Param, MatMul, Add, Sub, Mul, Scale, Tanh, Sigmoid, Relu,
        SoftmaxRows, LogSoftmaxRows, LayerNorm, ConcatRows, ConcatCols,
        EmbedRows, MeanAll, SumSquares, Pick, Reshape, Transpose, NormalizeRows
    };

    struct Entry {
        Op op;
        std::vector<Node> inputs;
        Tensor value;
        std::vector<double> grad;
        Parameter* bound = nullptr;  // Param
        double attr = 0.0;           // Scale factor, layer-norm/normalize eps
        std::vector<int> ids;        // EmbedRows ids, Pick {r, c}
        std::vector<double> aux;     // LayerNorm per-row {mean, denom}, NormalizeRows norms
    };

    Node push(Entry e);
    const Tensor& val(Node n) const { return nodes_[static_cast<std::size_t>(n)].value; }
    void check_node(Node n) const;

    // deque keeps references from value() stable while the tape grows.
    std::deque<Entry> nodes_;
    bool backward_done_ = false;
};

} // namespace r2m
