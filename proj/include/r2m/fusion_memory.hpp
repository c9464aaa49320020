#pragma once

#include "r2m/graph.hpp"
#include "r2m/rng.hpp"

namespace r2m {

// Fusion memory: multi-head self-attention over the 2 x d stack of the
// concept vector and the previous word embedding, followed by a linear
// layer that maps the flattened head outputs back to a d-vector.
struct FmParams {
    int dim = 0;        // d
    int heads = 0;      // H
    int key_dim = 0;    // per-head query/key width
    int value_dim = 0;  // per-head value width
    double scale = 0.0; // attention logit divisor is sqrt(scale)

    std::vector<Parameter> query_w;  // per head, d x key_dim
    std::vector<Parameter> key_w;    // per head, d x key_dim
    std::vector<Parameter> value_w;  // per head, d x value_dim
    Parameter out_w;                 // (2*heads*value_dim) x d
    Parameter out_b;                 // 1 x d

    static FmParams init(const std::string& prefix, int dim, int heads, int key_dim,
                         int value_dim, double scale, Rng& rng);
    void collect(std::vector<Parameter*>& out);
};

struct FmParamNodes {
    std::vector<Graph::Node> query_w, key_w, value_w;
    Graph::Node out_w, out_b;
};

FmParamNodes bind(Graph& g, FmParams& p);

struct FmStep {
    Graph::Node fused;                   // f_t, 1 x d
    std::vector<Graph::Node> attention;  // per head, 2 x 2 row-stochastic
};

// v and w_prev are 1 x d rows. Per head: A = softmax(x Q (x K)^T / sqrt(scale))
// over the stacked x = [v; w_prev]; attended values are column-concatenated
// across heads, flattened row-major, and passed through the output layer.
FmStep fm_forward(Graph& g, Graph::Node v, Graph::Node w_prev, const FmParamNodes& nodes,
                  const FmParams& p);

struct FmResult {
    Tensor fused;
    std::vector<Tensor> attention;
};

FmResult fm_forward_value(const Tensor& v, const Tensor& w_prev, FmParams& p);

} // namespace r2m
