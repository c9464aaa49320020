#include "r2m/fusion_memory.hpp"

#include <cmath>

#include "r2m/errors.hpp"

namespace r2m {

namespace {

Tensor xavier(int rows, int cols, Rng& rng) {
    const double limit = std::sqrt(6.0 / (rows + cols));
    Tensor t = Tensor::zeros({rows, cols});
    for (double& v : t.data) v = rng.uniform(-limit, limit);
    return t;
}

} // namespace

FmParams FmParams::init(const std::string& prefix, int dim, int heads, int key_dim,
                        int value_dim, double scale, Rng& rng) {
    if (scale <= 0.0) throw ContractError("fusion memory: scale must be positive");
    if (heads < 1) throw ContractError("fusion memory: need at least one head");
    FmParams p;
    p.dim = dim;
    p.heads = heads;
    p.key_dim = key_dim;
    p.value_dim = value_dim;
    p.scale = scale;
    for (int h = 0; h < heads; ++h) {
        const std::string hs = std::to_string(h);
        p.query_w.emplace_back(prefix + "/head" + hs + "/query_w", xavier(dim, key_dim, rng));
        p.key_w.emplace_back(prefix + "/head" + hs + "/key_w", xavier(dim, key_dim, rng));
        p.value_w.emplace_back(prefix + "/head" + hs + "/value_w", xavier(dim, value_dim, rng));
    }
    p.out_w = Parameter(prefix + "/out_w", xavier(2 * heads * value_dim, dim, rng));
    p.out_b = Parameter(prefix + "/out_b", Tensor::zeros({1, dim}));
    return p;
}

void FmParams::collect(std::vector<Parameter*>& out) {
    for (Parameter& q : query_w) out.push_back(&q);
    for (Parameter& k : key_w) out.push_back(&k);
    for (Parameter& v : value_w) out.push_back(&v);
    out.push_back(&out_w);
    out.push_back(&out_b);
}

FmParamNodes bind(Graph& g, FmParams& p) {
    FmParamNodes n;
    for (Parameter& q : p.query_w) n.query_w.push_back(g.param(q));
    for (Parameter& k : p.key_w) n.key_w.push_back(g.param(k));
    for (Parameter& v : p.value_w) n.value_w.push_back(g.param(v));
    n.out_w = g.param(p.out_w);
    n.out_b = g.param(p.out_b);
    return n;
}

FmStep fm_forward(Graph& g, Graph::Node v, Graph::Node w_prev, const FmParamNodes& nodes,
                  const FmParams& p) {
    if (p.scale <= 0.0) throw ContractError("fusion memory: scale must be positive");
    Graph::Node stacked = g.concat_rows({v, w_prev});  // 2 x d
    const double inv_sqrt_scale = 1.0 / std::sqrt(p.scale);

    FmStep step;
    std::vector<Graph::Node> head_outputs;
    for (int h = 0; h < p.heads; ++h) {
        Graph::Node queries = g.matmul(stacked, nodes.query_w[static_cast<std::size_t>(h)]);
        Graph::Node keys = g.matmul(stacked, nodes.key_w[static_cast<std::size_t>(h)]);
        Graph::Node logits = g.scale(g.matmul(queries, g.transpose(keys)), inv_sqrt_scale);
        Graph::Node att = g.softmax_rows(logits);  // 2 x 2
        Graph::Node values = g.matmul(stacked, nodes.value_w[static_cast<std::size_t>(h)]);
        head_outputs.push_back(g.matmul(att, values));  // 2 x value_dim
        step.attention.push_back(att);
    }
    Graph::Node merged = head_outputs.size() == 1 ? head_outputs[0]
                                                  : g.concat_cols(head_outputs);
    // Row-major flatten (row 0 then row 1) feeding the output linear layer.
    Graph::Node flat = g.reshape(merged, {1, 2 * p.heads * p.value_dim});
    step.fused = g.add(g.matmul(flat, nodes.out_w), nodes.out_b);
    return step;
}

FmResult fm_forward_value(const Tensor& v, const Tensor& w_prev, FmParams& p) {
    Graph g;
    FmStep step = fm_forward(g, g.constant(v), g.constant(w_prev), bind(g, p), p);
    FmResult r;
    r.fused = g.value(step.fused);
    for (Graph::Node att : step.attention) r.attention.push_back(g.value(att));
    return r;
}

} // namespace r2m
