#include "r2m/recurrent_memory.hpp"

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

RmParams RmParams::init(const std::string& prefix, int dim, int rows, int heads, int key_dim,
                        int value_dim, double scale, Rng& rng) {
    if (heads * value_dim != dim) {
        throw DimensionError("recurrent memory: heads*value_dim (" +
                             std::to_string(heads * value_dim) + ") must equal dim (" +
                             std::to_string(dim) + ")");
    }
    if (scale <= 0.0) throw ContractError("recurrent memory: scale must be positive");
    if (rows < 1) throw ContractError("recurrent memory: need at least one memory row");
    RmParams p;
    p.dim = dim;
    p.rows = rows;
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
    p.norm1_gain = Parameter(prefix + "/norm1_gain", Tensor::full({1, dim}, 1.0));
    p.norm1_bias = Parameter(prefix + "/norm1_bias", Tensor::zeros({1, dim}));
    p.norm2_gain = Parameter(prefix + "/norm2_gain", Tensor::full({1, dim}, 1.0));
    p.norm2_bias = Parameter(prefix + "/norm2_bias", Tensor::zeros({1, dim}));
    p.mlp_w1 = Parameter(prefix + "/mlp_w1", xavier(dim, dim, rng));
    p.mlp_b1 = Parameter(prefix + "/mlp_b1", Tensor::zeros({1, dim}));
    p.mlp_w2 = Parameter(prefix + "/mlp_w2", xavier(dim, dim, rng));
    p.mlp_b2 = Parameter(prefix + "/mlp_b2", Tensor::zeros({1, dim}));
    p.gate_input_w = Parameter(prefix + "/gate_input_w", xavier(dim, dim, rng));
    p.gate_input_u = Parameter(prefix + "/gate_input_u", xavier(dim, dim, rng));
    p.gate_input_b = Parameter(prefix + "/gate_input_b", Tensor::zeros({1, dim}));
    p.gate_forget_w = Parameter(prefix + "/gate_forget_w", xavier(dim, dim, rng));
    p.gate_forget_u = Parameter(prefix + "/gate_forget_u", xavier(dim, dim, rng));
    p.gate_forget_b = Parameter(prefix + "/gate_forget_b", Tensor::zeros({1, dim}));
    return p;
}

void RmParams::collect(std::vector<Parameter*>& out) {
    for (Parameter& q : query_w) out.push_back(&q);
    for (Parameter& k : key_w) out.push_back(&k);
    for (Parameter& v : value_w) out.push_back(&v);
    out.push_back(&norm1_gain);
    out.push_back(&norm1_bias);
    out.push_back(&norm2_gain);
    out.push_back(&norm2_bias);
    out.push_back(&mlp_w1);
    out.push_back(&mlp_b1);
    out.push_back(&mlp_w2);
    out.push_back(&mlp_b2);
    out.push_back(&gate_input_w);
    out.push_back(&gate_input_u);
    out.push_back(&gate_input_b);
    out.push_back(&gate_forget_w);
    out.push_back(&gate_forget_u);
    out.push_back(&gate_forget_b);
}

RmParamNodes bind(Graph& g, RmParams& p) {
    RmParamNodes n;
    for (Parameter& q : p.query_w) n.query_w.push_back(g.param(q));
    for (Parameter& k : p.key_w) n.key_w.push_back(g.param(k));
    for (Parameter& v : p.value_w) n.value_w.push_back(g.param(v));
    n.norm1_gain = g.param(p.norm1_gain);
    n.norm1_bias = g.param(p.norm1_bias);
    n.norm2_gain = g.param(p.norm2_gain);
    n.norm2_bias = g.param(p.norm2_bias);
    n.mlp_w1 = g.param(p.mlp_w1);
    n.mlp_b1 = g.param(p.mlp_b1);
    n.mlp_w2 = g.param(p.mlp_w2);
    n.mlp_b2 = g.param(p.mlp_b2);
    n.gate_input_w = g.param(p.gate_input_w);
    n.gate_input_u = g.param(p.gate_input_u);
    n.gate_input_b = g.param(p.gate_input_b);
    n.gate_forget_w = g.param(p.gate_forget_w);
    n.gate_forget_u = g.param(p.gate_forget_u);
    n.gate_forget_b = g.param(p.gate_forget_b);
    return n;
}

RmAttend rm_attend(Graph& g, Graph::Node m_prev, Graph::Node input_row,
                   const RmParamNodes& nodes, const RmParams& p) {
    Graph::Node stacked = g.concat_rows({m_prev, input_row});  // (N+1) x d
    const double inv_sqrt_scale = 1.0 / std::sqrt(p.scale);

    RmAttend out;
    std::vector<Graph::Node> head_outputs;
    for (int h = 0; h < p.heads; ++h) {
        Graph::Node queries = g.matmul(m_prev, nodes.query_w[static_cast<std::size_t>(h)]);
        Graph::Node keys = g.matmul(stacked, nodes.key_w[static_cast<std::size_t>(h)]);
        Graph::Node logits = g.scale(g.matmul(queries, g.transpose(keys)), inv_sqrt_scale);
        Graph::Node att = g.softmax_rows(logits);  // N x (N+1)
        Graph::Node values = g.matmul(stacked, nodes.value_w[static_cast<std::size_t>(h)]);
        head_outputs.push_back(g.matmul(att, values));  // N x value_dim
        out.attention.push_back(att);
    }
    out.attended = head_outputs.size() == 1 ? head_outputs[0] : g.concat_cols(head_outputs);
    return out;
}

Graph::Node psi(Graph& g, Graph::Node attended, Graph::Node m_prev,
                const RmParamNodes& nodes, const RmParams& p) {
    Graph::Node hidden =
        g.layer_norm(g.add(attended, m_prev), nodes.norm1_gain, nodes.norm1_bias, p.ln_eps);
    Graph::Node mlp = g.add(
        g.matmul(g.tanh_of(g.add(g.matmul(hidden, nodes.mlp_w1), nodes.mlp_b1)), nodes.mlp_w2),
        nodes.mlp_b2);
    return g.layer_norm(g.add(hidden, mlp), nodes.norm2_gain, nodes.norm2_bias, p.ln_eps);
}

Graph::Node relational_gate(Graph& g, Graph::Node input_row, Graph::Node m_prev,
                            Graph::Node memory_gain, const RmParamNodes& nodes,
                            const RmParams& /*p*/) {
    // For multi-row memory the gate drive from the input row is shared
    // across rows; with N=1 this is a no-op stack.
    const int rows = g.value(m_prev).rows();
    Graph::Node m_tanh = g.tanh_of(m_prev);
    auto gate = [&](Graph::Node w, Graph::Node u, Graph::Node b) {
        Graph::Node drive = g.add(g.matmul(input_row, w), b);  // 1 x d
        if (rows > 1) {
            std::vector<Graph::Node> copies(static_cast<std::size_t>(rows), drive);
            drive = g.concat_rows(copies);
        }
        return g.sigmoid_of(g.add(drive, g.matmul(m_tanh, u)));
    };
    Graph::Node input_gate = gate(nodes.gate_input_w, nodes.gate_input_u, nodes.gate_input_b);
    Graph::Node forget_gate =
        gate(nodes.gate_forget_w, nodes.gate_forget_u, nodes.gate_forget_b);
    return g.add(g.mul(input_gate, g.tanh_of(memory_gain)), g.mul(forget_gate, m_prev));
}

RmStep rm_step(Graph& g, Graph::Node m_prev, Graph::Node input_row, const RmParamNodes& nodes,
               const RmParams& p) {
    RmAttend att = rm_attend(g, m_prev, input_row, nodes, p);
    Graph::Node gain = psi(g, att.attended, m_prev, nodes, p);
    RmStep step;
    step.memory = relational_gate(g, input_row, m_prev, gain, nodes, p);
    step.attention = std::move(att.attention);
    return step;
}

RmStepResult rm_step_value(const Tensor& m_prev, const Tensor& input_row, RmParams& p) {
    Graph g;
    RmStep step = rm_step(g, g.constant(m_prev), g.constant(input_row), bind(g, p), p);
    RmStepResult r;
    r.memory = g.value(step.memory);
    for (Graph::Node att : step.attention) r.attention.push_back(g.value(att));
    return r;
}

} // namespace r2m
