#pragma once

#include "r2m/graph.hpp"
#include "r2m/rng.hpp"

namespace r2m {

// Recurrent memory unit: memory-guided multi-head attention, a residual
// MLP block with layer normalization, and an input/forget relational gate
// blending the candidate memory with the previous memory.
struct RmParams {
    int dim = 0;        // d (memory row width)
    int rows = 1;       // N memory rows
    int heads = 0;      // H
    int key_dim = 0;    // per-head query/key width
    int value_dim = 0;  // per-head value width; heads * value_dim == dim
    double scale = 0.0; // attention logit divisor is sqrt(scale)
    double ln_eps = 1e-5;

    std::vector<Parameter> query_w, key_w, value_w;  // per head
    Parameter norm1_gain, norm1_bias;                // after attention residual
    Parameter norm2_gain, norm2_bias;                // after MLP residual
    Parameter mlp_w1, mlp_b1, mlp_w2, mlp_b2;        // row-wise linear-tanh-linear
    Parameter gate_input_w, gate_input_u, gate_input_b;
    Parameter gate_forget_w, gate_forget_u, gate_forget_b;

    static RmParams init(const std::string& prefix, int dim, int rows, int heads,
                         int key_dim, int value_dim, double scale, Rng& rng);
    void collect(std::vector<Parameter*>& out);
};

struct RmParamNodes {
    std::vector<Graph::Node> query_w, key_w, value_w;
    Graph::Node norm1_gain, norm1_bias, norm2_gain, norm2_bias;
    Graph::Node mlp_w1, mlp_b1, mlp_w2, mlp_b2;
    Graph::Node gate_input_w, gate_input_u, gate_input_b;
    Graph::Node gate_forget_w, gate_forget_u, gate_forget_b;
};

RmParamNodes bind(Graph& g, RmParams& p);

struct RmAttend {
    Graph::Node attended;                // N x d
    std::vector<Graph::Node> attention;  // per head, N x (N+1), rows sum to 1
};

// Query comes from the previous memory only; keys and values from the
// (N+1) x d stack [M_prev; input_row].
RmAttend rm_attend(Graph& g, Graph::Node m_prev, Graph::Node input_row,
                   const RmParamNodes& nodes, const RmParams& p);

// h = LN1(attended + M_prev); gain = LN2(h + MLP(h)).
Graph::Node psi(Graph& g, Graph::Node attended, Graph::Node m_prev,
                const RmParamNodes& nodes, const RmParams& p);

// g_i = sigmoid(input W_i + tanh(M_prev) U_i + b_i), g_f analogous;
// M_t = g_i (.) tanh(gain) + g_f (.) M_prev, all elementwise.
Graph::Node relational_gate(Graph& g, Graph::Node input_row, Graph::Node m_prev,
                            Graph::Node memory_gain, const RmParamNodes& nodes,
                            const RmParams& p);

struct RmStep {
    Graph::Node memory;                  // M_t, N x d
    std::vector<Graph::Node> attention;  // per head
};

// Full unit: rm_attend -> psi -> relational_gate.
RmStep rm_step(Graph& g, Graph::Node m_prev, Graph::Node input_row,
               const RmParamNodes& nodes, const RmParams& p);

struct RmStepResult {
    Tensor memory;
    std::vector<Tensor> attention;
};

RmStepResult rm_step_value(const Tensor& m_prev, const Tensor& input_row, RmParams& p);

} // namespace r2m
