#pragma once

#include <cstdint>

#include "r2m/graph.hpp"
#include "r2m/rng.hpp"
#include "r2m/vocab.hpp"

namespace r2m {

// Word embedding table, one row per vocabulary entry.
struct Embedding {
    Parameter table;  // vocab x d

    static Embedding init(const std::string& name, int vocab, int dim, Rng& rng);
    int vocab() const { return table.value.rows(); }
    int dim() const { return table.value.cols(); }
    void collect(std::vector<Parameter*>& out) { out.push_back(&table); }
};

// Standard LSTM cell parameters, row-vector convention: pre-activation =
// x*W + h*U + b with W: input_dim x hidden, U: hidden x hidden, b: 1 x hidden.
struct LstmParams {
    int input_dim = 0;
    int hidden_dim = 0;
    Parameter input_w, input_u, input_b;
    Parameter forget_w, forget_u, forget_b;
    Parameter output_w, output_u, output_b;
    Parameter cell_w, cell_u, cell_b;

    static LstmParams init(const std::string& prefix, int input_dim, int hidden_dim, Rng& rng);
    void collect(std::vector<Parameter*>& out);
};

// Per-graph node ids for one LstmParams instance.
struct LstmParamNodes {
    Graph::Node input_w, input_u, input_b;
    Graph::Node forget_w, forget_u, forget_b;
    Graph::Node output_w, output_u, output_b;
    Graph::Node cell_w, cell_u, cell_b;
};

LstmParamNodes bind(Graph& g, LstmParams& p);

struct LstmState {
    Graph::Node h;
    Graph::Node c;
};

// One LSTM step: sigmoid input/forget/output gates, tanh candidate.
LstmState lstm_step(Graph& g, Graph::Node x, LstmState state, const LstmParamNodes& p);

// Value-level convenience: single step from explicit tensors.
std::pair<Tensor, Tensor> lstm_step_value(const Tensor& x, const Tensor& h, const Tensor& c,
                                          LstmParams& p);

// The order in which concepts enter the LSTM: a seed-determined shuffle.
// An empty set maps to a single <UNK> token.
std::vector<int> concept_order(const ConceptSet& concepts, std::uint64_t order_seed);

// Runs the ordered concept embeddings through the LSTM from a zero state
// and returns the final hidden state (1 x d).
Graph::Node encode_concepts(Graph& g, const std::vector<int>& ordered_ids,
                            Graph::Node emb_table, const LstmParamNodes& lstm,
                            int hidden_dim);

Tensor encode_concepts_value(const ConceptSet& concepts, Embedding& emb, LstmParams& lstm,
                             std::uint64_t order_seed);

} // namespace r2m
