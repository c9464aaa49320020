#pragma once

#include "r2m/model.hpp"

namespace r2m {

// All parameter node ids of a model within one graph.
struct BoundModel {
    Graph::Node embedding;       // encoder-side table
    Graph::Node word_embedding;  // decoder-side table (same node when shared)
    LstmParamNodes encoder;
    FmParamNodes fusion;
    RmParamNodes decoder_rm;
    RmParamNodes reconstructor_rm;
    Graph::Node head_weight;
    Graph::Node head_weight_t;   // transposed once per graph
    Graph::Node head_bias = -1;  // -1 when the head has no bias
    Graph::Node similarity_proj;
};

BoundModel bind_model(Graph& g, Model& m);

// logits = M_t * W_d^T (+ bias). M_t must be a single memory row.
Graph::Node word_logits(Graph& g, Graph::Node memory_row, const BoundModel& bm);
Tensor word_logits_value(const Tensor& memory_row, Model& m);

// Per-step record of a decode: chosen/consumed token, logits, attention,
// and the post-step memory state.
struct DecodeStep {
    int token = -1;
    Tensor logits;                     // 1 x vocab
    std::vector<Tensor> fm_attention;  // per head, 2 x 2
    std::vector<Tensor> rm_attention;  // per head, 1 x 2
};

// Trace of a full decode. memories holds the initial zero memory followed
// by the memory after every step (steps.size() + 1 entries); it is the
// sequence the reconstructor replays.
struct DecodeTrace {
    std::vector<DecodeStep> steps;
    std::vector<Tensor> memories;

    std::vector<int> tokens() const;
    // Emitted tokens with the terminating end token removed.
    std::vector<int> caption() const;
};

// Graph-level decode result; node ids stay valid for loss construction.
struct DecodeNodes {
    std::vector<Graph::Node> logits;
    std::vector<Graph::Node> memories;               // M_0 .. M_len
    std::vector<std::vector<Graph::Node>> fm_attention;
    std::vector<std::vector<Graph::Node>> rm_attention;
    std::vector<int> tokens;

    DecodeTrace to_trace(const Graph& g) const;
};

// Teacher forcing: step t consumes the embedding of target[t-1] (the start
// token at t=0) and emits one logits row per target token.
DecodeNodes decode_teacher_forced(Graph& g, const BoundModel& bm, Model& m, Graph::Node v,
                                  const std::vector<int>& targets);

// Greedy decoding: feeds back the argmax token (ties to the lower id),
// stopping after the end token or max_len steps. Token choices are value
// decisions; gradients flow only through the continuous memory chain.
DecodeNodes decode_greedy(Graph& g, const BoundModel& bm, Model& m, Graph::Node v,
                          int max_len);

struct GreedyResult {
    std::vector<int> caption;  // end token excluded
    DecodeTrace trace;
};

GreedyResult decode_greedy_value(Model& m, const Tensor& v, int max_len);

struct BeamResult {
    std::vector<int> caption;   // end token excluded
    double log_prob = 0.0;
    bool finished = false;      // hit the end token before max_len
};

// Length-wise beam over summed token log-probs. Finished hypotheses retire
// to a pool; the best finished one wins, falling back to the best live
// hypothesis at max_len. Ties break toward the lower token id.
BeamResult beam_search(Model& m, const Tensor& v, int width, int max_len);

// Every candidate the beam produced: the finished pool plus the surviving
// live hypotheses, sorted by log-prob (the front is beam_search's answer).
std::vector<BeamResult> beam_search_candidates(Model& m, const Tensor& v, int width,
                                               int max_len);

// Replays a memory-state sequence through the reconstructor memory from a
// zero initial state; returns the final memory row (the rebuilt vector).
Graph::Node reconstruct(Graph& g, const BoundModel& bm, Model& m,
                        const std::vector<Graph::Node>& memories);
Tensor reconstruct_value(Model& m, const std::vector<Tensor>& memories);

// CSV export of FM and RM attention weights, one row per (step, head, unit).
std::string attention_trace_csv(const DecodeTrace& trace, const Vocabulary& vocab);

} // namespace r2m
