#include "r2m/seq2seq.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "r2m/errors.hpp"

namespace r2m {

namespace {

// Argmax with ties to the lower index.
int argmax_row(const Tensor& row) {
    int best = 0;
    for (int j = 1; j < static_cast<int>(row.numel()); ++j) {
        if (row.data[static_cast<std::size_t>(j)] > row.data[static_cast<std::size_t>(best)]) {
            best = j;
        }
    }
    return best;
}

std::vector<double> log_softmax(const Tensor& logits) {
    double mx = logits.data[0];
    for (double v : logits.data) mx = std::max(mx, v);
    double sum = 0.0;
    for (double v : logits.data) sum += std::exp(v - mx);
    const double lse = mx + std::log(sum);
    std::vector<double> out(logits.numel());
    for (std::size_t i = 0; i < logits.numel(); ++i) out[i] = logits.data[i] - lse;
    return out;
}

struct StepOut {
    Graph::Node memory;
    Graph::Node logits;
    std::vector<Graph::Node> fm_attention;
    std::vector<Graph::Node> rm_attention;
};

// One decoder step: fuse (v, w_prev) then update the memory and read logits.
StepOut decoder_step(Graph& g, const BoundModel& bm, Model& m, Graph::Node v,
                     Graph::Node m_prev, int prev_token) {
    Graph::Node w_prev = g.embed_rows(bm.word_embedding, {prev_token});
    FmStep fm = fm_forward(g, v, w_prev, bm.fusion, m.fusion());
    RmStep rm = rm_step(g, m_prev, fm.fused, bm.decoder_rm, m.decoder_memory());
    StepOut out;
    out.memory = rm.memory;
    out.logits = word_logits(g, rm.memory, bm);
    out.fm_attention = std::move(fm.attention);
    out.rm_attention = std::move(rm.attention);
    return out;
}

} // namespace

BoundModel bind_model(Graph& g, Model& m) {
    BoundModel bm;
    bm.embedding = g.param(m.encoder_embedding().table);
    bm.word_embedding =
        m.config().shared_embeddings ? bm.embedding : g.param(m.word_embedding().table);
    bm.encoder = bind(g, m.encoder_lstm());
    bm.fusion = bind(g, m.fusion());
    bm.decoder_rm = bind(g, m.decoder_memory());
    bm.reconstructor_rm = bind(g, m.reconstructor_memory());
    bm.head_weight = g.param(m.word_head().weight);
    bm.head_weight_t = g.transpose(bm.head_weight);
    if (m.word_head().bias) bm.head_bias = g.param(*m.word_head().bias);
    bm.similarity_proj = g.param(m.similarity().proj);
    return bm;
}

Graph::Node word_logits(Graph& g, Graph::Node memory_row, const BoundModel& bm) {
    if (g.value(memory_row).rows() != 1) {
        throw DimensionError("word_logits: expected a single memory row, got " +
                             shape_str(g.value(memory_row).shape));
    }
    Graph::Node logits = g.matmul(memory_row, bm.head_weight_t);
    if (bm.head_bias >= 0) logits = g.add(logits, bm.head_bias);
    return logits;
}

Tensor word_logits_value(const Tensor& memory_row, Model& m) {
    Graph g;
    BoundModel bm = bind_model(g, m);
    return g.value(word_logits(g, g.constant(memory_row), bm));
}

std::vector<int> DecodeTrace::tokens() const {
    std::vector<int> out;
    out.reserve(steps.size());
    for (const DecodeStep& s : steps) out.push_back(s.token);
    return out;
}

std::vector<int> DecodeTrace::caption() const {
    std::vector<int> out;
    for (const DecodeStep& s : steps) {
        if (s.token == Vocabulary::kEnd) break;
        out.push_back(s.token);
    }
    return out;
}

DecodeTrace DecodeNodes::to_trace(const Graph& g) const {
    DecodeTrace trace;
    for (std::size_t t = 0; t < logits.size(); ++t) {
        DecodeStep step;
        step.token = tokens[t];
        step.logits = g.value(logits[t]);
        for (Graph::Node a : fm_attention[t]) step.fm_attention.push_back(g.value(a));
        for (Graph::Node a : rm_attention[t]) step.rm_attention.push_back(g.value(a));
        trace.steps.push_back(std::move(step));
    }
    for (Graph::Node mem : memories) trace.memories.push_back(g.value(mem));
    return trace;
}

DecodeNodes decode_teacher_forced(Graph& g, const BoundModel& bm, Model& m, Graph::Node v,
                                  const std::vector<int>& targets) {
    if (targets.empty()) throw ContractError("decode_teacher_forced: empty target sequence");
    if (targets.back() != Vocabulary::kEnd) {
        throw ContractError("decode_teacher_forced: targets must end with the end token");
    }
    DecodeNodes out;
    Graph::Node memory = g.constant(Tensor::zeros({m.config().memory_rows, m.config().dim}));
    out.memories.push_back(memory);
    int prev = Vocabulary::kStart;
    for (int target : targets) {
        StepOut step = decoder_step(g, bm, m, v, memory, prev);
        memory = step.memory;
        out.memories.push_back(memory);
        out.logits.push_back(step.logits);
        out.fm_attention.push_back(std::move(step.fm_attention));
        out.rm_attention.push_back(std::move(step.rm_attention));
        out.tokens.push_back(target);
        prev = target;
    }
    return out;
}

DecodeNodes decode_greedy(Graph& g, const BoundModel& bm, Model& m, Graph::Node v,
                          int max_len) {
    if (max_len < 1) throw ContractError("decode_greedy: max_len must be at least 1");
    DecodeNodes out;
    Graph::Node memory = g.constant(Tensor::zeros({m.config().memory_rows, m.config().dim}));
    out.memories.push_back(memory);
    int prev = Vocabulary::kStart;
    for (int t = 0; t < max_len; ++t) {
        StepOut step = decoder_step(g, bm, m, v, memory, prev);
        memory = step.memory;
        out.memories.push_back(memory);
        out.logits.push_back(step.logits);
        out.fm_attention.push_back(std::move(step.fm_attention));
        out.rm_attention.push_back(std::move(step.rm_attention));
        const int chosen = argmax_row(g.value(step.logits));
        out.tokens.push_back(chosen);
        if (chosen == Vocabulary::kEnd) break;
        prev = chosen;
    }
    return out;
}

GreedyResult decode_greedy_value(Model& m, const Tensor& v, int max_len) {
    Graph g;
    BoundModel bm = bind_model(g, m);
    DecodeNodes nodes = decode_greedy(g, bm, m, g.constant(v), max_len);
    GreedyResult r;
    r.trace = nodes.to_trace(g);
    r.caption = r.trace.caption();
    return r;
}

std::vector<BeamResult> beam_search_candidates(Model& m, const Tensor& v, int width,
                                               int max_len) {
    if (width < 1) throw ContractError("beam_search: width must be at least 1");
    if (max_len < 1) throw ContractError("beam_search: max_len must be at least 1");

    struct Hypothesis {
        std::vector<int> tokens;
        double log_prob = 0.0;
        Tensor memory;
        int prev_token = Vocabulary::kStart;
    };

    const int vocab = m.config().vocab;
    std::vector<Hypothesis> live(1);
    live[0].memory = Tensor::zeros({m.config().memory_rows, m.config().dim});
    std::vector<Hypothesis> finished;

    for (int t = 0; t < max_len && !live.empty(); ++t) {
        struct Candidate {
            std::size_t parent;
            int token;
            double log_prob;
        };
        std::vector<Candidate> candidates;
        std::vector<Tensor> memories(live.size());
        for (std::size_t i = 0; i < live.size(); ++i) {
            Graph g;
            BoundModel bm = bind_model(g, m);
            StepOut step = decoder_step(g, bm, m, g.constant(v),
                                        g.constant(live[i].memory), live[i].prev_token);
            memories[i] = g.value(step.memory);
            const std::vector<double> logp = log_softmax(g.value(step.logits));
            for (int w = 0; w < vocab; ++w) {
                candidates.push_back(
                    {i, w, live[i].log_prob + logp[static_cast<std::size_t>(w)]});
            }
        }
        // Higher score first; ties toward the earlier parent, then lower token id.
        std::sort(candidates.begin(), candidates.end(), [](const Candidate& a,
                                                           const Candidate& b) {
            if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
            if (a.parent != b.parent) return a.parent < b.parent;
            return a.token < b.token;
        });
        // Top `width` candidates keep their beam slots; the ones that hit
        // the end token retire to the finished pool.
        std::vector<Hypothesis> next;
        int taken = 0;
        for (const Candidate& c : candidates) {
            if (taken >= width) break;
            ++taken;
            Hypothesis h;
            h.tokens = live[c.parent].tokens;
            h.tokens.push_back(c.token);
            h.log_prob = c.log_prob;
            h.memory = memories[c.parent];
            h.prev_token = c.token;
            if (c.token == Vocabulary::kEnd) {
                finished.push_back(std::move(h));
            } else {
                next.push_back(std::move(h));
            }
        }
        live = std::move(next);
    }

    // Finished hypotheses first (best log-prob leading), then live ones,
    // so the front is the hypothesis plain beam search returns.
    auto by_log_prob = [](const Hypothesis& a, const Hypothesis& b) {
        return a.log_prob > b.log_prob;
    };
    std::stable_sort(finished.begin(), finished.end(), by_log_prob);
    std::stable_sort(live.begin(), live.end(), by_log_prob);

    std::vector<BeamResult> out;
    auto emit = [&out](const Hypothesis& h, bool is_finished) {
        BeamResult r;
        r.log_prob = h.log_prob;
        r.finished = is_finished;
        for (int tok : h.tokens) {
            if (tok == Vocabulary::kEnd) break;
            r.caption.push_back(tok);
        }
        out.push_back(std::move(r));
    };
    for (const Hypothesis& h : finished) emit(h, true);
    for (const Hypothesis& h : live) emit(h, false);
    if (out.empty()) throw ContractError("beam_search: no hypothesis survived");
    return out;
}

BeamResult beam_search(Model& m, const Tensor& v, int width, int max_len) {
    return beam_search_candidates(m, v, width, max_len).front();
}

Graph::Node reconstruct(Graph& g, const BoundModel& bm, Model& m,
                        const std::vector<Graph::Node>& memories) {
    if (memories.empty()) throw ContractError("reconstruct: empty memory trace");
    Graph::Node recon = g.constant(Tensor::zeros({m.config().memory_rows, m.config().dim}));
    for (Graph::Node mem : memories) {
        // The reconstructor reads memory states only, never token ids.
        RmStep step = rm_step(g, recon, mem, bm.reconstructor_rm, m.reconstructor_memory());
        recon = step.memory;
    }
    return recon;
}

Tensor reconstruct_value(Model& m, const std::vector<Tensor>& memories) {
    Graph g;
    BoundModel bm = bind_model(g, m);
    std::vector<Graph::Node> nodes;
    nodes.reserve(memories.size());
    for (const Tensor& t : memories) nodes.push_back(g.constant(t));
    return g.value(reconstruct(g, bm, m, nodes));
}

std::string attention_trace_csv(const DecodeTrace& trace, const Vocabulary& vocab) {
    std::ostringstream os;
    os << "step,token,unit,head,w1,w2,w3,w4\n";
    os.precision(17);
    for (std::size_t t = 0; t < trace.steps.size(); ++t) {
        const DecodeStep& s = trace.steps[t];
        const std::string token = s.token >= 0 ? vocab.token_of(s.token) : "";
        for (std::size_t h = 0; h < s.fm_attention.size(); ++h) {
            const Tensor& a = s.fm_attention[h];
            // Column order: v->v, w->v, v->w, w->w (row-major 2x2).
            os << t << ',' << token << ",fm," << h << ',' << a.at(0, 0) << ',' << a.at(0, 1)
               << ',' << a.at(1, 0) << ',' << a.at(1, 1) << '\n';
        }
        for (std::size_t h = 0; h < s.rm_attention.size(); ++h) {
            const Tensor& a = s.rm_attention[h];
            // Column order: memory->memory, input->memory.
            os << t << ',' << token << ",rm," << h << ',' << a.at(0, 0) << ',' << a.at(0, 1)
               << ",,\n";
        }
    }
    return os.str();
}

} // namespace r2m
