#include "r2m/encoder.hpp"

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

Embedding Embedding::init(const std::string& name, int vocab, int dim, Rng& rng) {
    Embedding e;
    Tensor t = Tensor::zeros({vocab, dim});
    for (double& v : t.data) v = 0.3 * rng.gauss();
    e.table = Parameter(name, std::move(t));
    return e;
}

LstmParams LstmParams::init(const std::string& prefix, int input_dim, int hidden_dim,
                            Rng& rng) {
    LstmParams p;
    p.input_dim = input_dim;
    p.hidden_dim = hidden_dim;
    auto w = [&](const std::string& n) {
        return Parameter(prefix + "/" + n, xavier(input_dim, hidden_dim, rng));
    };
    auto u = [&](const std::string& n) {
        return Parameter(prefix + "/" + n, xavier(hidden_dim, hidden_dim, rng));
    };
    auto b = [&](const std::string& n) {
        return Parameter(prefix + "/" + n, Tensor::zeros({1, hidden_dim}));
    };
    p.input_w = w("input_w");
    p.input_u = u("input_u");
    p.input_b = b("input_b");
    p.forget_w = w("forget_w");
    p.forget_u = u("forget_u");
    p.forget_b = b("forget_b");
    p.output_w = w("output_w");
    p.output_u = u("output_u");
    p.output_b = b("output_b");
    p.cell_w = w("cell_w");
    p.cell_u = u("cell_u");
    p.cell_b = b("cell_b");
    return p;
}

void LstmParams::collect(std::vector<Parameter*>& out) {
    out.push_back(&input_w);
    out.push_back(&input_u);
    out.push_back(&input_b);
    out.push_back(&forget_w);
    out.push_back(&forget_u);
    out.push_back(&forget_b);
    out.push_back(&output_w);
    out.push_back(&output_u);
    out.push_back(&output_b);
    out.push_back(&cell_w);
    out.push_back(&cell_u);
    out.push_back(&cell_b);
}

LstmParamNodes bind(Graph& g, LstmParams& p) {
    LstmParamNodes n;
    n.input_w = g.param(p.input_w);
    n.input_u = g.param(p.input_u);
    n.input_b = g.param(p.input_b);
    n.forget_w = g.param(p.forget_w);
    n.forget_u = g.param(p.forget_u);
    n.forget_b = g.param(p.forget_b);
    n.output_w = g.param(p.output_w);
    n.output_u = g.param(p.output_u);
    n.output_b = g.param(p.output_b);
    n.cell_w = g.param(p.cell_w);
    n.cell_u = g.param(p.cell_u);
    n.cell_b = g.param(p.cell_b);
    return n;
}

LstmState lstm_step(Graph& g, Graph::Node x, LstmState s, const LstmParamNodes& p) {
    auto gate = [&](Graph::Node w, Graph::Node u, Graph::Node b) {
        return g.add(g.add(g.matmul(x, w), g.matmul(s.h, u)), b);
    };
    Graph::Node in_gate = g.sigmoid_of(gate(p.input_w, p.input_u, p.input_b));
    Graph::Node forget_gate = g.sigmoid_of(gate(p.forget_w, p.forget_u, p.forget_b));
    Graph::Node out_gate = g.sigmoid_of(gate(p.output_w, p.output_u, p.output_b));
    Graph::Node candidate = g.tanh_of(gate(p.cell_w, p.cell_u, p.cell_b));
    Graph::Node c_next = g.add(g.mul(forget_gate, s.c), g.mul(in_gate, candidate));
    Graph::Node h_next = g.mul(out_gate, g.tanh_of(c_next));
    return {h_next, c_next};
}

std::pair<Tensor, Tensor> lstm_step_value(const Tensor& x, const Tensor& h, const Tensor& c,
                                          LstmParams& p) {
    Graph g;
    LstmState s{g.constant(h), g.constant(c)};
    LstmState out = lstm_step(g, g.constant(x), s, bind(g, p));
    return {g.value(out.h), g.value(out.c)};
}

std::vector<int> concept_order(const ConceptSet& concepts, std::uint64_t order_seed) {
    std::vector<int> ids = concepts.ids();
    if (ids.empty()) return {Vocabulary::kUnk};
    Rng rng(order_seed);
    rng.shuffle(ids);
    return ids;
}

Graph::Node encode_concepts(Graph& g, const std::vector<int>& ordered_ids,
                            Graph::Node emb_table, const LstmParamNodes& lstm,
                            int hidden_dim) {
    if (ordered_ids.empty()) throw ContractError("encode_concepts: empty id sequence");
    LstmState s{g.constant(Tensor::zeros({1, hidden_dim})),
                g.constant(Tensor::zeros({1, hidden_dim}))};
    for (int id : ordered_ids) {
        Graph::Node x = g.embed_rows(emb_table, {id});
        s = lstm_step(g, x, s, lstm);
    }
    return s.h;
}

Tensor encode_concepts_value(const ConceptSet& concepts, Embedding& emb, LstmParams& lstm,
                             std::uint64_t order_seed) {
    Graph g;
    Graph::Node table = g.param(emb.table);
    Graph::Node v = encode_concepts(g, concept_order(concepts, order_seed), table,
                                    bind(g, lstm), lstm.hidden_dim);
    return g.value(v);
}

} // namespace r2m
