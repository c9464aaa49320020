#include <doctest.h>

#include <cmath>

#include "r2m/encoder.hpp"
#include "r2m/errors.hpp"
#include "r2m/gradcheck.hpp"

using namespace r2m;

namespace {

LstmParams zero_lstm(int dim) {
    Rng rng(0);
    LstmParams p = LstmParams::init("lstm", dim, dim, rng);
    std::vector<Parameter*> all;
    p.collect(all);
    for (Parameter* t : all) std::fill(t->value.data.begin(), t->value.data.end(), 0.0);
    return p;
}

} // namespace

TEST_CASE("filter_concepts keeps in-dictionary detections at or above threshold") {
    // ids: dog=10, phone=11
    ConceptSet detections;
    detections.add(10, 0.9);
    detections.add(11, 0.25);
    const std::unordered_set<int> dictionary = {10, 11};
    const ConceptSet kept = filter_concepts(detections, dictionary, 0.3);
    REQUIRE(kept.size() == 1);
    CHECK(kept.items[0].id == 10);
}

TEST_CASE("filter_concepts: empty input, inclusive boundary, dictionary miss") {
    const std::unordered_set<int> dictionary = {1, 2, 3};
    CHECK(filter_concepts(ConceptSet{}, dictionary, 0.3).empty());

    ConceptSet boundary;
    boundary.add(1, 0.3);
    boundary.add(2, 0.3);
    CHECK(filter_concepts(boundary, dictionary, 0.3).size() == 2);

    ConceptSet foreign;
    foreign.add(9, 0.9);
    CHECK(filter_concepts(foreign, dictionary, 0.3).empty());
}

TEST_CASE("filter_concepts is idempotent and order preserving") {
    ConceptSet detections;
    detections.add(5, 0.8);
    detections.add(3, 0.5);
    detections.add(8, 0.31);
    const std::unordered_set<int> dictionary = {3, 5, 8};
    const ConceptSet once = filter_concepts(detections, dictionary, 0.4);
    const ConceptSet twice = filter_concepts(once, dictionary, 0.4);
    REQUIRE(once.size() == twice.size());
    CHECK(once.ids() == std::vector<int>{5, 3});
    CHECK(once.ids() == twice.ids());
}

TEST_CASE("lstm_step: zero parameters and state give zero output") {
    const int d = 4;
    LstmParams p = zero_lstm(d);
    const auto [h, c] = lstm_step_value(Tensor::full({1, d}, 0.7), Tensor::zeros({1, d}),
                                        Tensor::zeros({1, d}), p);
    for (double v : h.data) CHECK(v == 0.0);
    for (double v : c.data) CHECK(v == 0.0);
}

TEST_CASE("lstm_step: candidate path contributes at most 1 per entry") {
    Rng rng(5);
    LstmParams p = LstmParams::init("lstm", 8, 8, rng);
    Tensor x = Tensor::zeros({1, 8});
    for (double& v : x.data) v = 3.0 * rng.gauss();
    // From a zero cell, c' = i (.) g with both factors inside (-1, 1).
    const auto [h, c] = lstm_step_value(x, Tensor::zeros({1, 8}), Tensor::zeros({1, 8}), p);
    for (double v : c.data) CHECK(std::abs(v) <= 1.0);
    for (double v : h.data) CHECK(std::abs(v) <= 1.0);
}

TEST_CASE("lstm_step gradients match central differences") {
    Rng rng(42);
    LstmParams p = LstmParams::init("lstm", 8, 8, rng);
    Tensor x = Tensor::zeros({1, 8});
    Tensor h0 = Tensor::zeros({1, 8});
    Tensor c0 = Tensor::zeros({1, 8});
    for (double& v : x.data) v = rng.gauss();
    for (double& v : h0.data) v = rng.gauss();
    for (double& v : c0.data) v = rng.gauss();

    std::vector<Parameter*> params;
    p.collect(params);
    auto loss_fn = [&](bool with_grad) {
        Graph g;
        LstmState s{g.constant(h0), g.constant(c0)};
        LstmState out = lstm_step(g, g.constant(x), s, bind(g, p));
        Graph::Node loss = g.scale(g.add(g.sum_squares(out.h), g.sum_squares(out.c)), 0.01);
        if (with_grad) g.backward(loss);
        return g.value(loss).data[0];
    };
    GradCheckReport report = grad_check(loss_fn, params);
    CHECK(report.usable);
    CHECK(report.max_rel_error < 1e-4);
}

TEST_CASE("encode_concepts: determinism and permutation behavior") {
    Rng rng(9);
    Embedding emb = Embedding::init("emb", 20, 8, rng);
    LstmParams lstm = LstmParams::init("lstm", 8, 8, rng);

    ConceptSet set;
    set.add(4, 1.0);
    set.add(7, 1.0);
    set.add(12, 1.0);

    const Tensor a = encode_concepts_value(set, emb, lstm, 123);
    const Tensor b = encode_concepts_value(set, emb, lstm, 123);
    CHECK(a.data == b.data);

    ConceptSet singleton;
    singleton.add(4, 1.0);
    const Tensor s1 = encode_concepts_value(singleton, emb, lstm, 1);
    const Tensor s2 = encode_concepts_value(singleton, emb, lstm, 2);
    CHECK(s1.data == s2.data);
}

TEST_CASE("encode_concepts: zero parameters give a zero vector") {
    Rng rng(9);
    Embedding emb = Embedding::init("emb", 20, 6, rng);
    LstmParams lstm = zero_lstm(6);
    ConceptSet set;
    set.add(3, 1.0);
    set.add(9, 0.9);
    const Tensor v = encode_concepts_value(set, emb, lstm, 0);
    for (double x : v.data) CHECK(x == 0.0);
}

TEST_CASE("encode_concepts runs one LSTM step per concept") {
    Rng rng(17);
    Embedding emb = Embedding::init("emb", 20, 8, rng);
    LstmParams lstm = LstmParams::init("lstm", 8, 8, rng);

    ConceptSet set;
    set.add(5, 1.0);
    set.add(11, 1.0);
    set.add(17, 1.0);

    const std::vector<int> order = concept_order(set, 77);
    CHECK(order.size() == set.size());

    // Manual replay: k explicit steps over the same order.
    Tensor h = Tensor::zeros({1, 8});
    Tensor c = Tensor::zeros({1, 8});
    for (int id : order) {
        Tensor x = Tensor::zeros({1, 8});
        for (int j = 0; j < 8; ++j) x.data[static_cast<std::size_t>(j)] = emb.table.value.at(id, j);
        std::tie(h, c) = lstm_step_value(x, h, c, lstm);
    }
    const Tensor v = encode_concepts_value(set, emb, lstm, 77);
    CHECK(v.data == h.data);
}

TEST_CASE("encode_concepts: empty set encodes the single unknown token") {
    Rng rng(21);
    Embedding emb = Embedding::init("emb", 20, 8, rng);
    LstmParams lstm = LstmParams::init("lstm", 8, 8, rng);

    const std::vector<int> order = concept_order(ConceptSet{}, 5);
    CHECK(order == std::vector<int>{Vocabulary::kUnk});

    Tensor x = Tensor::zeros({1, 8});
    for (int j = 0; j < 8; ++j) {
        x.data[static_cast<std::size_t>(j)] = emb.table.value.at(Vocabulary::kUnk, j);
    }
    const auto [h, c] = lstm_step_value(x, Tensor::zeros({1, 8}), Tensor::zeros({1, 8}), lstm);
    const Tensor v = encode_concepts_value(ConceptSet{}, emb, lstm, 5);
    CHECK(v.data == h.data);
}

TEST_CASE("encode_concepts rejects out-of-range ids") {
    Rng rng(2);
    Embedding emb = Embedding::init("emb", 10, 4, rng);
    LstmParams lstm = LstmParams::init("lstm", 4, 4, rng);
    ConceptSet set;
    set.add(99, 1.0);
    CHECK_THROWS_AS(encode_concepts_value(set, emb, lstm, 0), VocabError);
}

TEST_CASE("concept scores outside [0,1] are rejected") {
    ConceptSet set;
    CHECK_THROWS_AS(set.add(1, 1.5), ContractError);
    CHECK_THROWS_AS(set.add(1, -0.1), ContractError);
}
