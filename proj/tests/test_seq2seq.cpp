#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "r2m/errors.hpp"
#include "r2m/gradcheck.hpp"
#include "r2m/losses.hpp"
#include "r2m/seq2seq.hpp"

using namespace r2m;

namespace {

ModelConfig tiny_config(int vocab = 20) {
    ModelConfig cfg;
    cfg.dim = 8;
    cfg.heads = 2;
    cfg.fm_key_dim = 4;
    cfg.fm_value_dim = 4;
    cfg.rm_key_dim = 4;
    cfg.rm_value_dim = 4;
    cfg.vocab = vocab;
    cfg.feature_dim = 8;
    return cfg;
}

Tensor random_row(int n, Rng& rng, double scale = 1.0) {
    Tensor t = Tensor::zeros({1, n});
    for (double& v : t.data) v = scale * rng.gauss();
    return t;
}

double sequence_log_prob(const DecodeTrace& trace) {
    double total = 0.0;
    for (const DecodeStep& s : trace.steps) {
        double mx = s.logits.data[0];
        for (double v : s.logits.data) mx = std::max(mx, v);
        double sum = 0.0;
        for (double v : s.logits.data) sum += std::exp(v - mx);
        total += s.logits.data[static_cast<std::size_t>(s.token)] - mx - std::log(sum);
    }
    return total;
}

} // namespace

TEST_CASE("word_logits: constructed maximum and uniform cases") {
    ModelConfig cfg = tiny_config();
    Model m(cfg, 1);
    Rng rng(2);
    Tensor memory = random_row(8, rng);

    SUBCASE("row aligned with the memory wins the argmax") {
        double norm_sq = 0.0;
        for (double v : memory.data) norm_sq += v * v;
        for (double& v : m.word_head().weight.value.data) v = 0.0;
        for (double& v : m.word_head().bias->value.data) v = 0.0;
        const int target = 7;
        for (int j = 0; j < 8; ++j) {
            m.word_head().weight.value.at(target, j) =
                memory.data[static_cast<std::size_t>(j)] / norm_sq;
        }
        const Tensor logits = word_logits_value(memory, m);
        int best = 0;
        for (int j = 1; j < cfg.vocab; ++j) {
            if (logits.data[static_cast<std::size_t>(j)] >
                logits.data[static_cast<std::size_t>(best)]) {
                best = j;
            }
        }
        CHECK(best == target);
        CHECK(logits.data[static_cast<std::size_t>(target)] == doctest::Approx(1.0));
    }

    SUBCASE("zero memory and bias give uniform probabilities") {
        for (double& v : m.word_head().bias->value.data) v = 0.0;
        const Tensor logits = word_logits_value(Tensor::zeros({1, 8}), m);
        Graph g;
        const Tensor probs = g.value(g.softmax_rows(g.constant(logits)));
        for (double v : probs.data) {
            CHECK(v == doctest::Approx(1.0 / cfg.vocab).epsilon(1e-12));
        }
    }

    SUBCASE("logits length equals the vocabulary size") {
        const Tensor logits = word_logits_value(memory, m);
        CHECK(logits.shape == std::vector<int>{1, cfg.vocab});
    }
}

TEST_CASE("teacher forcing emits one logits row per target and is deterministic") {
    Model m(tiny_config(), 3);
    Rng rng(4);
    const Tensor v = random_row(8, rng);
    const std::vector<int> targets = {5, 9, 4, 12, Vocabulary::kEnd};

    auto run = [&] {
        Graph g;
        BoundModel bm = bind_model(g, m);
        DecodeNodes nodes = decode_teacher_forced(g, bm, m, g.constant(v), targets);
        return nodes.to_trace(g);
    };
    const DecodeTrace a = run();
    const DecodeTrace b = run();
    CHECK(a.steps.size() == targets.size());
    CHECK(a.memories.size() == targets.size() + 1);
    for (std::size_t t = 0; t < a.steps.size(); ++t) {
        CHECK(a.steps[t].logits.data == b.steps[t].logits.data);
        CHECK(a.steps[t].fm_attention.size() == 2);
        CHECK(a.steps[t].rm_attention.size() == 2);
    }
}

TEST_CASE("teacher forcing requires a terminated target sequence") {
    Model m(tiny_config(), 3);
    Graph g;
    BoundModel bm = bind_model(g, m);
    Graph::Node v = g.constant(Tensor::zeros({1, 8}));
    CHECK_THROWS_AS(decode_teacher_forced(g, bm, m, v, {5, 9}), ContractError);
    CHECK_THROWS_AS(decode_teacher_forced(g, bm, m, v, {}), ContractError);
}

TEST_CASE("teacher-forced cross-entropy gradients match central differences") {
    Model m(tiny_config(20), 42);
    Rng rng(43);
    const Tensor v = random_row(8, rng);
    const std::vector<int> targets = {7, 11, 3, Vocabulary::kEnd};
    auto loss_fn = [&](bool with_grad) {
        Graph g;
        BoundModel bm = bind_model(g, m);
        DecodeNodes nodes = decode_teacher_forced(g, bm, m, g.constant(v), targets);
        Graph::Node loss = g.scale(xe_loss(g, nodes.logits, targets), 0.05);
        if (with_grad) g.backward(loss);
        return g.value(loss).data[0];
    };
    GradCheckReport report = grad_check(loss_fn, m.parameters());
    CHECK(report.usable);
    CHECK(report.max_rel_error < 1e-4);
}

TEST_CASE("greedy decoding stops at the end token and excludes it") {
    Model m(tiny_config(), 5);
    // A huge end-token bias forces an immediate stop.
    m.word_head().bias->value.data[Vocabulary::kEnd] = 1000.0;
    Rng rng(6);
    const GreedyResult r = decode_greedy_value(m, random_row(8, rng), 16);
    CHECK(r.caption.empty());
    CHECK(r.trace.steps.size() == 1);
    CHECK(r.trace.steps[0].token == Vocabulary::kEnd);
    CHECK(r.trace.memories.size() == 2);
}

TEST_CASE("greedy decoding caps at max_len when the end token never wins") {
    Model m(tiny_config(), 7);
    m.word_head().bias->value.data[Vocabulary::kEnd] = -1000.0;
    Rng rng(8);
    const GreedyResult r = decode_greedy_value(m, random_row(8, rng), 5);
    CHECK(r.trace.steps.size() == 5);
    CHECK(r.caption.size() == 5);
}

TEST_CASE("beam width must be positive") {
    Model m(tiny_config(), 9);
    CHECK_THROWS_AS(beam_search(m, Tensor::zeros({1, 8}), 0, 4), ContractError);
}

TEST_CASE("beam width 1 equals greedy decoding on random models") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Model m(tiny_config(12), seed);
        Rng rng(seed + 10'000);
        const Tensor v = random_row(8, rng, 2.0);
        const GreedyResult greedy = decode_greedy_value(m, v, 8);
        const BeamResult beam = beam_search(m, v, 1, 8);
        CHECK(beam.caption == greedy.caption);
    }
}

TEST_CASE("exhaustive beam equals brute-force argmax on a tiny vocabulary") {
    // Vocabulary: the reserved tokens plus two words; max_len 2.
    const int vocab = 5;
    const int max_len = 2;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Model m(tiny_config(vocab), seed);
        Rng rng(seed + 20'000);
        const Tensor v = random_row(8, rng, 2.0);

        // Enumerate every legal emission: sequences that stop at their
        // first end token or run unfinished to max_len.
        std::vector<std::pair<std::vector<int>, double>> finished, unfinished;
        std::vector<std::pair<std::vector<int>, double>> frontier = {{{}, 0.0}};
        for (int step = 0; step < max_len; ++step) {
            std::vector<std::pair<std::vector<int>, double>> next;
            for (const auto& [prefix, base_logp] : frontier) {
                for (int w = 0; w < vocab; ++w) {
                    std::vector<int> tokens = prefix;
                    tokens.push_back(w);
                    std::vector<int> targets = tokens;
                    if (targets.back() != Vocabulary::kEnd) {
                        targets.push_back(Vocabulary::kEnd);
                    }
                    Graph g;
                    BoundModel bm = bind_model(g, m);
                    DecodeNodes nodes =
                        decode_teacher_forced(g, bm, m, g.constant(v), targets);
                    double total = 0.0;
                    for (std::size_t t = 0; t < tokens.size(); ++t) {
                        Graph::Node lsm = g.log_softmax_rows(nodes.logits[t]);
                        total += g.value(lsm).data[static_cast<std::size_t>(tokens[t])];
                    }
                    (void)base_logp;
                    if (tokens.back() == Vocabulary::kEnd) {
                        finished.emplace_back(tokens, total);
                    } else if (static_cast<int>(tokens.size()) == max_len) {
                        unfinished.emplace_back(tokens, total);
                    } else {
                        next.emplace_back(tokens, total);
                    }
                }
            }
            frontier = std::move(next);
        }
        const auto* pool = finished.empty() ? &unfinished : &finished;
        const auto best = *std::max_element(
            pool->begin(), pool->end(),
            [](const auto& a, const auto& b) { return a.second < b.second; });

        const BeamResult beam = beam_search(m, v, 1 << 10, max_len);
        std::vector<int> best_caption;
        for (int tok : best.first) {
            if (tok == Vocabulary::kEnd) break;
            best_caption.push_back(tok);
        }
        CHECK(beam.caption == best_caption);
        CHECK(beam.log_prob == doctest::Approx(best.second).epsilon(1e-9));
    }
}

TEST_CASE("beam search log-prob is at least the greedy log-prob") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Model m(tiny_config(12), seed + 100);
        Rng rng(seed + 30'000);
        const Tensor v = random_row(8, rng, 2.0);
        const GreedyResult greedy = decode_greedy_value(m, v, 8);
        const BeamResult beam = beam_search(m, v, 3, 8);
        CHECK(beam.log_prob >= sequence_log_prob(greedy.trace) - 1e-12);
    }
}

TEST_CASE("teacher forcing and greedy agree while the prefix matches") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Model m(tiny_config(12), seed + 200);
        Rng rng(seed + 40'000);
        const Tensor v = random_row(8, rng, 2.0);
        const GreedyResult greedy = decode_greedy_value(m, v, 6);

        // Using the greedy output as the target makes every prefix match,
        // so the logits must coincide step by step.
        std::vector<int> targets = greedy.trace.tokens();
        if (targets.back() != Vocabulary::kEnd) targets.push_back(Vocabulary::kEnd);
        Graph g;
        BoundModel bm = bind_model(g, m);
        DecodeNodes forced = decode_teacher_forced(g, bm, m, g.constant(v), targets);
        for (std::size_t t = 0; t < greedy.trace.steps.size(); ++t) {
            CHECK(g.value(forced.logits[t]).data == greedy.trace.steps[t].logits.data);
        }
    }
}

TEST_CASE("reconstruct: zeroed values and a closed input gate give a zero vector") {
    Model m(tiny_config(), 11);
    RmParams& rec = m.reconstructor_memory();
    for (Parameter& w : rec.value_w) std::fill(w.value.data.begin(), w.value.data.end(), 0.0);
    std::fill(rec.gate_input_w.value.data.begin(), rec.gate_input_w.value.data.end(), 0.0);
    std::fill(rec.gate_input_u.value.data.begin(), rec.gate_input_u.value.data.end(), 0.0);
    std::fill(rec.gate_input_b.value.data.begin(), rec.gate_input_b.value.data.end(), -100.0);

    Rng rng(12);
    const std::vector<Tensor> memories = {random_row(8, rng), random_row(8, rng),
                                          random_row(8, rng)};
    const Tensor recon = reconstruct_value(m, memories);
    for (double v : recon.data) CHECK(std::abs(v) < 1e-8);
}

TEST_CASE("reconstruct applies the unit once per recorded memory state") {
    Model m(tiny_config(), 13);
    Rng rng(14);
    const Tensor state = random_row(8, rng);

    const Tensor one = reconstruct_value(m, {state});
    const RmStepResult manual =
        rm_step_value(Tensor::zeros({1, 8}), state, m.reconstructor_memory());
    CHECK(one.data == manual.memory.data);

    CHECK_THROWS_AS(reconstruct_value(m, {}), ContractError);
}

TEST_CASE("reconstruction loss gradients match central differences") {
    // Seed chosen away from the layer-norm variance floor: instances whose
    // psi input variance sits near ln_eps put a max() kink inside the
    // finite-difference stencil, which no eps can certify.
    Model m(tiny_config(20), 18);
    Rng rng(19);
    const Tensor v = random_row(8, rng);
    const std::vector<int> targets = {4, 9, Vocabulary::kEnd};
    std::vector<Parameter*> params;
    m.reconstructor_memory().collect(params);
    auto loss_fn = [&](bool with_grad) {
        Graph g;
        BoundModel bm = bind_model(g, m);
        DecodeNodes nodes = decode_teacher_forced(g, bm, m, g.constant(v), targets);
        Graph::Node recon = reconstruct(g, bm, m, nodes.memories);
        Graph::Node loss = g.scale(rec_loss(g, g.constant(v), recon), 0.01);
        if (with_grad) g.backward(loss);
        return g.value(loss).data[0];
    };
    GradCheckReport report = grad_check(loss_fn, params);
    CHECK(report.usable);
    CHECK(report.max_rel_error < 1e-4);
}

TEST_CASE("attention trace export covers every step, head, and unit") {
    Model m(tiny_config(), 17);
    Vocabulary vocab;
    for (int i = 3; i < 20; ++i) vocab.add("w" + std::to_string(i));
    Rng rng(18);
    const GreedyResult r = decode_greedy_value(m, random_row(8, rng), 4);
    const std::string csv = attention_trace_csv(r.trace, vocab);
    CHECK(csv.rfind("step,token,unit,head", 0) == 0);
    std::size_t lines = 0;
    for (char c : csv) lines += c == '\n' ? 1 : 0;
    // Header plus (fm + rm) x heads rows per step.
    CHECK(lines == 1 + r.trace.steps.size() * 4);
}
