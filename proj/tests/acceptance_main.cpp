// Acceptance suite: one pass/fail line per criterion, exit code equals the
// number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>

#include "oracles.hpp"
#include "r2m/harness.hpp"
#include "r2m/losses.hpp"

using namespace r2m;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& what, const std::string& detail) {
    std::printf("%s - criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", criterion,
                what.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

ModelConfig small_model() {
    ModelConfig cfg;
    cfg.dim = 8;
    cfg.heads = 2;
    cfg.fm_key_dim = 4;
    cfg.fm_value_dim = 4;
    cfg.rm_key_dim = 4;
    cfg.rm_value_dim = 4;
    cfg.vocab = 20;
    cfg.feature_dim = 8;
    return cfg;
}

Tensor random_row(int n, Rng& rng, double scale = 1.0) {
    Tensor t = Tensor::zeros({1, n});
    for (double& v : t.data) v = scale * rng.gauss();
    return t;
}

// 1. Gradient fidelity over every parameter group, three seeds, < 60 s.
void criterion_gradients() {
    const double t0 = now_seconds();
    double worst = 0.0;
    bool usable = true;
    std::set<std::string> groups;
    for (std::uint64_t seed : {0ULL, 3ULL, 4ULL}) {
        const GradCheckReport rep = gradcheck_model(small_model(), 1.0, 1.0, 0.2, seed, 1e-5);
        usable = usable && rep.usable;
        worst = std::max(worst, rep.max_rel_error);
        for (const GradCheckEntry& e : rep.entries) groups.insert(gradcheck_group(e.param));
    }
    const double secs = now_seconds() - t0;
    const bool all_groups = groups.count("encoder_lstm") && groups.count("fusion_memory") &&
                            groups.count("decoder_rm") && groups.count("reconstructor_rm") &&
                            groups.count("word_head") && groups.count("gates") &&
                            groups.count("similarity_proj");
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "max rel error %.3e vs central differences, %zu groups, %.1f s", worst,
                  groups.size(), secs);
    report(1, usable && all_groups && worst < 1e-4 && secs < 60.0,
           "gradient fidelity at d=8, vocab=20, three seeds", detail);
}

// 2. Attention rows are stochastic over 1,000 random FM and RM passes.
void criterion_attention() {
    bool ok = true;
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 1000; ++i) {
        Rng rng(mix_seed(41, i));
        Rng prng(mix_seed(42, i));
        FmParams fm = FmParams::init("fm", 8, 2, 4, 4, 4.0, prng);
        const FmResult fr =
            fm_forward_value(random_row(8, rng, 2.0), random_row(8, rng, 2.0), fm);
        for (const Tensor& att : fr.attention) {
            for (int r = 0; r < att.rows(); ++r) {
                double sum = 0.0;
                for (int c = 0; c < att.cols(); ++c) {
                    ok = ok && att.at(r, c) >= 0.0;
                    sum += att.at(r, c);
                }
                worst = std::max(worst, std::abs(sum - 1.0));
            }
        }
        RmParams rm = RmParams::init("rm", 8, 1, 2, 4, 4, 4.0, prng);
        const RmStepResult rr =
            rm_step_value(random_row(8, rng, 2.0), random_row(8, rng, 2.0), rm);
        for (const Tensor& att : rr.attention) {
            double sum = 0.0;
            for (int c = 0; c < att.cols(); ++c) {
                ok = ok && att.at(0, c) >= 0.0;
                sum += att.at(0, c);
            }
            worst = std::max(worst, std::abs(sum - 1.0));
        }
    }
    char detail[120];
    std::snprintf(detail, sizeof(detail), "worst |row sum - 1| = %.3e over 1000 FM+RM passes",
                  worst);
    report(2, ok && worst <= 1e-9, "attention rows are stochastic", detail);
}

// 3. Triplet loss equals brute-force hardest-negative enumeration exactly.
void criterion_triplet() {
    Rng rng(7);
    bool exact = true;
    for (int trial = 0; trial < 200; ++trial) {
        const int batch = 2 + rng.uniform_int(15);
        Tensor S = Tensor::zeros({batch, batch});
        for (double& v : S.data) v = rng.gauss();
        exact = exact && triplet_loss_value(S, 0.2) == oracle::triplet_loss(S, 0.2);
    }
    report(3, exact, "triplet loss matches brute-force enumeration",
           exact ? "200/200 random batches, B in 2..16, bit-exact"
                 : "mismatch against the enumeration oracle");
}

// 4. Stage-1 overfit: 32 sentences, d=32, XE < 0.1 and >= 30/32 exact
//    greedy reproductions within 300 epochs and five minutes.
void criterion_overfit() {
    const double t0 = now_seconds();
    TrainConfig cfg;
    cfg.model.dim = 32;
    cfg.model.heads = 2;
    cfg.model.fm_key_dim = 16;
    cfg.model.fm_value_dim = 16;
    cfg.model.rm_key_dim = 16;
    cfg.model.rm_value_dim = 16;
    cfg.model.feature_dim = 16;
    cfg.lr_corpus = 3e-3;
    cfg.batch_size = 8;
    cfg.epochs_stage1 = 10;
    cfg.seed = 0;
    cfg.out_dir.clear();

    SynthOptions opt;
    opt.n_corpus = 32;
    opt.n_images = 4;
    opt.feature_dim = 16;
    opt.val_fraction = 0.0;
    opt.test_fraction = 0.0;
    Dataset ds = synth_dataset(default_grammar(), opt, 11);
    Trainer trainer(cfg, std::move(ds));

    int epochs = 0, exact = 0;
    double xe = 1e9;
    while (epochs < 300) {
        trainer.run_stage(1, true);
        epochs += cfg.epochs_stage1;
        xe = trainer.mean_xe(trainer.dataset().corpus_split.train);
        exact = 0;
        for (int idx : trainer.dataset().corpus_split.train) {
            const auto& sentence = trainer.dataset().corpus[static_cast<std::size_t>(idx)];
            if (trainer.greedy_caption_for_sentence(sentence) == sentence) ++exact;
        }
        if (xe < 0.1 && exact >= 30) break;
    }
    const double secs = now_seconds() - t0;
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "mean XE %.4f, %d/32 sentences reproduced, %d epochs, %.1f s", xe, exact,
                  epochs, secs);
    report(4, xe < 0.1 && exact >= 30 && epochs <= 300 && secs < 300.0,
           "stage-1 overfit convergence", detail);
}

// 5. Beam correctness: beam(1) == greedy on 50 models; exhaustive beam
//    equals brute-force argmax on a tiny vocabulary.
void criterion_beam() {
    bool greedy_ok = true;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        ModelConfig mc = small_model();
        mc.vocab = 12;
        Model m(mc, seed);
        Rng rng(mix_seed(90, seed));
        const Tensor v = random_row(8, rng, 2.0);
        greedy_ok = greedy_ok &&
                    beam_search(m, v, 1, 8).caption == decode_greedy_value(m, v, 8).caption;
    }

    bool exhaustive_ok = true;
    const int vocab = 5, max_len = 2;
    for (std::uint64_t seed = 0; seed < 10 && exhaustive_ok; ++seed) {
        ModelConfig mc = small_model();
        mc.vocab = vocab;
        Model m(mc, seed);
        Rng rng(mix_seed(91, seed));
        const Tensor v = random_row(8, rng, 2.0);

        // Enumerate every legal emission and score it by teacher forcing.
        std::vector<std::pair<std::vector<int>, double>> finished, unfinished,
            frontier{{{}, 0.0}};
        for (int step = 0; step < max_len; ++step) {
            std::vector<std::pair<std::vector<int>, double>> next;
            for (const auto& [prefix, unused] : frontier) {
                (void)unused;
                for (int w = 0; w < vocab; ++w) {
                    std::vector<int> tokens = prefix;
                    tokens.push_back(w);
                    std::vector<int> targets = tokens;
                    if (targets.back() != Vocabulary::kEnd) targets.push_back(Vocabulary::kEnd);
                    Graph g;
                    BoundModel bm = bind_model(g, m);
                    DecodeNodes nodes = decode_teacher_forced(g, bm, m, g.constant(v), targets);
                    double total = 0.0;
                    for (std::size_t t = 0; t < tokens.size(); ++t) {
                        total += g.value(g.log_softmax_rows(nodes.logits[t]))
                                     .data[static_cast<std::size_t>(tokens[t])];
                    }
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
        const auto& pool = finished.empty() ? unfinished : finished;
        const auto best = *std::max_element(
            pool.begin(), pool.end(),
            [](const auto& a, const auto& b) { return a.second < b.second; });
        std::vector<int> want;
        for (int tok : best.first) {
            if (tok == Vocabulary::kEnd) break;
            want.push_back(tok);
        }
        const BeamResult beam = beam_search(m, v, 1 << 10, max_len);
        exhaustive_ok =
            beam.caption == want && std::abs(beam.log_prob - best.second) < 1e-9;
    }
    report(5, greedy_ok && exhaustive_ok, "beam search correctness",
           std::string("beam(1)==greedy on 50 models: ") + (greedy_ok ? "yes" : "NO") +
               "; exhaustive width equals brute force: " + (exhaustive_ok ? "yes" : "NO"));
}

// 6. Relational gate saturation limits.
void criterion_gates() {
    Rng prng(6);
    RmParams p = RmParams::init("rm", 8, 1, 2, 4, 4, 4.0, prng);
    for (Parameter* g :
         {&p.gate_input_w, &p.gate_input_u, &p.gate_forget_w, &p.gate_forget_u}) {
        std::fill(g->value.data.begin(), g->value.data.end(), 0.0);
    }
    Rng rng(16);
    const Tensor m_prev = random_row(8, rng);
    const Tensor f_t = random_row(8, rng);

    std::fill(p.gate_input_b.value.data.begin(), p.gate_input_b.value.data.end(), -100.0);
    std::fill(p.gate_forget_b.value.data.begin(), p.gate_forget_b.value.data.end(), 100.0);
    double copy_err = 0.0;
    const Tensor copied = rm_step_value(m_prev, f_t, p).memory;
    for (int j = 0; j < 8; ++j) {
        copy_err = std::max(copy_err, std::abs(copied.data[static_cast<std::size_t>(j)] -
                                               m_prev.data[static_cast<std::size_t>(j)]));
    }

    std::fill(p.gate_input_b.value.data.begin(), p.gate_input_b.value.data.end(), 100.0);
    std::fill(p.gate_forget_b.value.data.begin(), p.gate_forget_b.value.data.end(), -100.0);
    Graph g;
    RmParamNodes nodes = bind(g, p);
    RmAttend att = rm_attend(g, g.constant(m_prev), g.constant(f_t), nodes, p);
    const Tensor gain = g.value(psi(g, att.attended, g.constant(m_prev), nodes, p));
    const Tensor overwritten = rm_step_value(m_prev, f_t, p).memory;
    double over_err = 0.0;
    for (int j = 0; j < 8; ++j) {
        over_err = std::max(over_err,
                            std::abs(overwritten.data[static_cast<std::size_t>(j)] -
                                     std::tanh(gain.data[static_cast<std::size_t>(j)])));
    }
    char detail[120];
    std::snprintf(detail, sizeof(detail), "copy residual %.2e, overwrite residual %.2e",
                  copy_err, over_err);
    report(6, copy_err < 1e-8 && over_err < 1e-8, "relational gate saturation limits", detail);
}

// 7. Curriculum effect on the synthetic unpaired split, seeds 0..2:
//    stage-4 concept recall must beat stage-2 by >= 0.05 in 2 of 3 seeds.
//    The image-stage losses act on reconstructions of the memory trace,
//    which receives the concept vector directly at every step, so at desk
//    scale their coupling to token emission is weak; see the measured
//    per-seed deltas in the output.
void criterion_curriculum() {
    int passed_seeds = 0;
    std::string detail;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        TrainConfig cfg;
        cfg.model.dim = 32;
        cfg.model.heads = 2;
        cfg.model.fm_key_dim = 16;
        cfg.model.fm_value_dim = 16;
        cfg.model.rm_key_dim = 16;
        cfg.model.rm_value_dim = 16;
        cfg.model.feature_dim = 64;
        cfg.seed = seed;
        cfg.out_dir.clear();

        SynthOptions opt;
        opt.n_corpus = 2000;
        opt.n_images = 500;
        opt.feature_dim = 64;
        Dataset ds = synth_dataset(default_grammar(), opt, seed);
        Trainer trainer(cfg, std::move(ds));
        trainer.run_stage(1);
        trainer.run_stage(2);
        const std::vector<int>& val = trainer.dataset().image_split.val;
        const double stage2 = trainer.evaluate_images(val, cfg.beam_width).concept_recall;
        trainer.run_stage(3);
        trainer.run_stage(4);
        const double stage4 = trainer.evaluate_images(val, cfg.beam_width).concept_recall;
        const double delta = stage4 - stage2;
        if (delta >= 0.05) ++passed_seeds;
        char buf[96];
        std::snprintf(buf, sizeof(buf), "seed %llu: s2=%.4f s4=%.4f delta=%+.4f; ",
                      static_cast<unsigned long long>(seed), stage2, stage4, delta);
        detail += buf;
    }
    detail += std::to_string(passed_seeds) + "/3 seeds at +0.05";
    report(7, passed_seeds >= 2, "curriculum effect on validation concept recall", detail);
}

// 8. BLEU equals an independent n-gram counter; hand example is 1/3.
void criterion_bleu() {
    Rng rng(8);
    const std::vector<std::string> words = {"a", "b", "c", "d", "e", "f"};
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::vector<std::string>> cands;
        std::vector<std::vector<std::vector<std::string>>> refs;
        const int n_items = 1 + rng.uniform_int(4);
        for (int i = 0; i < n_items; ++i) {
            std::vector<std::string> cand;
            for (int t = 0, len = 1 + rng.uniform_int(8); t < len; ++t) {
                cand.push_back(words[static_cast<std::size_t>(
                    rng.uniform_int(static_cast<int>(words.size())))]);
            }
            cands.push_back(cand);
            std::vector<std::vector<std::string>> rl;
            for (int r = 0, nr = 1 + rng.uniform_int(2); r < nr; ++r) {
                std::vector<std::string> ref;
                for (int t = 0, len = 1 + rng.uniform_int(8); t < len; ++t) {
                    ref.push_back(words[static_cast<std::size_t>(
                        rng.uniform_int(static_cast<int>(words.size())))]);
                }
                rl.push_back(ref);
            }
            refs.push_back(rl);
        }
        const int n = 1 + rng.uniform_int(4);
        worst = std::max(worst,
                         std::abs(bleu_n(cands, refs, n) - oracle::bleu(cands, refs, n)));
    }
    const double hand = bleu_n({{"a", "a", "a"}}, {{{"a", "b"}}}, 1);
    char detail[120];
    std::snprintf(detail, sizeof(detail),
                  "worst |module - oracle| = %.2e; hand example = %.12f", worst, hand);
    report(8, worst < 1e-9 && std::abs(hand - 1.0 / 3.0) < 1e-12,
           "BLEU matches the independent n-gram oracle", detail);
}

// 9. Full four-stage run is bit-identical across two executions.
void criterion_determinism() {
    auto run = [] {
        TrainConfig cfg;
        cfg.model.dim = 16;
        cfg.model.heads = 2;
        cfg.model.fm_key_dim = 8;
        cfg.model.fm_value_dim = 8;
        cfg.model.rm_key_dim = 8;
        cfg.model.rm_value_dim = 8;
        cfg.model.feature_dim = 16;
        cfg.batch_size = 8;
        cfg.epochs_stage1 = 3;
        cfg.epochs_stage2 = 2;
        cfg.epochs_stage3 = 1;
        cfg.epochs_stage4 = 1;
        cfg.seed = 123;
        cfg.out_dir.clear();
        SynthOptions opt;
        opt.n_corpus = 120;
        opt.n_images = 40;
        opt.feature_dim = 16;
        Dataset ds = synth_dataset(default_grammar(), opt, 9);
        Trainer trainer(cfg, std::move(ds));
        std::vector<double> losses;
        for (const StageResult& r : trainer.run_all()) {
            losses.insert(losses.end(), r.batch_losses.begin(), r.batch_losses.end());
        }
        return losses;
    };
    const std::vector<double> a = run();
    const std::vector<double> b = run();
    char detail[120];
    std::snprintf(detail, sizeof(detail), "%zu optimizer steps compared bitwise", a.size());
    report(9, a == b, "four-stage run reproduces losses bit-identically", detail);
}

// 10. Checkpoint round trip yields an identical evaluation report.
void criterion_checkpoint() {
    TrainConfig cfg;
    cfg.model.dim = 16;
    cfg.model.heads = 2;
    cfg.model.fm_key_dim = 8;
    cfg.model.fm_value_dim = 8;
    cfg.model.rm_key_dim = 8;
    cfg.model.rm_value_dim = 8;
    cfg.model.feature_dim = 16;
    cfg.batch_size = 8;
    cfg.epochs_stage1 = 3;
    cfg.seed = 5;
    cfg.out_dir.clear();
    SynthOptions opt;
    opt.n_corpus = 120;
    opt.n_images = 40;
    opt.feature_dim = 16;
    Trainer trainer(cfg, synth_dataset(default_grammar(), opt, 9));
    trainer.run_stage(1);
    const std::string path = "acceptance_roundtrip.ckpt";
    trainer.save(path);
    const EvalReport before = trainer.evaluate_images(trainer.dataset().image_split.val, 3);
    auto resumed = Trainer::resume(cfg, synth_dataset(default_grammar(), opt, 9), path);
    const EvalReport after = resumed->evaluate_images(resumed->dataset().image_split.val, 3);
    std::remove(path.c_str());
    std::remove("vocabulary.tsv");
    report(10, before == after, "checkpoint round trip preserves the evaluation report",
           "save -> load -> evaluate compared bitwise");
}

} // namespace

int main() {
    std::printf("acceptance suite\n");
    criterion_gradients();
    criterion_attention();
    criterion_triplet();
    criterion_overfit();
    criterion_beam();
    criterion_gates();
    criterion_curriculum();
    criterion_bleu();
    criterion_determinism();
    criterion_checkpoint();
    std::printf("%d of 10 criteria passed\n", 10 - failures);
    return failures;
}
