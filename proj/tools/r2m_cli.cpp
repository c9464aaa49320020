// Command-line front end: synthetic data generation, curriculum training,
// caption generation, evaluation, gradient checking, and attention export.
//
// Exit codes: 0 success, 1 usage/contract error, 2 data error, 3 numeric
// failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "r2m/errors.hpp"
#include "r2m/harness.hpp"

namespace fs = std::filesystem;
using namespace r2m;

namespace {

Dataset dataset_for_config(const TrainConfig& cfg) {
    if (cfg.data_dir.empty()) {
        throw DataError("config: data_dir is required for this command");
    }
    return load_dataset(cfg.data_dir);
}

// The vocabulary is written next to checkpoints at save time.
Vocabulary vocabulary_near(const std::string& ckpt_path, const std::string& override_path) {
    if (!override_path.empty()) return Vocabulary::load(override_path);
    const fs::path sibling = fs::path(ckpt_path).parent_path() / "vocabulary.tsv";
    return Vocabulary::load(sibling.string());
}

struct LoadedModel {
    ModelConfig cfg;
    std::unique_ptr<Model> model;
};

LoadedModel model_from_checkpoint(const std::string& ckpt_path) {
    const Checkpoint ckpt = load_checkpoint(ckpt_path);
    LoadedModel out;
    out.cfg = Model::config_from_checkpoint(ckpt);
    out.model = std::make_unique<Model>(out.cfg, 0);
    out.model->load_parameters(ckpt);
    return out;
}

int run_synth_data(const std::string& grammar_path, const std::string& out_dir,
                   std::uint64_t seed, int n_corpus, int n_images, int feature_dim,
                   double noise_sigma) {
    const Grammar grammar =
        grammar_path.empty() ? default_grammar() : load_grammar(grammar_path);
    SynthOptions opt;
    opt.n_corpus = n_corpus;
    opt.n_images = n_images;
    opt.feature_dim = feature_dim;
    opt.noise_sigma = noise_sigma;
    const Dataset ds = synth_dataset(grammar, opt, seed);
    save_dataset(ds, out_dir);
    std::cout << "wrote " << ds.corpus.size() << " sentences, " << ds.images.size()
              << " images, vocabulary of " << ds.vocab.size() << " to " << out_dir << "\n";
    return 0;
}

int run_train(const std::string& config_path, const std::string& stage_arg,
              const std::string& resume_path, bool allow_out_of_order) {
    TrainConfig cfg = load_train_config(config_path);
    Dataset ds = dataset_for_config(cfg);

    std::unique_ptr<Trainer> trainer;
    if (!resume_path.empty()) {
        trainer = Trainer::resume(cfg, std::move(ds), resume_path);
    } else {
        trainer = std::make_unique<Trainer>(cfg, std::move(ds));
    }

    std::vector<int> stages;
    if (stage_arg == "all") {
        stages = {1, 2, 3, 4};
    } else if (stage_arg == "1" || stage_arg == "2" || stage_arg == "3" || stage_arg == "4") {
        stages = {stage_arg[0] - '0'};
    } else {
        throw ContractError("train: --stage must be 1, 2, 3, 4, or all");
    }
    for (int stage : stages) {
        const StageResult r = trainer->run_stage(stage, allow_out_of_order);
        std::cout << "stage " << stage << ": " << r.epoch_losses.size()
                  << " epochs, final loss "
                  << (r.epoch_losses.empty() ? 0.0 : r.epoch_losses.back()) << "\n";
    }
    const fs::path final_path = fs::path(cfg.out_dir) / "model.ckpt";
    fs::create_directories(cfg.out_dir);
    trainer->save(final_path.string());
    std::cout << "checkpoint: " << final_path.string() << "\n";
    return 0;
}

int run_generate(const std::string& ckpt_path, const std::string& features_path, int beam,
                 int max_len, double threshold, const std::string& vocab_path,
                 const std::string& out_path) {
    LoadedModel lm = model_from_checkpoint(ckpt_path);
    const Vocabulary vocab = vocabulary_near(ckpt_path, vocab_path);

    // Detections and the concept dictionary live next to the feature file.
    const fs::path dir = fs::path(features_path).parent_path();
    const fs::path stem = fs::path(features_path).stem();
    const std::vector<ConceptSet> detections =
        load_detections((dir / (stem.string() + ".detections")).string(), vocab);
    std::unordered_set<int> dictionary;
    for (const std::string& tok : load_dictionary((dir / "dictionary.txt").string())) {
        dictionary.insert(vocab.id_of(tok));
    }

    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path, std::ios::trunc);
        if (!file) throw DataError("generate: cannot open '" + out_path + "' for writing");
        os = &file;
    }
    for (const ConceptSet& detected : detections) {
        const ConceptSet concepts = filter_concepts(detected, dictionary, threshold);
        Tensor v;
        {
            Graph g;
            BoundModel bm = bind_model(g, *lm.model);
            v = g.value(encode_concepts(g, concept_order(concepts, 0), bm.embedding,
                                        bm.encoder, lm.cfg.dim));
        }
        const BeamResult beam_result = beam_search(*lm.model, v, beam, max_len);
        const std::vector<std::string> tokens = vocab.decode(beam_result.caption);
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (i) *os << ' ';
            *os << tokens[i];
        }
        *os << '\n';
    }
    return 0;
}

int run_evaluate(const std::string& ckpt_path, const std::string& split_path, int beam,
                 const std::string& config_path) {
    TrainConfig cfg;
    if (!config_path.empty()) cfg = load_train_config(config_path);
    // Data files live in the split file's directory.
    cfg.data_dir = fs::path(split_path).parent_path().string();
    if (cfg.data_dir.empty()) cfg.data_dir = ".";
    cfg.out_dir.clear();
    Dataset ds = load_dataset(cfg.data_dir);
    auto trainer = Trainer::resume(cfg, std::move(ds), ckpt_path);
    const std::vector<int> indices = load_split(split_path);
    const EvalReport report =
        trainer->evaluate_images(indices, beam > 0 ? beam : cfg.beam_width);
    std::cout << report.to_key_values();
    return 0;
}

int run_gradcheck(const std::string& config_path, std::uint64_t seed) {
    ModelConfig cfg;
    cfg.dim = 8;
    cfg.heads = 2;
    cfg.fm_key_dim = 4;
    cfg.fm_value_dim = 4;
    cfg.rm_key_dim = 4;
    cfg.rm_value_dim = 4;
    cfg.vocab = 20;
    cfg.feature_dim = 8;
    double beta = 1.0, gamma = 1.0, margin = 0.2;
    if (!config_path.empty()) {
        const TrainConfig tc = load_train_config(config_path);
        beta = tc.beta;
        gamma = tc.gamma;
        margin = tc.margin;
    }
    const GradCheckReport report = gradcheck_model(cfg, beta, gamma, margin, seed);
    if (!report.usable) {
        std::cout << "gradcheck: closure is not deterministic; report unusable\n";
        return 3;
    }
    // One line per parameter group with the worst relative error in it.
    std::map<std::string, double> group_worst;
    for (const GradCheckEntry& e : report.entries) {
        double& worst = group_worst[gradcheck_group(e.param)];
        worst = std::max(worst, e.max_rel_error);
    }
    bool all_ok = true;
    for (const auto& [group, worst] : group_worst) {
        const bool ok = worst < 1e-4;
        all_ok = all_ok && ok;
        std::cout << group << ": max_rel_error=" << worst << (ok ? " ok" : " FAIL") << "\n";
    }
    std::cout << "overall: max_rel_error=" << report.max_rel_error
              << (all_ok ? " ok" : " FAIL") << "\n";
    return all_ok ? 0 : 3;
}

int run_export_attention(const std::string& ckpt_path, const std::string& sentence,
                         const std::string& vocab_path, const std::string& out_path) {
    LoadedModel lm = model_from_checkpoint(ckpt_path);
    const Vocabulary vocab = vocabulary_near(ckpt_path, vocab_path);

    const std::vector<std::string> tokens = tokenize(sentence);
    if (tokens.empty()) throw ContractError("export-attention: empty sentence");
    std::vector<int> targets = vocab.encode(tokens);
    targets.push_back(Vocabulary::kEnd);

    // Concepts come from the sentence itself, as in corpus training.
    ConceptSet concepts;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const int id = targets[i];
        if (id != Vocabulary::kUnk) concepts.add(id, 1.0);
    }

    Graph g;
    BoundModel bm = bind_model(g, *lm.model);
    Graph::Node v = encode_concepts(g, concept_order(concepts, 0), bm.embedding, bm.encoder,
                                    lm.cfg.dim);
    const DecodeNodes nodes = decode_teacher_forced(g, bm, *lm.model, v, targets);
    const std::string csv = attention_trace_csv(nodes.to_trace(g), vocab);

    if (out_path.empty()) {
        std::cout << csv;
    } else {
        std::ofstream os(out_path, std::ios::trunc);
        if (!os) throw DataError("export-attention: cannot open '" + out_path + "'");
        os << csv;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"recurrent relational memory concepts-to-sentence toolkit"};
    app.require_subcommand(1);

    auto* synth = app.add_subcommand("synth-data", "generate a synthetic dataset");
    std::string grammar_path, out_dir = "data";
    std::uint64_t synth_seed = 0;
    int n_corpus = 2000, n_images = 500, feature_dim = 64;
    double noise_sigma = 0.05;
    synth->add_option("--grammar", grammar_path, "grammar file (built-in when omitted)");
    synth->add_option("--out", out_dir, "output directory")->required();
    synth->add_option("--seed", synth_seed, "generation seed");
    synth->add_option("--n-corpus", n_corpus, "number of corpus sentences");
    synth->add_option("--n-images", n_images, "number of synthetic images");
    synth->add_option("--feature-dim", feature_dim, "image feature width");
    synth->add_option("--noise-sigma", noise_sigma, "feature noise scale");

    auto* train = app.add_subcommand("train", "run the training curriculum");
    std::string train_config, stage = "all", resume_path;
    bool allow_out_of_order = false;
    train->add_option("--config", train_config, "train config file")->required();
    train->add_option("--stage", stage, "1|2|3|4|all");
    train->add_option("--resume", resume_path, "checkpoint to resume from");
    train->add_flag("--allow-out-of-order", allow_out_of_order,
                    "skip the stage-order check");

    auto* generate = app.add_subcommand("generate", "caption image feature files");
    std::string gen_ckpt, gen_features, gen_vocab, gen_out;
    int gen_beam = 3, gen_max_len = 16;
    double gen_threshold = 0.3;
    generate->add_option("--ckpt", gen_ckpt, "checkpoint path")->required();
    generate->add_option("--features", gen_features, "feature file path")->required();
    generate->add_option("--beam", gen_beam, "beam width");
    generate->add_option("--max-len", gen_max_len, "maximum caption length");
    generate->add_option("--threshold", gen_threshold, "concept score threshold");
    generate->add_option("--vocab", gen_vocab, "vocabulary file override");
    generate->add_option("--out", gen_out, "write captions here instead of stdout");

    auto* evaluate = app.add_subcommand("evaluate", "score a split with BLEU and recall");
    std::string eval_ckpt, eval_split, eval_config;
    int eval_beam = 0;
    evaluate->add_option("--ckpt", eval_ckpt, "checkpoint path")->required();
    evaluate->add_option("--split", eval_split, "split index file")->required();
    evaluate->add_option("--beam", eval_beam, "beam width override");
    evaluate->add_option("--config", eval_config, "train config for eval settings");

    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient check");
    std::string gc_config;
    std::uint64_t gc_seed = 0;
    gradcheck->add_option("--config", gc_config, "train config (beta/gamma/margin)");
    gradcheck->add_option("--seed", gc_seed, "scenario seed");

    auto* export_att = app.add_subcommand("export-attention",
                                          "CSV of attention weights for one sentence");
    std::string att_ckpt, att_sentence, att_vocab, att_out;
    export_att->add_option("--ckpt", att_ckpt, "checkpoint path")->required();
    export_att->add_option("--sentence", att_sentence, "space-separated tokens")->required();
    export_att->add_option("--vocab", att_vocab, "vocabulary file override");
    export_att->add_option("--out", att_out, "write the CSV here instead of stdout");

    try {
        app.parse(argc, argv);
        if (synth->parsed()) {
            return run_synth_data(grammar_path, out_dir, synth_seed, n_corpus, n_images,
                                  feature_dim, noise_sigma);
        }
        if (train->parsed()) {
            return run_train(train_config, stage, resume_path, allow_out_of_order);
        }
        if (generate->parsed()) {
            return run_generate(gen_ckpt, gen_features, gen_beam, gen_max_len, gen_threshold,
                                gen_vocab, gen_out);
        }
        if (evaluate->parsed()) {
            return run_evaluate(eval_ckpt, eval_split, eval_beam, eval_config);
        }
        if (gradcheck->parsed()) {
            return run_gradcheck(gc_config, gc_seed);
        }
        if (export_att->parsed()) {
            return run_export_attention(att_ckpt, att_sentence, att_vocab, att_out);
        }
        std::cerr << "no subcommand\n";
        return 1;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const ContractError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 3;
    }
}
