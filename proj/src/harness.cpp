#include "r2m/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "r2m/errors.hpp"
#include "r2m/losses.hpp"

namespace r2m {

std::vector<std::vector<int>> make_batches(int n_items, int batch_size, std::uint64_t seed,
                                           bool drop_small) {
    if (n_items < 1) throw ContractError("make_batches: empty dataset");
    if (batch_size < 1) throw ContractError("make_batches: batch_size must be at least 1");
    if (drop_small && batch_size < 2) {
        throw ContractError("make_batches: image stages need batch_size >= 2");
    }
    std::vector<int> order(static_cast<std::size_t>(n_items));
    for (int i = 0; i < n_items; ++i) order[static_cast<std::size_t>(i)] = i;
    Rng rng(seed);
    rng.shuffle(order);
    std::vector<std::vector<int>> batches;
    for (int start = 0; start < n_items; start += batch_size) {
        const int end = std::min(n_items, start + batch_size);
        batches.emplace_back(order.begin() + start, order.begin() + end);
    }
    if (drop_small && !batches.empty() && batches.back().size() < 2) batches.pop_back();
    return batches;
}

std::vector<int> sentence_to_targets(const std::vector<std::string>& sentence,
                                     const Vocabulary& vocab) {
    std::vector<int> targets = vocab.encode(sentence);
    targets.push_back(Vocabulary::kEnd);
    return targets;
}

Trainer::Trainer(const TrainConfig& cfg, Dataset dataset)
    : cfg_(cfg), dataset_(std::move(dataset)) {
    cfg_.validate();
    cfg_.model.vocab = dataset_.vocab.size();
    model_ = std::make_unique<Model>(cfg_.model, cfg_.seed);
}

std::uint64_t Trainer::order_seed(int stage, int epoch, int sample) const {
    return mix_seed(mix_seed(mix_seed(cfg_.seed, static_cast<std::uint64_t>(stage)),
                             static_cast<std::uint64_t>(epoch)),
                    static_cast<std::uint64_t>(sample));
}

ConceptSet Trainer::image_concepts(int index) const {
    const SyntheticImage& img = dataset_.images.at(static_cast<std::size_t>(index));
    return filter_concepts(img.detections, dataset_.dictionary, cfg_.concept_threshold);
}

double Trainer::train_corpus_batch(const std::vector<int>& batch, int stage, int epoch,
                                   AdamState& adam) {
    model_->zero_grads();
    double loss_sum = 0.0;
    const double inv_batch = 1.0 / static_cast<double>(batch.size());
    for (int idx : batch) {
        const auto& sentence = dataset_.corpus.at(static_cast<std::size_t>(idx));
        const std::vector<int> targets = sentence_to_targets(sentence, dataset_.vocab);
        const ConceptSet concepts =
            extract_concepts(sentence, dataset_.vocab, dataset_.dictionary);

        Graph g;
        BoundModel bm = bind_model(g, *model_);
        Graph::Node v = encode_concepts(g, concept_order(concepts, order_seed(stage, epoch, idx)),
                                        bm.embedding, bm.encoder, cfg_.model.dim);
        DecodeNodes decode = decode_teacher_forced(g, bm, *model_, v, targets);
        Graph::Node loss = xe_loss(g, decode.logits, targets);
        if (stage == 2 && cfg_.beta > 0.0) {
            Graph::Node recon = reconstruct(g, bm, *model_, decode.memories);
            loss = g.add(loss, g.scale(rec_loss(g, v, recon), cfg_.beta));
        }
        const double value = g.value(loss).data[0];
        if (!std::isfinite(value)) throw NumericError("training: non-finite corpus loss");
        loss_sum += value;
        g.backward(g.scale(loss, inv_batch));
    }
    adam.step(model_->parameters());
    return loss_sum * inv_batch;
}

double Trainer::train_image_batch(const std::vector<int>& batch, int stage, int epoch,
                                  AdamState& adam) {
    model_->zero_grads();
    Graph g;
    BoundModel bm = bind_model(g, *model_);

    Tensor features = Tensor::zeros({static_cast<int>(batch.size()), cfg_.model.feature_dim});
    std::vector<Graph::Node> encodings, recons;
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const int idx = batch[b];
        const SyntheticImage& img = dataset_.images.at(static_cast<std::size_t>(idx));
        if (img.feature.cols() != cfg_.model.feature_dim) {
            throw DataError("training: feature width " + std::to_string(img.feature.cols()) +
                            " does not match configured feature_dim " +
                            std::to_string(cfg_.model.feature_dim));
        }
        for (int j = 0; j < cfg_.model.feature_dim; ++j) {
            features.at(static_cast<int>(b), j) = img.feature.data[static_cast<std::size_t>(j)];
        }
        Graph::Node v = encode_concepts(
            g, concept_order(image_concepts(idx), order_seed(stage, epoch, idx)),
            bm.embedding, bm.encoder, cfg_.model.dim);
        // Token choices are value-level argmaxes; gradients reach the
        // reconstruction through the continuous memory chain.
        DecodeNodes decode = decode_greedy(g, bm, *model_, v, cfg_.max_len);
        encodings.push_back(v);
        recons.push_back(reconstruct(g, bm, *model_, decode.memories));
    }

    Graph::Node sims = similarity_matrix(g, g.constant(features), bm.similarity_proj, recons,
                                         cfg_.model.cosine_similarity);
    Graph::Node loss = triplet_loss(g, sims, cfg_.margin);
    if (stage == 4 && cfg_.gamma > 0.0) {
        std::vector<Graph::Node> rec_terms;
        for (std::size_t b = 0; b < batch.size(); ++b) {
            rec_terms.push_back(rec_loss(g, encodings[b], recons[b]));
        }
        loss = g.add(loss, g.scale(g.mean_all(g.concat_cols(rec_terms)), cfg_.gamma));
    }
    const double value = g.value(loss).data[0];
    if (!std::isfinite(value)) throw NumericError("training: non-finite image loss");
    g.backward(loss);
    adam.step(trainable_params(stage));
    return value;
}

std::vector<Parameter*> Trainer::trainable_params(int stage) {
    std::vector<Parameter*> params = model_->parameters();
    if (stage < 3) return params;
    const std::string& mode = stage == 3 ? cfg_.stage3_update : cfg_.stage4_update;
    if (mode == "all") return params;
    const auto is_encoder = [](const Parameter* p) {
        return p->name.rfind("embedding/", 0) == 0 || p->name.rfind("encoder/", 0) == 0;
    };
    const auto is_similarity = [](const Parameter* p) {
        return p->name.rfind("similarity/", 0) == 0;
    };
    if (mode == "encoder") {
        std::erase_if(params, [&](Parameter* p) { return !is_encoder(p); });
    } else if (mode == "gates") {
        std::erase_if(params, [&](Parameter* p) {
            return p->name.find("/gate_") == std::string::npos;
        });
    } else if (mode == "lstm") {
        std::erase_if(params, [&](Parameter* p) {
            return p->name.rfind("encoder/", 0) != 0;
        });
    } else if (mode == "similarity") {
        std::erase_if(params, [&](Parameter* p) { return !is_similarity(p); });
    } else {  // memory
        std::erase_if(params, [&](Parameter* p) { return is_encoder(p); });
    }
    return params;
}

StageResult Trainer::run_stage(int stage, bool allow_out_of_order) {
    if (stage < 1 || stage > 4) {
        throw ContractError("run_stage: stage " + std::to_string(stage) + " out of range");
    }
    if (!allow_out_of_order && completed_stage_ < stage - 1) {
        throw ContractError("run_stage: stage " + std::to_string(stage) +
                            " requested but only stage " + std::to_string(completed_stage_) +
                            " is complete (pass allow_out_of_order to override)");
    }
    const bool corpus_stage = stage <= 2;
    const std::vector<int>& indices =
        corpus_stage ? dataset_.corpus_split.train : dataset_.image_split.train;
    if (indices.empty()) throw DataError("run_stage: empty training split");

    AdamState adam(cfg_.lr_for_stage(stage));
    StageResult result;
    result.stage = stage;
    const int epochs = cfg_.epochs_for_stage(stage);
    for (int epoch = 0; epoch < epochs; ++epoch) {
        const std::uint64_t shuffle_seed =
            mix_seed(mix_seed(cfg_.seed, 1000 + static_cast<std::uint64_t>(stage)),
                     static_cast<std::uint64_t>(epoch));
        const auto batches = make_batches(static_cast<int>(indices.size()), cfg_.batch_size,
                                          shuffle_seed, !corpus_stage);
        double epoch_loss = 0.0;
        double samples = 0.0;
        for (const auto& batch_positions : batches) {
            std::vector<int> batch;
            batch.reserve(batch_positions.size());
            for (int pos : batch_positions) batch.push_back(indices[static_cast<std::size_t>(pos)]);
            const double mean_loss = corpus_stage
                                         ? train_corpus_batch(batch, stage, epoch, adam)
                                         : train_image_batch(batch, stage, epoch, adam);
            result.batch_losses.push_back(mean_loss);
            epoch_loss += mean_loss * static_cast<double>(batch.size());
            samples += static_cast<double>(batch.size());
        }
        epoch_loss /= samples;
        result.epoch_losses.push_back(epoch_loss);
        if (!cfg_.out_dir.empty()) {
            std::filesystem::create_directories(cfg_.out_dir);
            Checkpoint ckpt = model_->to_checkpoint();
            ckpt.put_scalar("meta/completed_stage", completed_stage_);
            ckpt.put_scalar("meta/epoch", epoch + 1);
            save_checkpoint(ckpt, (std::filesystem::path(cfg_.out_dir) /
                                   ("stage" + std::to_string(stage) + ".ckpt"))
                                      .string());
        }
        if (epoch_callback_ && !epoch_callback_(epoch, epoch_loss)) break;
    }
    completed_stage_ = std::max(completed_stage_, stage);
    if (!cfg_.out_dir.empty()) {
        save((std::filesystem::path(cfg_.out_dir) / ("stage" + std::to_string(stage) + ".ckpt"))
                 .string());
        std::ofstream curve((std::filesystem::path(cfg_.out_dir) /
                             ("stage" + std::to_string(stage) + "_loss.txt"))
                                .string(),
                            std::ios::trunc);
        curve.precision(17);
        for (double l : result.epoch_losses) curve << l << '\n';
    }
    return result;
}

std::vector<StageResult> Trainer::run_all() {
    std::vector<StageResult> results;
    for (int stage = 1; stage <= 4; ++stage) results.push_back(run_stage(stage));
    return results;
}

EvalReport Trainer::evaluate_images(const std::vector<int>& indices, int beam_width) {
    if (indices.empty()) throw ContractError("evaluate: empty index list");
    EvalReport report;
    std::vector<std::vector<std::string>> captions;
    std::vector<std::vector<std::vector<std::string>>> references;
    std::vector<std::vector<std::string>> concept_tokens;
    for (int idx : indices) {
        const SyntheticImage& img = dataset_.images.at(static_cast<std::size_t>(idx));
        const ConceptSet concepts = image_concepts(idx);
        Tensor v;
        {
            Graph g;
            BoundModel bm = bind_model(g, *model_);
            v = g.value(encode_concepts(g, concept_order(concepts, 0), bm.embedding,
                                        bm.encoder, cfg_.model.dim));
        }
        const BeamResult beam = beam_search(*model_, v, beam_width, cfg_.max_len);
        captions.push_back(dataset_.vocab.decode(beam.caption));
        references.push_back({img.sentence});
        // Recall is scored against the concepts actually in the image (its
        // latent sentence), not the noisy detections the encoder consumed.
        const ConceptSet truth =
            extract_concepts(img.sentence, dataset_.vocab, dataset_.dictionary);
        std::vector<std::string> tokens;
        for (int id : truth.ids()) tokens.push_back(dataset_.vocab.token_of(id));
        concept_tokens.push_back(std::move(tokens));
    }
    report.bleu1 = bleu_n(captions, references, 1);
    report.bleu2 = bleu_n(captions, references, 2);
    report.bleu3 = bleu_n(captions, references, 3);
    report.bleu4 = bleu_n(captions, references, 4);
    report.concept_recall = concept_recall(captions, concept_tokens);
    report.captions = std::move(captions);
    return report;
}

std::vector<std::string> Trainer::greedy_caption_for_sentence(
    const std::vector<std::string>& sentence) {
    const ConceptSet concepts = extract_concepts(sentence, dataset_.vocab, dataset_.dictionary);
    Tensor v;
    {
        Graph g;
        BoundModel bm = bind_model(g, *model_);
        v = g.value(encode_concepts(g, concept_order(concepts, 0), bm.embedding, bm.encoder,
                                    cfg_.model.dim));
    }
    const GreedyResult r = decode_greedy_value(*model_, v, cfg_.max_len);
    return dataset_.vocab.decode(r.caption);
}

double Trainer::mean_xe(const std::vector<int>& corpus_indices) {
    if (corpus_indices.empty()) throw ContractError("mean_xe: empty index list");
    double sum = 0.0;
    for (int idx : corpus_indices) {
        const auto& sentence = dataset_.corpus.at(static_cast<std::size_t>(idx));
        const std::vector<int> targets = sentence_to_targets(sentence, dataset_.vocab);
        const ConceptSet concepts =
            extract_concepts(sentence, dataset_.vocab, dataset_.dictionary);
        Graph g;
        BoundModel bm = bind_model(g, *model_);
        Graph::Node v = encode_concepts(g, concept_order(concepts, 0), bm.embedding,
                                        bm.encoder, cfg_.model.dim);
        DecodeNodes decode = decode_teacher_forced(g, bm, *model_, v, targets);
        sum += g.value(xe_loss(g, decode.logits, targets)).data[0];
    }
    return sum / static_cast<double>(corpus_indices.size());
}

double Trainer::mean_rec(const std::vector<int>& corpus_indices) {
    if (corpus_indices.empty()) throw ContractError("mean_rec: empty index list");
    double sum = 0.0;
    for (int idx : corpus_indices) {
        const auto& sentence = dataset_.corpus.at(static_cast<std::size_t>(idx));
        const std::vector<int> targets = sentence_to_targets(sentence, dataset_.vocab);
        const ConceptSet concepts =
            extract_concepts(sentence, dataset_.vocab, dataset_.dictionary);
        Graph g;
        BoundModel bm = bind_model(g, *model_);
        Graph::Node v = encode_concepts(g, concept_order(concepts, 0), bm.embedding,
                                        bm.encoder, cfg_.model.dim);
        DecodeNodes decode = decode_teacher_forced(g, bm, *model_, v, targets);
        Graph::Node recon = reconstruct(g, bm, *model_, decode.memories);
        sum += g.value(rec_loss(g, v, recon)).data[0];
    }
    return sum / static_cast<double>(corpus_indices.size());
}

void Trainer::save(const std::string& path) const {
    Checkpoint ckpt = model_->to_checkpoint();
    ckpt.put_scalar("meta/completed_stage", completed_stage_);
    save_checkpoint(ckpt, path);
    // The vocabulary travels next to the checkpoint so generation can run
    // without the original data directory.
    const std::filesystem::path vocab_path =
        std::filesystem::path(path).parent_path() / "vocabulary.tsv";
    dataset_.vocab.save(vocab_path.string());
}

std::unique_ptr<Trainer> Trainer::resume(const TrainConfig& cfg, Dataset dataset,
                                         const std::string& ckpt_path) {
    const Checkpoint ckpt = load_checkpoint(ckpt_path);
    auto trainer = std::make_unique<Trainer>(cfg, std::move(dataset));
    // Model structure comes from the checkpoint, not the caller's config.
    const ModelConfig stored = Model::config_from_checkpoint(ckpt);
    if (stored.vocab != trainer->cfg_.model.vocab) {
        throw DataError("resume: checkpoint vocabulary " + std::to_string(stored.vocab) +
                        " does not match dataset vocabulary " +
                        std::to_string(trainer->cfg_.model.vocab));
    }
    trainer->cfg_.model = stored;
    trainer->model_ = std::make_unique<Model>(stored, trainer->cfg_.seed);
    trainer->model_->load_parameters(ckpt);
    trainer->completed_stage_ = static_cast<int>(ckpt.get_scalar("meta/completed_stage"));
    return trainer;
}

std::string gradcheck_group(const std::string& param_name) {
    if (param_name.find("/gate_") != std::string::npos) return "gates";
    if (param_name.rfind("encoder/", 0) == 0) return "encoder_lstm";
    if (param_name.rfind("embedding/", 0) == 0) return "embedding";
    if (param_name.rfind("fusion/", 0) == 0) return "fusion_memory";
    if (param_name.rfind("decoder_rm/", 0) == 0) return "decoder_rm";
    if (param_name.rfind("reconstructor_rm/", 0) == 0) return "reconstructor_rm";
    if (param_name.rfind("word_head/", 0) == 0) return "word_head";
    if (param_name.rfind("similarity/", 0) == 0) return "similarity_proj";
    return "other";
}

GradCheckReport gradcheck_model(const ModelConfig& base, double beta, double gamma,
                                double margin, std::uint64_t seed, double eps) {
    ModelConfig cfg = base;
    Model model(cfg, seed);
    Rng rng(mix_seed(seed, 77));

    // Two synthetic samples: concept sets, teacher-forcing targets, and
    // image features. Batch of two gives the triplet loss its negatives.
    const int n_samples = 2;
    std::vector<std::vector<int>> concept_ids(n_samples);
    std::vector<std::vector<int>> targets(n_samples);
    Tensor features = Tensor::zeros({n_samples, cfg.feature_dim});
    for (int s = 0; s < n_samples; ++s) {
        const int n_concepts = 2 + rng.uniform_int(2);
        for (int c = 0; c < n_concepts; ++c) {
            concept_ids[static_cast<std::size_t>(s)].push_back(3 + rng.uniform_int(cfg.vocab - 3));
        }
        const int len = 3;
        for (int t = 0; t < len; ++t) {
            targets[static_cast<std::size_t>(s)].push_back(3 + rng.uniform_int(cfg.vocab - 3));
        }
        targets[static_cast<std::size_t>(s)].push_back(Vocabulary::kEnd);
        for (int j = 0; j < cfg.feature_dim; ++j) {
            features.at(s, j) = rng.gauss();
        }
    }

    auto loss_fn = [&](bool with_grad) {
        Graph g;
        BoundModel bm = bind_model(g, model);
        std::vector<Graph::Node> losses;
        std::vector<Graph::Node> recons, encodings;
        for (int s = 0; s < n_samples; ++s) {
            Graph::Node v = encode_concepts(g, concept_ids[static_cast<std::size_t>(s)],
                                            bm.embedding, bm.encoder, cfg.dim);
            DecodeNodes decode =
                decode_teacher_forced(g, bm, model, v, targets[static_cast<std::size_t>(s)]);
            Graph::Node recon = reconstruct(g, bm, model, decode.memories);
            Graph::Node sample_loss =
                g.add(xe_loss(g, decode.logits, targets[static_cast<std::size_t>(s)]),
                      g.scale(rec_loss(g, v, recon), beta));
            losses.push_back(sample_loss);
            recons.push_back(recon);
            encodings.push_back(v);
        }
        Graph::Node corpus_part = g.mean_all(g.concat_cols(losses));
        Graph::Node sims = similarity_matrix(g, g.constant(features), bm.similarity_proj,
                                             recons, cfg.cosine_similarity);
        Graph::Node image_part = triplet_loss(g, sims, margin);
        std::vector<Graph::Node> rec_terms;
        for (int s = 0; s < n_samples; ++s) {
            rec_terms.push_back(rec_loss(g, encodings[static_cast<std::size_t>(s)],
                                         recons[static_cast<std::size_t>(s)]));
        }
        Graph::Node loss = g.add(
            corpus_part,
            g.add(image_part, g.scale(g.mean_all(g.concat_cols(rec_terms)), gamma)));
        // Conditioning scale keeps finite-difference cancellation noise
        // below the relative-error floor; gradients scale uniformly.
        loss = g.scale(loss, 0.005);
        if (with_grad) g.backward(loss);
        return g.value(loss).data[0];
    };

    return grad_check(loss_fn, model.parameters(), eps);
}

} // namespace r2m
