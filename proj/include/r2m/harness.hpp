#pragma once

#include <functional>
#include <memory>

#include "r2m/adam.hpp"
#include "r2m/config.hpp"
#include "r2m/datakit.hpp"
#include "r2m/gradcheck.hpp"
#include "r2m/metrics.hpp"
#include "r2m/seq2seq.hpp"

namespace r2m {

// Seeded shuffle into contiguous batches. When drop_small is set (image
// stages), a trailing batch smaller than 2 is dropped because the triplet
// loss needs at least one negative.
std::vector<std::vector<int>> make_batches(int n_items, int batch_size, std::uint64_t seed,
                                           bool drop_small);

// Target token ids for a sentence: encoded tokens plus the end token.
std::vector<int> sentence_to_targets(const std::vector<std::string>& sentence,
                                     const Vocabulary& vocab);

struct StageResult {
    int stage = 0;
    std::vector<double> epoch_losses;  // mean per-sample loss per epoch
    std::vector<double> batch_losses;  // every optimizer step, in order
};

// Four-stage curriculum:
//   1: token cross-entropy on the corpus
//   2: cross-entropy + beta * sentence reconstruction on the corpus
//   3: triplet ranking on images
//   4: triplet + gamma * image reconstruction
// Stages 1-2 never read image features; stages 3-4 never read the corpus.
class Trainer {
public:
    Trainer(const TrainConfig& cfg, Dataset dataset);

    Model& model() { return *model_; }
    const TrainConfig& config() const { return cfg_; }
    const Dataset& dataset() const { return dataset_; }
    int completed_stage() const { return completed_stage_; }

    // Runs one stage for its configured epoch count. Stages must run in
    // order unless allow_out_of_order is set. Checkpoints are written per
    // epoch when the config has an out_dir.
    StageResult run_stage(int stage, bool allow_out_of_order = false);
    std::vector<StageResult> run_all();

    // Per-epoch hook; returning false stops the stage early.
    using EpochCallback = std::function<bool(int epoch, double mean_loss)>;
    void set_epoch_callback(EpochCallback cb) { epoch_callback_ = std::move(cb); }

    // Beam-decodes the given image indices and scores them against their
    // latent sentences. Deterministic: concept order uses seed 0.
    EvalReport evaluate_images(const std::vector<int>& indices, int beam_width);

    // Greedy caption for one corpus sentence's concepts (seed 0 order).
    std::vector<std::string> greedy_caption_for_sentence(
        const std::vector<std::string>& sentence);

    void save(const std::string& path) const;
    static std::unique_ptr<Trainer> resume(const TrainConfig& cfg, Dataset dataset,
                                           const std::string& ckpt_path);

    // Mean teacher-forced per-token cross-entropy over corpus indices.
    double mean_xe(const std::vector<int>& corpus_indices);
    // Mean sentence reconstruction loss over corpus indices.
    double mean_rec(const std::vector<int>& corpus_indices);

private:
    double train_corpus_batch(const std::vector<int>& batch, int stage, int epoch,
                              AdamState& adam);
    double train_image_batch(const std::vector<int>& batch, int stage, int epoch,
                             AdamState& adam);
    // All parameters, minus the encoder pathway in frozen image stages.
    std::vector<Parameter*> trainable_params(int stage);
    ConceptSet image_concepts(int index) const;
    std::uint64_t order_seed(int stage, int epoch, int sample) const;

    TrainConfig cfg_;
    Dataset dataset_;
    std::unique_ptr<Model> model_;
    int completed_stage_ = 0;
    EpochCallback epoch_callback_;
};

// Builds a model-sized vocabulary-20 scenario and checks every parameter
// group against central differences. Returns per-parameter entries; the
// group of a parameter is derived from its name.
GradCheckReport gradcheck_model(const ModelConfig& base, double beta, double gamma,
                                double margin, std::uint64_t seed, double eps = 1e-5);

// Parameter-name to acceptance-group mapping (encoder LSTM, FM, decoder RM,
// reconstructor RM, word head, gates, similarity projection, embeddings).
std::string gradcheck_group(const std::string& param_name);

} // namespace r2m
