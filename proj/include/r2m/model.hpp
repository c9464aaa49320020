#pragma once

#include <memory>
#include <optional>

#include "r2m/checkpoint.hpp"
#include "r2m/encoder.hpp"
#include "r2m/fusion_memory.hpp"
#include "r2m/recurrent_memory.hpp"

namespace r2m {

// Structural hyper-parameters of the network. fm_scale/rm_scale default to
// the corresponding key width when left at 0.
struct ModelConfig {
    int dim = 32;            // d
    int heads = 2;           // H
    int fm_key_dim = 16;
    int fm_value_dim = 16;
    int rm_key_dim = 16;
    int rm_value_dim = 16;   // heads * rm_value_dim must equal dim
    int memory_rows = 1;     // N
    int vocab = 0;
    int feature_dim = 64;    // raw image feature width
    double fm_scale = 0.0;
    double rm_scale = 0.0;
    // Variance floor for the psi layer norms. The first reconstructor step
    // normalizes an all-zero row; the floor caps the clamped-branch slope
    // at 1/sqrt(ln_eps), keeping gradients and curvature bounded there.
    double ln_eps = 1e-4;
    bool shared_embeddings = true;
    bool head_bias = true;
    bool cosine_similarity = false;

    void validate() const;
    double effective_fm_scale() const { return fm_scale > 0.0 ? fm_scale : fm_key_dim; }
    double effective_rm_scale() const { return rm_scale > 0.0 ? rm_scale : rm_key_dim; }
};

// Linear map from memory rows to vocabulary logits.
struct WordHead {
    Parameter weight;                 // vocab x d
    std::optional<Parameter> bias;    // 1 x vocab

    static WordHead init(const std::string& prefix, int vocab, int dim, bool with_bias,
                         Rng& rng);
    void collect(std::vector<Parameter*>& out);
};

// Projects raw image features into the model space for inner-product
// similarity against reconstructed vectors.
struct SimilarityHead {
    Parameter proj;  // feature_dim x d
    bool cosine = false;

    static SimilarityHead init(const std::string& prefix, int feature_dim, int dim,
                               bool cosine, Rng& rng);
    void collect(std::vector<Parameter*>& out);
};

// The full network: encoder, fusion memory, decoder/reconstructor recurrent
// memories, word head, and the image similarity projection. Parameters are
// owned here; the graph binds to them per forward pass.
class Model {
public:
    Model(const ModelConfig& cfg, std::uint64_t seed);

    Model(const Model&) = delete;
    Model& operator=(const Model&) = delete;

    const ModelConfig& config() const { return cfg_; }

    Embedding& encoder_embedding() { return emb_; }
    // Decoder-side word embedding; aliases the encoder table when shared.
    Embedding& word_embedding() { return cfg_.shared_embeddings ? emb_ : *dec_emb_; }
    LstmParams& encoder_lstm() { return enc_; }
    FmParams& fusion() { return fm_; }
    RmParams& decoder_memory() { return rm_dec_; }
    RmParams& reconstructor_memory() { return rm_rec_; }
    WordHead& word_head() { return head_; }
    SimilarityHead& similarity() { return sim_; }

    // All parameters in a fixed, deterministic order.
    std::vector<Parameter*> parameters();
    void zero_grads();

    Checkpoint to_checkpoint() const;
    void load_parameters(const Checkpoint& ckpt);
    static ModelConfig config_from_checkpoint(const Checkpoint& ckpt);

private:
    ModelConfig cfg_;
    Embedding emb_;
    std::optional<Embedding> dec_emb_;
    LstmParams enc_;
    FmParams fm_;
    RmParams rm_dec_;
    RmParams rm_rec_;
    WordHead head_;
    SimilarityHead sim_;
};

} // namespace r2m
