#include "r2m/model.hpp"

#include <cmath>

#include "r2m/errors.hpp"

namespace r2m {

void ModelConfig::validate() const {
    if (dim < 1 || heads < 1 || fm_key_dim < 1 || fm_value_dim < 1 || rm_key_dim < 1 ||
        rm_value_dim < 1 || memory_rows < 1 || feature_dim < 1) {
        throw ContractError("model config: dimensions must be positive");
    }
    if (vocab < 3) {
        throw ContractError("model config: vocabulary must include the reserved tokens");
    }
    if (heads * rm_value_dim != dim) {
        throw DimensionError("model config: heads*rm_value_dim (" +
                             std::to_string(heads * rm_value_dim) + ") must equal dim (" +
                             std::to_string(dim) + ")");
    }
    if (ln_eps <= 0.0) throw ContractError("model config: ln_eps must be positive");
}

WordHead WordHead::init(const std::string& prefix, int vocab, int dim, bool with_bias,
                        Rng& rng) {
    WordHead h;
    const double limit = std::sqrt(6.0 / (vocab + dim));
    Tensor w = Tensor::zeros({vocab, dim});
    for (double& v : w.data) v = rng.uniform(-limit, limit);
    h.weight = Parameter(prefix + "/weight", std::move(w));
    if (with_bias) h.bias = Parameter(prefix + "/bias", Tensor::zeros({1, vocab}));
    return h;
}

void WordHead::collect(std::vector<Parameter*>& out) {
    out.push_back(&weight);
    if (bias) out.push_back(&*bias);
}

SimilarityHead SimilarityHead::init(const std::string& prefix, int feature_dim, int dim,
                                    bool cosine, Rng& rng) {
    SimilarityHead s;
    const double limit = std::sqrt(6.0 / (feature_dim + dim));
    Tensor w = Tensor::zeros({feature_dim, dim});
    for (double& v : w.data) v = rng.uniform(-limit, limit);
    s.proj = Parameter(prefix + "/proj", std::move(w));
    s.cosine = cosine;
    return s;
}

void SimilarityHead::collect(std::vector<Parameter*>& out) { out.push_back(&proj); }

Model::Model(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
    cfg_.validate();
    Rng rng(seed);
    emb_ = Embedding::init("embedding/table", cfg_.vocab, cfg_.dim, rng);
    if (!cfg_.shared_embeddings) {
        dec_emb_ = Embedding::init("embedding/decoder_table", cfg_.vocab, cfg_.dim, rng);
    }
    enc_ = LstmParams::init("encoder/lstm", cfg_.dim, cfg_.dim, rng);
    fm_ = FmParams::init("fusion", cfg_.dim, cfg_.heads, cfg_.fm_key_dim, cfg_.fm_value_dim,
                         cfg_.effective_fm_scale(), rng);
    rm_dec_ = RmParams::init("decoder_rm", cfg_.dim, cfg_.memory_rows, cfg_.heads,
                             cfg_.rm_key_dim, cfg_.rm_value_dim, cfg_.effective_rm_scale(),
                             rng);
    rm_dec_.ln_eps = cfg_.ln_eps;
    rm_rec_ = RmParams::init("reconstructor_rm", cfg_.dim, cfg_.memory_rows, cfg_.heads,
                             cfg_.rm_key_dim, cfg_.rm_value_dim, cfg_.effective_rm_scale(),
                             rng);
    rm_rec_.ln_eps = cfg_.ln_eps;
    head_ = WordHead::init("word_head", cfg_.vocab, cfg_.dim, cfg_.head_bias, rng);
    sim_ = SimilarityHead::init("similarity", cfg_.feature_dim, cfg_.dim,
                                cfg_.cosine_similarity, rng);
}

std::vector<Parameter*> Model::parameters() {
    std::vector<Parameter*> out;
    emb_.collect(out);
    if (dec_emb_) dec_emb_->collect(out);
    enc_.collect(out);
    fm_.collect(out);
    rm_dec_.collect(out);
    rm_rec_.collect(out);
    head_.collect(out);
    sim_.collect(out);
    return out;
}

void Model::zero_grads() {
    for (Parameter* p : parameters()) p->value.zero_grad();
}

Checkpoint Model::to_checkpoint() const {
    Checkpoint ckpt;
    ckpt.put_scalar("meta/dim", cfg_.dim);
    ckpt.put_scalar("meta/heads", cfg_.heads);
    ckpt.put_scalar("meta/fm_key_dim", cfg_.fm_key_dim);
    ckpt.put_scalar("meta/fm_value_dim", cfg_.fm_value_dim);
    ckpt.put_scalar("meta/rm_key_dim", cfg_.rm_key_dim);
    ckpt.put_scalar("meta/rm_value_dim", cfg_.rm_value_dim);
    ckpt.put_scalar("meta/memory_rows", cfg_.memory_rows);
    ckpt.put_scalar("meta/vocab", cfg_.vocab);
    ckpt.put_scalar("meta/feature_dim", cfg_.feature_dim);
    ckpt.put_scalar("meta/fm_scale", cfg_.effective_fm_scale());
    ckpt.put_scalar("meta/rm_scale", cfg_.effective_rm_scale());
    ckpt.put_scalar("meta/ln_eps", cfg_.ln_eps);
    ckpt.put_scalar("meta/shared_embeddings", cfg_.shared_embeddings ? 1.0 : 0.0);
    ckpt.put_scalar("meta/head_bias", cfg_.head_bias ? 1.0 : 0.0);
    ckpt.put_scalar("meta/cosine_similarity", cfg_.cosine_similarity ? 1.0 : 0.0);
    Model* self = const_cast<Model*>(this);
    for (Parameter* p : self->parameters()) ckpt.put(p->name, p->value);
    return ckpt;
}

void Model::load_parameters(const Checkpoint& ckpt) {
    for (Parameter* p : parameters()) {
        const Tensor& stored = ckpt.get(p->name);
        if (stored.shape != p->value.shape) {
            throw DataError("checkpoint: tensor '" + p->name + "' has shape " +
                            shape_str(stored.shape) + ", expected " +
                            shape_str(p->value.shape));
        }
        p->value.data = stored.data;
        p->value.zero_grad();
    }
}

ModelConfig Model::config_from_checkpoint(const Checkpoint& ckpt) {
    ModelConfig cfg;
    cfg.dim = static_cast<int>(ckpt.get_scalar("meta/dim"));
    cfg.heads = static_cast<int>(ckpt.get_scalar("meta/heads"));
    cfg.fm_key_dim = static_cast<int>(ckpt.get_scalar("meta/fm_key_dim"));
    cfg.fm_value_dim = static_cast<int>(ckpt.get_scalar("meta/fm_value_dim"));
    cfg.rm_key_dim = static_cast<int>(ckpt.get_scalar("meta/rm_key_dim"));
    cfg.rm_value_dim = static_cast<int>(ckpt.get_scalar("meta/rm_value_dim"));
    cfg.memory_rows = static_cast<int>(ckpt.get_scalar("meta/memory_rows"));
    cfg.vocab = static_cast<int>(ckpt.get_scalar("meta/vocab"));
    cfg.feature_dim = static_cast<int>(ckpt.get_scalar("meta/feature_dim"));
    cfg.fm_scale = ckpt.get_scalar("meta/fm_scale");
    cfg.rm_scale = ckpt.get_scalar("meta/rm_scale");
    cfg.ln_eps = ckpt.get_scalar("meta/ln_eps");
    cfg.shared_embeddings = ckpt.get_scalar("meta/shared_embeddings") != 0.0;
    cfg.head_bias = ckpt.get_scalar("meta/head_bias") != 0.0;
    cfg.cosine_similarity = ckpt.get_scalar("meta/cosine_similarity") != 0.0;
    return cfg;
}

} // namespace r2m
