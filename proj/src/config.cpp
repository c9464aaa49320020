#include "r2m/config.hpp"

#include <fstream>
#include <sstream>

#include "r2m/errors.hpp"

namespace r2m {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

bool parse_bool(const std::string& v, int lineno) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw DataError("config: line " + std::to_string(lineno) + ": bad bool '" + v + "'");
}

} // namespace

int TrainConfig::epochs_for_stage(int stage) const {
    switch (stage) {
    case 1: return epochs_stage1;
    case 2: return epochs_stage2;
    case 3: return epochs_stage3;
    case 4: return epochs_stage4;
    default: throw ContractError("config: stage " + std::to_string(stage) + " out of range");
    }
}

double TrainConfig::lr_for_stage(int stage) const {
    if (stage == 1 || stage == 2) return lr_corpus;
    if (stage == 3 || stage == 4) return lr_image;
    throw ContractError("config: stage " + std::to_string(stage) + " out of range");
}

void TrainConfig::validate() const {
    if (margin < 0.0) throw ContractError("config: margin must be non-negative");
    if (beta < 0.0 || gamma < 0.0) throw ContractError("config: beta/gamma must be >= 0");
    if (lr_corpus <= 0.0 || lr_image <= 0.0) {
        throw ContractError("config: learning rates must be positive");
    }
    if (batch_size < 1) throw ContractError("config: batch_size must be at least 1");
    if (beam_width < 1) throw ContractError("config: beam_width must be at least 1");
    if (max_len < 1) throw ContractError("config: max_len must be at least 1");
    if (concept_threshold < 0.0 || concept_threshold > 1.0) {
        throw ContractError("config: concept_threshold outside [0,1]");
    }
    for (const std::string& mode : {stage3_update, stage4_update}) {
        if (mode != "all" && mode != "memory" && mode != "encoder" && mode != "lstm" &&
            mode != "gates" && mode != "similarity") {
            throw ContractError(
                "config: stage update must be all, memory, encoder, lstm, gates, or similarity");
        }
    }
}

TrainConfig parse_train_config(const std::string& text) {
    TrainConfig cfg;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw DataError("config: line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "dim") cfg.model.dim = std::stoi(value);
            else if (key == "heads") cfg.model.heads = std::stoi(value);
            else if (key == "fm_key_dim") cfg.model.fm_key_dim = std::stoi(value);
            else if (key == "fm_value_dim") cfg.model.fm_value_dim = std::stoi(value);
            else if (key == "rm_key_dim") cfg.model.rm_key_dim = std::stoi(value);
            else if (key == "rm_value_dim") cfg.model.rm_value_dim = std::stoi(value);
            else if (key == "memory_rows") cfg.model.memory_rows = std::stoi(value);
            else if (key == "feature_dim") cfg.model.feature_dim = std::stoi(value);
            else if (key == "fm_scale") cfg.model.fm_scale = std::stod(value);
            else if (key == "rm_scale") cfg.model.rm_scale = std::stod(value);
            else if (key == "ln_eps") cfg.model.ln_eps = std::stod(value);
            else if (key == "shared_embeddings") cfg.model.shared_embeddings = parse_bool(value, lineno);
            else if (key == "head_bias") cfg.model.head_bias = parse_bool(value, lineno);
            else if (key == "cosine_similarity") cfg.model.cosine_similarity = parse_bool(value, lineno);
            else if (key == "margin") cfg.margin = std::stod(value);
            else if (key == "beta") cfg.beta = std::stod(value);
            else if (key == "gamma") cfg.gamma = std::stod(value);
            else if (key == "lr_corpus") cfg.lr_corpus = std::stod(value);
            else if (key == "lr_image") cfg.lr_image = std::stod(value);
            else if (key == "batch_size") cfg.batch_size = std::stoi(value);
            else if (key == "epochs_stage1") cfg.epochs_stage1 = std::stoi(value);
            else if (key == "epochs_stage2") cfg.epochs_stage2 = std::stoi(value);
            else if (key == "epochs_stage3") cfg.epochs_stage3 = std::stoi(value);
            else if (key == "epochs_stage4") cfg.epochs_stage4 = std::stoi(value);
            else if (key == "beam_width") cfg.beam_width = std::stoi(value);
            else if (key == "max_len") cfg.max_len = std::stoi(value);
            else if (key == "concept_threshold") cfg.concept_threshold = std::stod(value);
            else if (key == "noise_sigma") cfg.noise_sigma = std::stod(value);
            else if (key == "seed") cfg.seed = std::stoull(value);
            else if (key == "stage3_update") cfg.stage3_update = value;
            else if (key == "stage4_update") cfg.stage4_update = value;
            else if (key == "data_dir") cfg.data_dir = value;
            else if (key == "out_dir") cfg.out_dir = value;
            else {
                throw DataError("config: line " + std::to_string(lineno) + ": unknown key '" +
                                key + "'");
            }
        } catch (const DataError&) {
            throw;
        } catch (const std::exception&) {
            throw DataError("config: line " + std::to_string(lineno) + ": bad value '" +
                            value + "' for key '" + key + "'");
        }
    }
    cfg.validate();
    return cfg;
}

TrainConfig load_train_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_train_config(buf.str());
}

std::string TrainConfig::to_key_values() const {
    std::ostringstream os;
    os.precision(17);
    os << "dim = " << model.dim << '\n'
       << "heads = " << model.heads << '\n'
       << "fm_key_dim = " << model.fm_key_dim << '\n'
       << "fm_value_dim = " << model.fm_value_dim << '\n'
       << "rm_key_dim = " << model.rm_key_dim << '\n'
       << "rm_value_dim = " << model.rm_value_dim << '\n'
       << "memory_rows = " << model.memory_rows << '\n'
       << "feature_dim = " << model.feature_dim << '\n'
       << "fm_scale = " << model.effective_fm_scale() << '\n'
       << "rm_scale = " << model.effective_rm_scale() << '\n'
       << "ln_eps = " << model.ln_eps << '\n'
       << "shared_embeddings = " << (model.shared_embeddings ? "true" : "false") << '\n'
       << "head_bias = " << (model.head_bias ? "true" : "false") << '\n'
       << "cosine_similarity = " << (model.cosine_similarity ? "true" : "false") << '\n'
       << "margin = " << margin << '\n'
       << "beta = " << beta << '\n'
       << "gamma = " << gamma << '\n'
       << "lr_corpus = " << lr_corpus << '\n'
       << "lr_image = " << lr_image << '\n'
       << "batch_size = " << batch_size << '\n'
       << "epochs_stage1 = " << epochs_stage1 << '\n'
       << "epochs_stage2 = " << epochs_stage2 << '\n'
       << "epochs_stage3 = " << epochs_stage3 << '\n'
       << "epochs_stage4 = " << epochs_stage4 << '\n'
       << "beam_width = " << beam_width << '\n'
       << "max_len = " << max_len << '\n'
       << "concept_threshold = " << concept_threshold << '\n'
       << "noise_sigma = " << noise_sigma << '\n'
       << "stage3_update = " << stage3_update << '\n'
       << "stage4_update = " << stage4_update << '\n'
       << "seed = " << seed << '\n'
       << "data_dir = " << data_dir << '\n'
       << "out_dir = " << out_dir << '\n';
    return os.str();
}

void save_train_config(const TrainConfig& cfg, const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw DataError("config: cannot open '" + path + "' for writing");
    os << cfg.to_key_values();
    if (!os) throw DataError("config: write failed for '" + path + "'");
}

} // namespace r2m
