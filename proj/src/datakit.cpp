#include "r2m/datakit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unordered_map>
#include <sstream>

#include "r2m/errors.hpp"
#include "r2m/rng.hpp"

namespace r2m {

namespace {

const std::vector<std::string>* fillers_for(const Grammar& g, const std::string& slot) {
    if (slot == "<noun>") return &g.nouns;
    if (slot == "<verb>") return &g.verbs;
    if (slot == "<adj>") return &g.adjs;
    if (slot == "<prep>") return &g.preps;
    return nullptr;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

void Grammar::validate() const {
    if (templates.empty()) throw DataError("grammar: no templates");
    for (const auto& tpl : templates) {
        int min_len = 0;
        for (const std::string& tok : tpl) {
            if (tok.front() == '<') {
                const auto* f = fillers_for(*this, tok);
                if (!f) throw DataError("grammar: unknown slot '" + tok + "'");
                if (f->empty()) {
                    throw DataError("grammar: slot '" + tok + "' has no fillers");
                }
            }
            ++min_len;
        }
        if (min_len < 4 || min_len > 12) {
            throw DataError("grammar: templates must produce 4-12 token sentences, got " +
                            std::to_string(min_len));
        }
    }
    if (nouns.empty()) throw DataError("grammar: noun inventory is empty");
}

Grammar load_grammar(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("grammar: cannot open '" + path + "'");
    Grammar g;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const std::size_t colon = line.find(':');
        if (colon == std::string::npos) {
            throw DataError("grammar: line " + std::to_string(lineno) + ": expected 'kind: ...'");
        }
        const std::string kind = line.substr(0, colon);
        const std::vector<std::string> tokens = tokenize(line.substr(colon + 1));
        if (kind == "template") {
            if (tokens.empty()) {
                throw DataError("grammar: line " + std::to_string(lineno) + ": empty template");
            }
            g.templates.push_back(tokens);
        } else if (kind == "noun") {
            g.nouns.insert(g.nouns.end(), tokens.begin(), tokens.end());
        } else if (kind == "verb") {
            g.verbs.insert(g.verbs.end(), tokens.begin(), tokens.end());
        } else if (kind == "adj") {
            g.adjs.insert(g.adjs.end(), tokens.begin(), tokens.end());
        } else if (kind == "prep") {
            g.preps.insert(g.preps.end(), tokens.begin(), tokens.end());
        } else {
            throw DataError("grammar: line " + std::to_string(lineno) + ": unknown kind '" +
                            kind + "'");
        }
    }
    g.validate();
    return g;
}

Grammar default_grammar() {
    Grammar g;
    g.nouns = {"dog",   "cat",    "man",   "woman", "child",  "car",  "bus",
               "bike",  "horse",  "bird",  "boat",  "table",  "ball", "tree",
               "house", "street", "river", "phone", "guitar", "train"};
    g.verbs = {"riding", "holding", "watching", "chasing", "passing", "carrying",
               "pulling", "touching", "facing", "following"};
    g.adjs = {"small", "big", "old", "young", "red", "white", "busy", "quiet"};
    g.preps = {"near", "beside", "behind", "above", "under"};
    // Even-indexed templates feed the text corpus, odd-indexed ones the
    // image domain; the noun inventory is shared so concepts co-occur.
    g.templates = {
        {"a", "<noun>", "is", "<verb>", "a", "<noun>"},
        {"a", "<noun>", "<verb>", "a", "<noun>", "<prep>", "the", "<noun>"},
        {"the", "<adj>", "<noun>", "is", "<verb>", "the", "<noun>"},
        {"the", "<noun>", "is", "<prep>", "the", "<adj>", "<noun>"},
        {"a", "<adj>", "<noun>", "is", "<verb>", "a", "<adj>", "<noun>"},
        {"a", "<noun>", "<prep>", "the", "<noun>", "is", "<verb>", "a", "<noun>"},
    };
    return g;
}

std::vector<std::vector<std::string>> synth_corpus(const Grammar& g, int n, std::uint64_t seed,
                                                   const std::vector<int>& template_subset,
                                                   const std::vector<double>& noun_weights) {
    if (n < 1) throw ContractError("synth_corpus: need at least one sentence");
    g.validate();
    std::vector<int> pool = template_subset;
    if (pool.empty()) {
        for (int i = 0; i < static_cast<int>(g.templates.size()); ++i) pool.push_back(i);
    }
    for (int t : pool) {
        if (t < 0 || t >= static_cast<int>(g.templates.size())) {
            throw ContractError("synth_corpus: template index " + std::to_string(t) +
                                " out of range");
        }
    }
    if (!noun_weights.empty() && noun_weights.size() != g.nouns.size()) {
        throw ContractError("synth_corpus: need one noun weight per grammar noun");
    }
    double weight_total = 0.0;
    for (double w : noun_weights) {
        if (w < 0.0) throw ContractError("synth_corpus: noun weights must be non-negative");
        weight_total += w;
    }

    Rng rng(seed);
    auto pick_noun = [&]() -> const std::string& {
        if (noun_weights.empty()) {
            return g.nouns[static_cast<std::size_t>(
                rng.uniform_int(static_cast<int>(g.nouns.size())))];
        }
        double r = rng.uniform() * weight_total;
        for (std::size_t i = 0; i < noun_weights.size(); ++i) {
            r -= noun_weights[i];
            if (r < 0.0) return g.nouns[i];
        }
        return g.nouns.back();
    };

    std::vector<std::vector<std::string>> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const auto& tpl = g.templates[static_cast<std::size_t>(
            pool[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(pool.size())))])];
        std::vector<std::string> sentence;
        sentence.reserve(tpl.size());
        for (const std::string& tok : tpl) {
            if (tok == "<noun>") {
                sentence.push_back(pick_noun());
                continue;
            }
            const auto* fillers = fillers_for(g, tok);
            if (fillers) {
                sentence.push_back(
                    (*fillers)[static_cast<std::size_t>(rng.uniform_int(
                        static_cast<int>(fillers->size())))]);
            } else {
                sentence.push_back(tok);
            }
        }
        out.push_back(std::move(sentence));
    }
    return out;
}

ConceptSet extract_concepts(const std::vector<std::string>& tokens, const Vocabulary& vocab,
                            const std::unordered_set<int>& dictionary) {
    ConceptSet set;
    for (const std::string& tok : tokens) {
        if (!vocab.contains(tok)) continue;
        const int id = vocab.id_of(tok);
        if (dictionary.count(id)) set.add(id, 1.0);
    }
    return set;
}

Tensor make_feature_lift(int emb_dim, int feature_dim, std::uint64_t seed) {
    Rng rng(seed);
    Tensor lift = Tensor::zeros({emb_dim, feature_dim});
    const double scale = 1.0 / std::sqrt(static_cast<double>(emb_dim));
    for (double& v : lift.data) v = scale * rng.gauss();
    return lift;
}

Tensor synth_image_features(const ConceptSet& concepts, const Tensor& emb_table,
                            const Tensor& lift, double noise_sigma, std::uint64_t seed) {
    const int emb_dim = emb_table.cols();
    if (lift.rows() != emb_dim) {
        throw DimensionError("synth_image_features: lift " + shape_str(lift.shape) +
                             " does not accept embedding width " + std::to_string(emb_dim));
    }
    Tensor mean = Tensor::zeros({1, emb_dim});
    if (!concepts.empty()) {
        for (const ScoredConcept& c : concepts.items) {
            if (c.id < 0 || c.id >= emb_table.rows()) {
                throw VocabError("synth_image_features: concept id " + std::to_string(c.id) +
                                 " outside embedding table");
            }
            for (int j = 0; j < emb_dim; ++j) mean.data[static_cast<std::size_t>(j)] +=
                emb_table.at(c.id, j);
        }
        for (double& v : mean.data) v /= static_cast<double>(concepts.size());
    }
    const int feature_dim = lift.cols();
    Tensor feature = Tensor::zeros({1, feature_dim});
    for (int j = 0; j < feature_dim; ++j) {
        double s = 0.0;
        for (int k = 0; k < emb_dim; ++k) {
            s += mean.data[static_cast<std::size_t>(k)] * lift.at(k, j);
        }
        feature.data[static_cast<std::size_t>(j)] = s;
    }
    if (noise_sigma > 0.0) {
        Rng rng(seed);
        for (double& v : feature.data) v += noise_sigma * rng.gauss();
    }
    return feature;
}

namespace {

DatasetSplit make_split(int n, double val_fraction, double test_fraction, Rng& rng) {
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    rng.shuffle(order);
    const int n_val = static_cast<int>(std::floor(n * val_fraction));
    const int n_test = static_cast<int>(std::floor(n * test_fraction));
    DatasetSplit split;
    for (int i = 0; i < n; ++i) {
        if (i < n_val) {
            split.val.push_back(order[static_cast<std::size_t>(i)]);
        } else if (i < n_val + n_test) {
            split.test.push_back(order[static_cast<std::size_t>(i)]);
        } else {
            split.train.push_back(order[static_cast<std::size_t>(i)]);
        }
    }
    return split;
}

} // namespace

Dataset synth_dataset(const Grammar& g, const SynthOptions& opt, std::uint64_t seed) {
    g.validate();
    Dataset ds;

    // Vocabulary is built from the grammar alone so it does not depend on
    // sample counts: template literals first, then filler inventories.
    for (const auto& tpl : g.templates) {
        for (const std::string& tok : tpl) {
            if (tok.front() != '<') ds.vocab.add(tok);
        }
    }
    for (const std::string& t : g.nouns) ds.dictionary.insert(ds.vocab.add(t));
    for (const std::string& t : g.verbs) ds.vocab.add(t);
    for (const std::string& t : g.adjs) ds.vocab.add(t);
    for (const std::string& t : g.preps) ds.vocab.add(t);
    // Detector-only classes: in the dictionary, never in any sentence.
    std::vector<int> spurious_ids;
    for (const std::string& t : opt.spurious_concepts) {
        const int id = ds.vocab.add(t);
        ds.dictionary.insert(id);
        spurious_ids.push_back(id);
    }

    // Disjoint template subsets keep the two domains genuinely unpaired.
    std::vector<int> corpus_templates, image_templates;
    for (int i = 0; i < static_cast<int>(g.templates.size()); ++i) {
        if (g.templates.size() == 1 || i % 2 == 0) corpus_templates.push_back(i);
        if (g.templates.size() == 1 || i % 2 == 1) image_templates.push_back(i);
    }

    // Corpus noun frequencies decay geometrically over a seed-shuffled
    // order; image sentences keep uniform noun usage.
    std::vector<double> corpus_noun_weights;
    if (opt.corpus_noun_decay > 0.0 && opt.corpus_noun_decay < 1.0) {
        std::vector<std::size_t> order(g.nouns.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        Rng order_rng(mix_seed(seed, 7));
        order_rng.shuffle(order);
        corpus_noun_weights.assign(g.nouns.size(), 0.0);
        double w = 1.0;
        for (std::size_t rank = 0; rank < order.size(); ++rank) {
            corpus_noun_weights[order[rank]] = w;
            w *= opt.corpus_noun_decay;
        }
    }

    ds.corpus =
        synth_corpus(g, opt.n_corpus, mix_seed(seed, 1), corpus_templates, corpus_noun_weights);

    // Image sentences are themed: each draws its nouns from one contiguous
    // group of the noun inventory.
    const int n_themes =
        opt.n_themes > 1 ? std::min<int>(opt.n_themes, static_cast<int>(g.nouns.size())) : 1;
    Rng theme_rng(mix_seed(seed, 8));
    std::vector<int> image_theme(static_cast<std::size_t>(opt.n_images), 0);
    std::vector<std::vector<std::string>> latent;
    latent.reserve(static_cast<std::size_t>(opt.n_images));
    for (int i = 0; i < opt.n_images; ++i) {
        const int theme = theme_rng.uniform_int(n_themes);
        image_theme[static_cast<std::size_t>(i)] = theme;
        std::vector<double> mask;
        if (n_themes > 1) {
            mask.assign(g.nouns.size(), 0.0);
            const std::size_t per =
                (g.nouns.size() + static_cast<std::size_t>(n_themes) - 1) /
                static_cast<std::size_t>(n_themes);
            for (std::size_t k = 0; k < g.nouns.size(); ++k) {
                if (k / per == static_cast<std::size_t>(theme)) mask[k] = 1.0;
            }
        }
        latent.push_back(synth_corpus(g, 1, mix_seed(seed, 200 + static_cast<std::uint64_t>(i)),
                                      image_templates, mask)[0]);
    }

    const Tensor gen_emb = [&] {
        Rng rng(mix_seed(seed, 3));
        Tensor t = Tensor::zeros({ds.vocab.size(), 16});
        for (double& v : t.data) v = rng.gauss();
        return t;
    }();
    const Tensor lift = make_feature_lift(16, opt.feature_dim, mix_seed(seed, 4));

    std::unordered_map<int, int> theme_of_concept;
    {
        const std::size_t per = (g.nouns.size() + static_cast<std::size_t>(n_themes) - 1) /
                                static_cast<std::size_t>(n_themes);
        for (std::size_t k = 0; k < g.nouns.size(); ++k) {
            theme_of_concept[ds.vocab.id_of(g.nouns[k])] = static_cast<int>(k / per);
        }
    }
    std::vector<int> dictionary_ids(ds.dictionary.begin(), ds.dictionary.end());
    std::sort(dictionary_ids.begin(), dictionary_ids.end());

    Rng score_rng(mix_seed(seed, 5));
    for (int i = 0; i < opt.n_images; ++i) {
        SyntheticImage img;
        img.sentence = latent[static_cast<std::size_t>(i)];
        ConceptSet concepts = extract_concepts(img.sentence, ds.vocab, ds.dictionary);
        // Simulated detection scores; the generator guarantees that at
        // least one concept survives the 0.3 filter threshold.
        for (const ScoredConcept& c : concepts.items) {
            img.detections.add(c.id, score_rng.uniform());
        }
        if (!img.detections.empty()) {
            bool any = false;
            for (const ScoredConcept& c : img.detections.items) any |= c.score >= 0.3;
            if (!any) {
                const int k = score_rng.uniform_int(static_cast<int>(img.detections.size()));
                img.detections.items[static_cast<std::size_t>(k)].score =
                    score_rng.uniform(0.3, 1.0);
            }
        }
        // A confidently scored wrong detection: a detector-only class, or a
        // cross-theme noun when none are configured.
        if (score_rng.uniform() < opt.false_positive_rate) {
            std::vector<int> candidates = spurious_ids;
            if (candidates.empty()) {
                const std::vector<int> present_ids = concepts.ids();
                const std::unordered_set<int> present(present_ids.begin(), present_ids.end());
                for (int id : dictionary_ids) {
                    if (present.count(id)) continue;
                    if (n_themes > 1 &&
                        theme_of_concept[id] == image_theme[static_cast<std::size_t>(i)]) {
                        continue;
                    }
                    candidates.push_back(id);
                }
            }
            if (!candidates.empty()) {
                const int fp = candidates[static_cast<std::size_t>(
                    score_rng.uniform_int(static_cast<int>(candidates.size())))];
                img.detections.add(fp, score_rng.uniform(0.4, 0.9));
            }
        }
        img.feature = synth_image_features(concepts, gen_emb, lift, opt.noise_sigma,
                                           mix_seed(seed, 100 + static_cast<std::uint64_t>(i)));
        ds.images.push_back(std::move(img));
    }

    Rng split_rng(mix_seed(seed, 6));
    ds.corpus_split = make_split(opt.n_corpus, opt.val_fraction, opt.test_fraction, split_rng);
    ds.image_split = make_split(opt.n_images, opt.val_fraction, opt.test_fraction, split_rng);
    return ds;
}

void save_corpus(const std::vector<std::vector<std::string>>& corpus,
                 const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw DataError("corpus: cannot open '" + path + "' for writing");
    for (const auto& sentence : corpus) {
        for (std::size_t i = 0; i < sentence.size(); ++i) {
            if (i) os << ' ';
            os << sentence[i];
        }
        os << '\n';
    }
    if (!os) throw DataError("corpus: write failed for '" + path + "'");
}

std::vector<std::vector<std::string>> load_corpus(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("corpus: cannot open '" + path + "'");
    std::vector<std::vector<std::string>> corpus;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        corpus.push_back(tokenize(line));
    }
    return corpus;
}

void save_dictionary(const std::vector<std::string>& concepts, const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw DataError("dictionary: cannot open '" + path + "' for writing");
    for (const std::string& c : concepts) os << c << '\n';
    if (!os) throw DataError("dictionary: write failed for '" + path + "'");
}

std::vector<std::string> load_dictionary(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("dictionary: cannot open '" + path + "'");
    std::vector<std::string> concepts;
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty()) concepts.push_back(line);
    }
    return concepts;
}

void save_features(const std::vector<Tensor>& features, const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw DataError("features: cannot open '" + path + "' for writing");
    const int dim = features.empty() ? 0 : features.front().cols();
    os << features.size() << ' ' << dim << '\n';
    for (const Tensor& f : features) {
        if (f.cols() != dim || f.rows() != 1) {
            throw DimensionError("features: inconsistent row shape " + shape_str(f.shape));
        }
        for (int j = 0; j < dim; ++j) {
            if (j) os << ' ';
            os << format_double(f.data[static_cast<std::size_t>(j)]);
        }
        os << '\n';
    }
    if (!os) throw DataError("features: write failed for '" + path + "'");
}

std::vector<Tensor> load_features(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("features: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(is, line)) throw DataError("features: empty file '" + path + "'");
    std::istringstream header(line);
    long n = -1, dim = -1;
    if (!(header >> n >> dim) || n < 0 || dim < 0) {
        throw DataError("features: line 1: bad header '" + line + "'");
    }
    std::vector<Tensor> features;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream row(line);
        std::vector<double> values;
        double v;
        while (row >> v) values.push_back(v);
        if (static_cast<long>(values.size()) != dim) {
            throw DataError("features: line " + std::to_string(lineno) + ": expected " +
                            std::to_string(dim) + " values, got " +
                            std::to_string(values.size()));
        }
        features.push_back(Tensor::row(std::move(values)));
    }
    if (static_cast<long>(features.size()) != n) {
        throw DataError("features: header promises " + std::to_string(n) + " rows, file has " +
                        std::to_string(features.size()));
    }
    return features;
}

void save_detections(const std::vector<ConceptSet>& detections, const Vocabulary& vocab,
                     const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw DataError("detections: cannot open '" + path + "' for writing");
    for (const ConceptSet& set : detections) {
        for (std::size_t i = 0; i < set.items.size(); ++i) {
            if (i) os << ' ';
            os << vocab.token_of(set.items[i].id) << ':'
               << format_double(set.items[i].score);
        }
        os << '\n';
    }
    if (!os) throw DataError("detections: write failed for '" + path + "'");
}

std::vector<ConceptSet> load_detections(const std::string& path, const Vocabulary& vocab) {
    std::ifstream is(path);
    if (!is) throw DataError("detections: cannot open '" + path + "'");
    std::vector<ConceptSet> out;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        ConceptSet set;
        std::istringstream row(line);
        std::string item;
        while (row >> item) {
            const std::size_t colon = item.rfind(':');
            if (colon == std::string::npos) {
                throw DataError("detections: line " + std::to_string(lineno) +
                                ": expected token:score, got '" + item + "'");
            }
            const std::string token = item.substr(0, colon);
            double score;
            try {
                score = std::stod(item.substr(colon + 1));
            } catch (const std::exception&) {
                throw DataError("detections: line " + std::to_string(lineno) +
                                ": bad score in '" + item + "'");
            }
            if (!vocab.contains(token)) {
                throw VocabError("detections: line " + std::to_string(lineno) +
                                 ": unknown token '" + token + "'");
            }
            set.add(vocab.id_of(token), score);
        }
        out.push_back(std::move(set));
    }
    return out;
}

void save_split(const std::vector<int>& indices, const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw DataError("split: cannot open '" + path + "' for writing");
    for (int i : indices) os << i << '\n';
    if (!os) throw DataError("split: write failed for '" + path + "'");
}

std::vector<int> load_split(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("split: cannot open '" + path + "'");
    std::vector<int> indices;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            indices.push_back(std::stoi(line));
        } catch (const std::exception&) {
            throw DataError("split: line " + std::to_string(lineno) + ": bad index '" + line +
                            "'");
        }
    }
    return indices;
}

void save_dataset(const Dataset& ds, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const fs::path base(dir);

    std::vector<std::string> dict_tokens;
    for (int id = 0; id < ds.vocab.size(); ++id) {
        if (ds.dictionary.count(id)) dict_tokens.push_back(ds.vocab.token_of(id));
    }
    save_dictionary(dict_tokens, (base / "dictionary.txt").string());
    ds.vocab.save((base / "vocabulary.tsv").string());
    save_corpus(ds.corpus, (base / "corpus.txt").string());
    save_split(ds.corpus_split.train, (base / "corpus_train.idx").string());
    save_split(ds.corpus_split.val, (base / "corpus_val.idx").string());
    save_split(ds.corpus_split.test, (base / "corpus_test.idx").string());

    std::vector<Tensor> features;
    std::vector<ConceptSet> detections;
    std::vector<std::vector<std::string>> captions;
    for (const SyntheticImage& img : ds.images) {
        features.push_back(img.feature);
        detections.push_back(img.detections);
        captions.push_back(img.sentence);
    }
    save_features(features, (base / "images.features").string());
    save_detections(detections, ds.vocab, (base / "images.detections").string());
    save_corpus(captions, (base / "images.captions").string());
    save_split(ds.image_split.train, (base / "images_train.idx").string());
    save_split(ds.image_split.val, (base / "images_val.idx").string());
    save_split(ds.image_split.test, (base / "images_test.idx").string());
}

Dataset load_dataset(const std::string& dir) {
    namespace fs = std::filesystem;
    const fs::path base(dir);
    Dataset ds;
    ds.vocab = Vocabulary::load((base / "vocabulary.tsv").string());
    for (const std::string& tok : load_dictionary((base / "dictionary.txt").string())) {
        if (!ds.vocab.contains(tok)) {
            throw DataError("dataset: dictionary token '" + tok + "' missing from vocabulary");
        }
        ds.dictionary.insert(ds.vocab.id_of(tok));
    }
    ds.corpus = load_corpus((base / "corpus.txt").string());
    ds.corpus_split.train = load_split((base / "corpus_train.idx").string());
    ds.corpus_split.val = load_split((base / "corpus_val.idx").string());
    ds.corpus_split.test = load_split((base / "corpus_test.idx").string());

    const std::vector<Tensor> features = load_features((base / "images.features").string());
    const std::vector<ConceptSet> detections =
        load_detections((base / "images.detections").string(), ds.vocab);
    const std::vector<std::vector<std::string>> captions =
        load_corpus((base / "images.captions").string());
    if (features.size() != detections.size() || features.size() != captions.size()) {
        throw DataError("dataset: image file row counts disagree");
    }
    for (std::size_t i = 0; i < features.size(); ++i) {
        SyntheticImage img;
        img.feature = features[i];
        img.detections = detections[i];
        img.sentence = captions[i];
        ds.images.push_back(std::move(img));
    }
    ds.image_split.train = load_split((base / "images_train.idx").string());
    ds.image_split.val = load_split((base / "images_val.idx").string());
    ds.image_split.test = load_split((base / "images_test.idx").string());
    return ds;
}

} // namespace r2m
