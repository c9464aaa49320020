#pragma once

#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "r2m/encoder.hpp"
#include "r2m/vocab.hpp"

namespace r2m {

// Sentence templates with typed slots plus the filler inventory per type.
// Slot syntax inside a template: <noun>, <verb>, <adj>, <prep>.
struct Grammar {
    std::vector<std::vector<std::string>> templates;  // tokenized patterns
    std::vector<std::string> nouns, verbs, adjs, preps;

    void validate() const;
};

Grammar load_grammar(const std::string& path);
// Built-in grammar used when no file is given; nouns double as the visual
// dictionary.
Grammar default_grammar();

// Draws n sentences by seeded template and filler sampling over the given
// template indices (empty means all templates). noun_weights, when non-empty,
// biases noun slot sampling (one weight per grammar noun); other slots stay
// uniform.
std::vector<std::vector<std::string>> synth_corpus(const Grammar& g, int n,
                                                   std::uint64_t seed,
                                                   const std::vector<int>& template_subset = {},
                                                   const std::vector<double>& noun_weights = {});

// Ordered unique sentence tokens present in the dictionary, score 1.0.
ConceptSet extract_concepts(const std::vector<std::string>& tokens,
                            const Vocabulary& vocab,
                            const std::unordered_set<int>& dictionary);

// Fixed random linear map from embedding space to feature space.
Tensor make_feature_lift(int emb_dim, int feature_dim, std::uint64_t seed);

// Mean of concept embedding rows lifted to feature space by `lift`, plus
// Gaussian noise of scale noise_sigma. Empty sets lift a zero vector.
Tensor synth_image_features(const ConceptSet& concepts, const Tensor& emb_table,
                            const Tensor& lift, double noise_sigma, std::uint64_t seed);

struct SyntheticImage {
    std::vector<std::string> sentence;  // latent sentence (evaluation reference)
    ConceptSet detections;              // simulated scores; at least one >= 0.3
    Tensor feature;                     // 1 x feature_dim
};

struct DatasetSplit {
    std::vector<int> train, val, test;
};

// A full synthetic dataset: text corpus, images, vocabulary, dictionary.
struct Dataset {
    Vocabulary vocab;
    std::unordered_set<int> dictionary;         // concept ids
    std::vector<std::vector<std::string>> corpus;
    std::vector<SyntheticImage> images;
    DatasetSplit corpus_split;
    DatasetSplit image_split;
};

struct SynthOptions {
    int n_corpus = 2000;
    int n_images = 500;
    int feature_dim = 64;
    double noise_sigma = 0.05;
    double val_fraction = 0.15;
    double test_fraction = 0.15;
    // Geometric decay of corpus noun frequencies (1.0 = uniform). Image
    // nouns always sample uniformly, so the two domains can disagree about
    // which concepts are common, as disjoint real-world sources do.
    double corpus_noun_decay = 1.0;
    // Images draw their nouns from one of n_themes contiguous groups of the
    // noun inventory (scenes); the corpus mixes nouns freely. 0 or 1
    // disables theming.
    int n_themes = 5;
    // Probability that an image's detections gain one confidently scored
    // false concept, the way real detectors misfire. Off by default: the
    // default samples keep detections inside the latent sentence's tokens.
    // Features are built from the true concepts only either way, so with
    // false positives enabled the alignment stages can learn to discount
    // the intruder.
    double false_positive_rate = 0.0;
    // Detector-only dictionary entries used as the false positives:
    // concept classes that caption text never mentions, the way real
    // detectors keep firing on categories outside the corpus vocabulary.
    // Empty falls back to cross-theme nouns.
    std::vector<std::string> spurious_concepts = {"fence", "lamp", "sign", "rock"};
};

// Generates the corpus from even-indexed templates and images from
// odd-indexed ones so the two domains share concepts but no sentences.
Dataset synth_dataset(const Grammar& g, const SynthOptions& opt, std::uint64_t seed);

// --- file formats ---
// Corpus: one sentence per line. Dictionary: one concept per line.
// Features: header "n feature_dim", then n lines of feature_dim decimals
// (17 significant digits; bit-exact round trip). Detections: one line per
// image of space-separated token:score pairs. Splits: one index per line.

void save_corpus(const std::vector<std::vector<std::string>>& corpus, const std::string& path);
std::vector<std::vector<std::string>> load_corpus(const std::string& path);

void save_dictionary(const std::vector<std::string>& concepts, const std::string& path);
std::vector<std::string> load_dictionary(const std::string& path);

void save_features(const std::vector<Tensor>& features, const std::string& path);
std::vector<Tensor> load_features(const std::string& path);

void save_detections(const std::vector<ConceptSet>& detections, const Vocabulary& vocab,
                     const std::string& path);
std::vector<ConceptSet> load_detections(const std::string& path, const Vocabulary& vocab);

void save_split(const std::vector<int>& indices, const std::string& path);
std::vector<int> load_split(const std::string& path);

// Writes every dataset file into a directory (created if missing) using
// the fixed names documented in the README.
void save_dataset(const Dataset& ds, const std::string& dir);
Dataset load_dataset(const std::string& dir);

} // namespace r2m
