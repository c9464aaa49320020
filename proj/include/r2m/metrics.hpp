#pragma once

#include <string>
#include <vector>

#include "r2m/vocab.hpp"

namespace r2m {

// Corpus-level BLEU-n: geometric mean of clipped k-gram precisions for
// k = 1..n with the brevity penalty. No smoothing; any empty precision
// bucket zeroes the score.
double bleu_n(const std::vector<std::vector<std::string>>& candidates,
              const std::vector<std::vector<std::vector<std::string>>>& references,
              int n);

// Mean over samples of |caption tokens  intersect  concepts| / |concepts|;
// an empty concept set scores 1 by convention.
double concept_recall(const std::vector<std::vector<std::string>>& captions,
                      const std::vector<std::vector<std::string>>& concept_sets);

struct EvalReport {
    double bleu1 = 0.0, bleu2 = 0.0, bleu3 = 0.0, bleu4 = 0.0;
    double concept_recall = 0.0;
    std::vector<std::vector<std::string>> captions;

    std::string to_key_values() const;
    bool operator==(const EvalReport& other) const;
};

} // namespace r2m
