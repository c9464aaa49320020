#include "r2m/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "r2m/errors.hpp"

namespace r2m {

namespace {

std::map<std::vector<std::string>, int> ngram_counts(const std::vector<std::string>& tokens,
                                                     int k) {
    std::map<std::vector<std::string>, int> counts;
    if (static_cast<int>(tokens.size()) < k) return counts;
    for (std::size_t i = 0; i + static_cast<std::size_t>(k) <= tokens.size(); ++i) {
        std::vector<std::string> gram(tokens.begin() + static_cast<long>(i),
                                      tokens.begin() + static_cast<long>(i) + k);
        ++counts[std::move(gram)];
    }
    return counts;
}

} // namespace

double bleu_n(const std::vector<std::vector<std::string>>& candidates,
              const std::vector<std::vector<std::vector<std::string>>>& references, int n) {
    if (n < 1 || n > 4) throw ContractError("bleu_n: n must be in 1..4");
    if (candidates.empty()) throw ContractError("bleu_n: empty candidate set");
    if (candidates.size() != references.size()) {
        throw ContractError("bleu_n: " + std::to_string(candidates.size()) +
                            " candidates vs " + std::to_string(references.size()) +
                            " reference lists");
    }

    std::vector<long> matched(static_cast<std::size_t>(n), 0);
    std::vector<long> total(static_cast<std::size_t>(n), 0);
    long cand_len = 0, ref_len = 0;

    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto& cand = candidates[i];
        const auto& refs = references[i];
        if (refs.empty()) throw ContractError("bleu_n: candidate without references");

        cand_len += static_cast<long>(cand.size());
        // Closest reference length; ties go to the shorter reference.
        long best_ref = static_cast<long>(refs[0].size());
        for (const auto& ref : refs) {
            const long len = static_cast<long>(ref.size());
            const long cur = std::labs(len - static_cast<long>(cand.size()));
            const long best = std::labs(best_ref - static_cast<long>(cand.size()));
            if (cur < best || (cur == best && len < best_ref)) best_ref = len;
        }
        ref_len += best_ref;

        for (int k = 1; k <= n; ++k) {
            const auto cand_grams = ngram_counts(cand, k);
            std::map<std::vector<std::string>, int> max_ref;
            for (const auto& ref : refs) {
                for (const auto& [gram, count] : ngram_counts(ref, k)) {
                    max_ref[gram] = std::max(max_ref[gram], count);
                }
            }
            for (const auto& [gram, count] : cand_grams) {
                total[static_cast<std::size_t>(k - 1)] += count;
                auto it = max_ref.find(gram);
                if (it != max_ref.end()) {
                    matched[static_cast<std::size_t>(k - 1)] += std::min(count, it->second);
                }
            }
        }
    }

    double log_precision = 0.0;
    for (int k = 0; k < n; ++k) {
        if (total[static_cast<std::size_t>(k)] == 0 || matched[static_cast<std::size_t>(k)] == 0) {
            return 0.0;
        }
        log_precision += std::log(static_cast<double>(matched[static_cast<std::size_t>(k)]) /
                                  static_cast<double>(total[static_cast<std::size_t>(k)]));
    }
    log_precision /= n;

    double brevity = 1.0;
    if (cand_len == 0) return 0.0;
    if (cand_len <= ref_len) {
        brevity = std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(cand_len));
    }
    return brevity * std::exp(log_precision);
}

double concept_recall(const std::vector<std::vector<std::string>>& captions,
                      const std::vector<std::vector<std::string>>& concept_sets) {
    if (captions.size() != concept_sets.size()) {
        throw ContractError("concept_recall: " + std::to_string(captions.size()) +
                            " captions vs " + std::to_string(concept_sets.size()) +
                            " concept sets");
    }
    if (captions.empty()) throw ContractError("concept_recall: empty input");
    double sum = 0.0;
    for (std::size_t i = 0; i < captions.size(); ++i) {
        const std::set<std::string> tokens(captions[i].begin(), captions[i].end());
        const std::set<std::string> concepts(concept_sets[i].begin(), concept_sets[i].end());
        if (concepts.empty()) {
            sum += 1.0;  // vacuous recall
            continue;
        }
        int hit = 0;
        for (const std::string& c : concepts) hit += tokens.count(c) ? 1 : 0;
        sum += static_cast<double>(hit) / static_cast<double>(concepts.size());
    }
    return sum / static_cast<double>(captions.size());
}

std::string EvalReport::to_key_values() const {
    std::ostringstream os;
    os.precision(17);
    os << "bleu1=" << bleu1 << '\n'
       << "bleu2=" << bleu2 << '\n'
       << "bleu3=" << bleu3 << '\n'
       << "bleu4=" << bleu4 << '\n'
       << "concept_recall=" << concept_recall << '\n';
    return os.str();
}

bool EvalReport::operator==(const EvalReport& other) const {
    return bleu1 == other.bleu1 && bleu2 == other.bleu2 && bleu3 == other.bleu3 &&
           bleu4 == other.bleu4 && concept_recall == other.concept_recall &&
           captions == other.captions;
}

} // namespace r2m
