#pragma once

// Independent reference implementations used to check module outputs.
// These deliberately share no code with the library paths they verify.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "r2m/tensor.hpp"

namespace oracle {

// Naive triple-loop matrix product.
inline r2m::Tensor matmul(const r2m::Tensor& a, const r2m::Tensor& b) {
    r2m::Tensor out = r2m::Tensor::zeros({a.rows(), b.cols()});
    for (int i = 0; i < a.rows(); ++i) {
        for (int j = 0; j < b.cols(); ++j) {
            double s = 0.0;
            for (int k = 0; k < a.cols(); ++k) s += a.at(i, k) * b.at(k, j);
            out.at(i, j) = s;
        }
    }
    return out;
}

// Hinge triplet loss with hardest in-batch negatives by full enumeration.
// Per-item terms are added before accumulating so the sum matches the
// module's reduction order bit for bit.
inline double triplet_loss(const r2m::Tensor& S, double margin) {
    const int batch = S.rows();
    double total = 0.0;
    for (int i = 0; i < batch; ++i) {
        double hardest_image = -std::numeric_limits<double>::infinity();
        double hardest_caption = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < batch; ++j) {
            if (j == i) continue;
            hardest_image = std::max(hardest_image, S.at(j, i));
            hardest_caption = std::max(hardest_caption, S.at(i, j));
        }
        total += std::max(0.0, margin - S.at(i, i) + hardest_image) +
                 std::max(0.0, margin - S.at(i, i) + hardest_caption);
    }
    return total / batch;
}

// Corpus BLEU built on string-joined n-grams instead of token vectors.
inline double bleu(const std::vector<std::vector<std::string>>& candidates,
                   const std::vector<std::vector<std::vector<std::string>>>& references,
                   int n) {
    auto grams = [](const std::vector<std::string>& tokens, int k) {
        std::map<std::string, int> out;
        for (int i = 0; i + k <= static_cast<int>(tokens.size()); ++i) {
            std::string joined;
            for (int j = 0; j < k; ++j) {
                joined += tokens[static_cast<std::size_t>(i + j)];
                joined += '\x1f';
            }
            ++out[joined];
        }
        return out;
    };

    long cand_len = 0, ref_len = 0;
    std::vector<long> matched(static_cast<std::size_t>(n), 0), total(static_cast<std::size_t>(n), 0);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        cand_len += static_cast<long>(candidates[i].size());
        long best = static_cast<long>(references[i][0].size());
        for (const auto& ref : references[i]) {
            long len = static_cast<long>(ref.size());
            long cur_diff = std::labs(len - static_cast<long>(candidates[i].size()));
            long best_diff = std::labs(best - static_cast<long>(candidates[i].size()));
            if (cur_diff < best_diff || (cur_diff == best_diff && len < best)) best = len;
        }
        ref_len += best;
        for (int k = 1; k <= n; ++k) {
            auto cg = grams(candidates[i], k);
            std::map<std::string, int> best_ref;
            for (const auto& ref : references[i]) {
                for (const auto& [gram, c] : grams(ref, k)) {
                    best_ref[gram] = std::max(best_ref[gram], c);
                }
            }
            for (const auto& [gram, c] : cg) {
                total[static_cast<std::size_t>(k - 1)] += c;
                auto it = best_ref.find(gram);
                if (it != best_ref.end()) {
                    matched[static_cast<std::size_t>(k - 1)] += std::min(c, it->second);
                }
            }
        }
    }
    double logp = 0.0;
    for (int k = 0; k < n; ++k) {
        if (matched[static_cast<std::size_t>(k)] == 0) return 0.0;
        logp += std::log(static_cast<double>(matched[static_cast<std::size_t>(k)]) /
                         static_cast<double>(total[static_cast<std::size_t>(k)]));
    }
    const double bp =
        cand_len > ref_len
            ? 1.0
            : std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(cand_len));
    return bp * std::exp(logp / n);
}

} // namespace oracle
