#pragma once

#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace r2m {

// Token <-> id table with three reserved tokens at fixed ids.
class Vocabulary {
public:
    static constexpr int kStart = 0;
    static constexpr int kEnd = 1;
    static constexpr int kUnk = 2;

    static const std::string& start_token();
    static const std::string& end_token();
    static const std::string& unk_token();

    Vocabulary();

    // Adds a token if absent; returns its id either way. Reserved tokens
    // keep their fixed ids.
    int add(const std::string& token);
    // Returns the token id, or kUnk for unknown tokens.
    int id_of(const std::string& token) const;
    bool contains(const std::string& token) const;
    const std::string& token_of(int id) const;
    int size() const { return static_cast<int>(id_to_token_.size()); }

    std::vector<int> encode(const std::vector<std::string>& tokens) const;
    std::vector<std::string> decode(const std::vector<int>& ids) const;

    // File format: token TAB id, one per line.
    void save(const std::string& path) const;
    static Vocabulary load(const std::string& path);

private:
    std::unordered_map<std::string, int> token_to_id_;
    std::vector<std::string> id_to_token_;
};

// A visual concept with its detection score.
struct ScoredConcept {
    int id = 0;
    double score = 0.0;
};

// Ordered set of scored visual concepts; ids are unique, scores in [0,1].
struct ConceptSet {
    std::vector<ScoredConcept> items;

    void add(int id, double score);
    bool empty() const { return items.empty(); }
    std::size_t size() const { return items.size(); }
    std::vector<int> ids() const;
};

// Keeps detections that are in the dictionary and score at least the
// threshold (inclusive), preserving input order.
ConceptSet filter_concepts(const ConceptSet& detections,
                           const std::unordered_set<int>& dictionary,
                           double threshold);

// Lowercase whitespace tokenizer; the corpora here are machine generated.
std::vector<std::string> tokenize(const std::string& sentence);

} // namespace r2m
