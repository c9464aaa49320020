#include "r2m/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "r2m/errors.hpp"

namespace r2m {

const std::string& Vocabulary::start_token() {
    static const std::string t = "<#start>";
    return t;
}

const std::string& Vocabulary::end_token() {
    static const std::string t = "<#end>";
    return t;
}

const std::string& Vocabulary::unk_token() {
    static const std::string t = "<UNK>";
    return t;
}

Vocabulary::Vocabulary() {
    add(start_token());
    add(end_token());
    add(unk_token());
}

int Vocabulary::add(const std::string& token) {
    auto it = token_to_id_.find(token);
    if (it != token_to_id_.end()) return it->second;
    const int id = static_cast<int>(id_to_token_.size());
    token_to_id_.emplace(token, id);
    id_to_token_.push_back(token);
    return id;
}

int Vocabulary::id_of(const std::string& token) const {
    auto it = token_to_id_.find(token);
    return it == token_to_id_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(const std::string& token) const {
    return token_to_id_.count(token) > 0;
}

const std::string& Vocabulary::token_of(int id) const {
    if (id < 0 || id >= size()) {
        throw VocabError("vocabulary: id " + std::to_string(id) + " out of range [0," +
                         std::to_string(size()) + ")");
    }
    return id_to_token_[static_cast<std::size_t>(id)];
}

std::vector<int> Vocabulary::encode(const std::vector<std::string>& tokens) const {
    std::vector<int> ids;
    ids.reserve(tokens.size());
    for (const std::string& t : tokens) ids.push_back(id_of(t));
    return ids;
}

std::vector<std::string> Vocabulary::decode(const std::vector<int>& ids) const {
    std::vector<std::string> tokens;
    tokens.reserve(ids.size());
    for (int id : ids) tokens.push_back(token_of(id));
    return tokens;
}

void Vocabulary::save(const std::string& path) const {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw DataError("vocabulary: cannot open '" + path + "' for writing");
    for (int id = 0; id < size(); ++id) {
        os << id_to_token_[static_cast<std::size_t>(id)] << '\t' << id << '\n';
    }
    if (!os) throw DataError("vocabulary: write failed for '" + path + "'");
}

Vocabulary Vocabulary::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("vocabulary: cannot open '" + path + "'");
    std::vector<std::pair<std::string, int>> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos) {
            throw DataError("vocabulary: line " + std::to_string(lineno) + ": missing tab");
        }
        const std::string token = line.substr(0, tab);
        int id;
        try {
            id = std::stoi(line.substr(tab + 1));
        } catch (const std::exception&) {
            throw DataError("vocabulary: line " + std::to_string(lineno) + ": bad id");
        }
        rows.emplace_back(token, id);
    }
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.second < b.second; });
    Vocabulary v;
    for (const auto& [token, id] : rows) {
        if (id < 3) {
            // Reserved ids; verify they match.
            if (v.token_of(id) != token) {
                throw DataError("vocabulary: reserved id " + std::to_string(id) +
                                " bound to unexpected token '" + token + "'");
            }
            continue;
        }
        const int got = v.add(token);
        if (got != id) {
            throw DataError("vocabulary: non-contiguous id " + std::to_string(id) +
                            " for token '" + token + "'");
        }
    }
    return v;
}

void ConceptSet::add(int id, double score) {
    if (score < 0.0 || score > 1.0) {
        throw ContractError("concept set: score " + std::to_string(score) +
                            " outside [0,1]");
    }
    for (const ScoredConcept& c : items) {
        if (c.id == id) return;  // ids stay unique; first occurrence wins
    }
    items.push_back({id, score});
}

std::vector<int> ConceptSet::ids() const {
    std::vector<int> out;
    out.reserve(items.size());
    for (const ScoredConcept& c : items) out.push_back(c.id);
    return out;
}

ConceptSet filter_concepts(const ConceptSet& detections,
                           const std::unordered_set<int>& dictionary, double threshold) {
    if (threshold < 0.0 || threshold > 1.0) {
        throw ContractError("filter_concepts: threshold " + std::to_string(threshold) +
                            " outside [0,1]");
    }
    ConceptSet kept;
    for (const ScoredConcept& c : detections.items) {
        if (c.score >= threshold && dictionary.count(c.id)) kept.items.push_back(c);
    }
    return kept;
}

std::vector<std::string> tokenize(const std::string& sentence) {
    std::vector<std::string> tokens;
    std::istringstream is(sentence);
    std::string tok;
    while (is >> tok) {
        std::transform(tok.begin(), tok.end(), tok.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        tokens.push_back(tok);
    }
    return tokens;
}

} // namespace r2m
