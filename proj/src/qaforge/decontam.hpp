#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "qaforge/jsonio.hpp"

namespace qaforge::decontam {

// Exact n-gram membership index over benchmark texts. N-grams are taken over
// the normal form: lowercase, punctuation stripped, whitespace collapsed; the
// normalization tag is recorded so mismatched indices are rejected.
class NgramIndex {
public:
    static constexpr int kDefaultN = 10;
    static constexpr std::string_view kNormalization = "lower+strip_punct+collapse_ws/v1";

    explicit NgramIndex(int n = kDefaultN);

    void add_document(std::string_view text);
    bool contains(uint64_t ngram_hash) const { return hashes_.count(ngram_hash) > 0; }

    // Hash of one normalized n-gram (n consecutive tokens).
    static uint64_t hash_ngram(const std::vector<std::string>& tokens, size_t start, int n);

    int n() const { return n_; }
    size_t size() const { return hashes_.size(); }
    size_t doc_count() const { return docs_; }
    std::string normalization() const { return std::string(kNormalization); }

private:
    int n_;
    size_t docs_ = 0;
    std::unordered_set<uint64_t> hashes_;
};

enum class Verdict { clean, ngram_hit, embedding_hit };

struct ContaminationReport {
    std::string record_id;
    Verdict verdict = Verdict::clean;
    std::optional<std::pair<size_t, size_t>> matched_span;  // token offsets [start, end)
    std::optional<double> similarity;

    json to_json() const;
};

std::string verdict_name(Verdict v);

// Streams benchmark docs (one text per element) into an index.
// Throws std::invalid_argument on n < 2 or an empty benchmark.
NgramIndex build_ngram_index(const std::vector<std::string>& benchmark_docs,
                             int n = NgramIndex::kDefaultN);

// ngram_hit iff any n-gram of `text` is in the index; first span reported.
ContaminationReport check_exact(std::string_view record_id, std::string_view text,
                                const NgramIndex& index);

using Embedder = std::function<std::vector<double>(std::string_view)>;

// embedding_hit iff max cosine similarity against benchmark_vectors >= threshold.
ContaminationReport check_embedding(std::string_view record_id, std::string_view text,
                                    const std::vector<std::vector<double>>& benchmark_vectors,
                                    const Embedder& embedder, double threshold);

// Deterministic feature-hash embedder (unit vectors); the pluggable default.
Embedder make_hash_embedder(size_t dim = 256);

struct EmbedConfig {
    std::vector<std::vector<double>> benchmark_vectors;
    Embedder embedder;
    double threshold = 0.95;
};

struct FilterStats {
    size_t input = 0;
    size_t clean = 0;
    size_t flagged = 0;
};

// Routes each (id, text) record through exact then (optionally) embedding
// checks. Clean records go to `clean_sink`; every record's report goes to
// `report` when given. clean + flagged == input.
FilterStats filter_corpus(
    const std::vector<std::pair<std::string, std::string>>& records, const NgramIndex& index,
    const std::function<void(const std::string&)>& clean_sink,
    JsonlWriter* report = nullptr, const EmbedConfig* embed = nullptr);

}  // namespace qaforge::decontam
