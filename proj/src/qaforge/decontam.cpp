#include "qaforge/decontam.hpp"

#include <cmath>
#include <stdexcept>

#include "qaforge/util.hpp"

namespace qaforge::decontam {

NgramIndex::NgramIndex(int n) : n_(n) {
    if (n < 2) throw std::invalid_argument("NgramIndex: n must be >= 2");
}

uint64_t NgramIndex::hash_ngram(const std::vector<std::string>& tokens, size_t start, int n) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (size_t i = start; i < start + static_cast<size_t>(n); ++i) {
        h = util::fnv1a64(tokens[i], h);
        h = util::fnv1a64("\x1f", h);  // token separator
    }
    return h;
}

void NgramIndex::add_document(std::string_view text) {
    ++docs_;
    auto tokens = util::normalized_tokens(text);
    if (tokens.size() < static_cast<size_t>(n_)) return;
    for (size_t i = 0; i + static_cast<size_t>(n_) <= tokens.size(); ++i)
        hashes_.insert(hash_ngram(tokens, i, n_));
}

std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::clean: return "clean";
        case Verdict::ngram_hit: return "ngram_hit";
        case Verdict::embedding_hit: return "embedding_hit";
    }
    return "clean";
}

json ContaminationReport::to_json() const {
    json j;
    j["record_id"] = record_id;
    j["verdict"] = verdict_name(verdict);
    if (matched_span) j["matched_span"] = {matched_span->first, matched_span->second};
    if (similarity) j["similarity"] = *similarity;
    return j;
}

NgramIndex build_ngram_index(const std::vector<std::string>& benchmark_docs, int n) {
    if (benchmark_docs.empty()) throw std::invalid_argument("empty benchmark");
    NgramIndex index(n);
    for (const auto& doc : benchmark_docs) index.add_document(doc);
    return index;
}

ContaminationReport check_exact(std::string_view record_id, std::string_view text,
                                const NgramIndex& index) {
    ContaminationReport report;
    report.record_id = std::string(record_id);
    auto tokens = util::normalized_tokens(text);
    const int n = index.n();
    if (tokens.size() >= static_cast<size_t>(n)) {
        for (size_t i = 0; i + static_cast<size_t>(n) <= tokens.size(); ++i) {
            if (index.contains(NgramIndex::hash_ngram(tokens, i, n))) {
                report.verdict = Verdict::ngram_hit;
                report.matched_span = {i, i + static_cast<size_t>(n)};
                return report;
            }
        }
    }
    return report;
}

namespace {

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return 0.0;
    double dot = 0;
    for (size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
    return dot;  // inputs are unit vectors
}

}  // namespace

ContaminationReport check_embedding(std::string_view record_id, std::string_view text,
                                    const std::vector<std::vector<double>>& benchmark_vectors,
                                    const Embedder& embedder, double threshold) {
    if (!embedder) throw std::runtime_error("embedder unavailable");
    if (threshold <= 0.0 || threshold > 1.0)
        throw std::invalid_argument("embedding threshold must be in (0, 1]");

    ContaminationReport report;
    report.record_id = std::string(record_id);
    auto vec = embedder(text);
    double best = 0.0;
    for (const auto& bv : benchmark_vectors) best = std::max(best, cosine(vec, bv));
    report.similarity = best;
    if (best >= threshold) report.verdict = Verdict::embedding_hit;
    return report;
}

Embedder make_hash_embedder(size_t dim) {
    return [dim](std::string_view text) {
        std::vector<double> v(dim, 0.0);
        for (const auto& tok : util::normalized_tokens(text))
            v[util::fnv1a64(tok) % dim] += 1.0;
        double norm = 0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        if (norm > 0)
            for (double& x : v) x /= norm;
        return v;
    };
}

FilterStats filter_corpus(const std::vector<std::pair<std::string, std::string>>& records,
                          const NgramIndex& index,
                          const std::function<void(const std::string&)>& clean_sink,
                          JsonlWriter* report, const EmbedConfig* embed) {
    FilterStats stats;
    for (const auto& [id, text] : records) {
        ++stats.input;
        ContaminationReport r = check_exact(id, text, index);
        if (r.verdict == Verdict::clean && embed != nullptr) {
            r = check_embedding(id, text, embed->benchmark_vectors, embed->embedder,
                                embed->threshold);
        }
        if (report) report->write(r.to_json());
        if (r.verdict == Verdict::clean) {
            ++stats.clean;
            clean_sink(id);
        } else {
            ++stats.flagged;
        }
    }
    return stats;
}

}  // namespace qaforge::decontam
