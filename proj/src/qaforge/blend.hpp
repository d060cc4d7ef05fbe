#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qaforge/jsonio.hpp"
#include "qaforge/seeds.hpp"
#include "qaforge/synth.hpp"

namespace qaforge::blend {

struct QualityScoredDoc {
    std::string doc_id;
    std::string body;
    double knowledge_density_score = 0.0;
    double educational_score = 0.0;
    size_t token_count = 0;
};

struct SelectionReport {
    size_t input = 0;
    size_t kept = 0;
    size_t pass_kd = 0;   // pass the knowledge-density criterion alone
    size_t pass_edu = 0;  // pass the educational criterion alone

    json to_json() const;
};

// Keep iff knowledge_density_score >= kd_threshold AND educational_score >=
// edu_threshold (conjunctive dual criteria).
std::vector<QualityScoredDoc> select_dual_criteria(const std::vector<QualityScoredDoc>& docs,
                                             double kd_threshold, double edu_threshold,
                                             SelectionReport* report = nullptr);

// Score cutoff admitting (at least) the top `top_fraction` of the given
// scores; default matches the top-20% policy. Throws on empty input or a
// fraction outside (0, 1].
double percentile_threshold(std::vector<double> scores, double top_fraction = 0.20);

enum class QaFormat { plain, cot };

class MissingCot : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// plain: "{question}\n{answer}" with MCQ options listed in the question block
// and the answer rendered as "letter. option text"; cot inserts the reasoning
// block between question and answer. Throws MissingCot for cot without item.cot.
std::string format_qa(const synth::SynthesizedQA& item, QaFormat format);

struct BlendRecord {
    std::string text;
    std::string source;  // "text" | "qa"
    size_t tokens = 0;
};

std::vector<BlendRecord> make_text_records(const std::vector<QualityScoredDoc>& docs);
std::vector<BlendRecord> make_qa_records(const std::vector<synth::SynthesizedQA>& items,
                                         QaFormat format,
                                         const ingest::TokenCounter& counter = {});

struct BlendManifest {
    double ratio_text = 1.0;  // text : qa by tokens
    double ratio_qa = 1.0;
    size_t shard_size_tokens = 4194304;
    uint64_t rng_seed = 0;
    QaFormat qa_format = QaFormat::plain;
    double drift_bound = 0.02;  // checked at shard boundaries

    void validate() const;  // throws std::invalid_argument
};

struct BlendReport {
    size_t shard_count = 0;
    size_t text_tokens = 0;
    size_t qa_tokens = 0;
    size_t total_tokens = 0;
    size_t text_records = 0;
    size_t qa_records = 0;
    double achieved_ratio = 0.0;  // text_tokens / qa_tokens
    bool ratio_within_1pct = false;
    double max_boundary_drift = 0.0;  // |text share - target share|, worst shard
    bool drift_ok = true;
    std::string shortfall;  // "", "text", or "qa": which source ran dry
    std::vector<std::filesystem::path> shard_paths;

    json to_json() const;
};

// Deterministically shuffles both sources, interleaves records with a greedy
// deficit scheduler tracking the target token ratio, and writes ndjson shards
// {"text","source","tokens"} of ~shard_size_tokens each (records atomic).
// Stops when a source exhausts. Throws std::invalid_argument on empty sources.
BlendReport blend_corpora(std::vector<BlendRecord> text_records,
                          std::vector<BlendRecord> qa_records, const BlendManifest& manifest,
                          const std::filesystem::path& out_dir);

}  // namespace qaforge::blend
