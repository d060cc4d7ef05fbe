#include "qaforge/blend.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "qaforge/rng.hpp"
#include "qaforge/util.hpp"

namespace qaforge::blend {

json SelectionReport::to_json() const {
    json j;
    j["input"] = input;
    j["kept"] = kept;
    j["pass_kd"] = pass_kd;
    j["pass_edu"] = pass_edu;
    return j;
}

std::vector<QualityScoredDoc> select_dual_criteria(const std::vector<QualityScoredDoc>& docs,
                                             double kd_threshold, double edu_threshold,
                                             SelectionReport* report) {
    std::vector<QualityScoredDoc> kept;
    SelectionReport stats;
    stats.input = docs.size();
    for (const auto& doc : docs) {
        bool kd = doc.knowledge_density_score >= kd_threshold;
        bool edu = doc.educational_score >= edu_threshold;
        if (kd) ++stats.pass_kd;
        if (edu) ++stats.pass_edu;
        if (kd && edu) {
            ++stats.kept;
            kept.push_back(doc);
        }
    }
    if (report) *report = stats;
    return kept;
}

double percentile_threshold(std::vector<double> scores, double top_fraction) {
    if (scores.empty()) throw std::invalid_argument("no scores");
    if (top_fraction <= 0.0 || top_fraction > 1.0)
        throw std::invalid_argument("top_fraction outside (0, 1]");
    std::sort(scores.begin(), scores.end(), std::greater<>());
    size_t k = static_cast<size_t>(std::ceil(top_fraction * static_cast<double>(scores.size())));
    k = std::clamp<size_t>(k, 1, scores.size());
    return scores[k - 1];
}

std::string format_qa(const synth::SynthesizedQA& item, QaFormat format) {
    std::string question = item.question();
    if (item.type == synth::QuestionType::multiple_choice) {
        for (size_t i = 0; i < item.mcq.options.size(); ++i)
            question += "\n" + std::string(1, static_cast<char>('A' + i)) + ". " +
                        item.mcq.options[i];
    }
    std::string answer = "Answer: " + item.answer_text();
    if (format == QaFormat::plain) return question + "\n" + answer;
    if (!item.cot) throw MissingCot("item " + item.qa_id + " has no CoT block");
    return question + "\n" + *item.cot + "\n" + answer;
}

std::vector<BlendRecord> make_text_records(const std::vector<QualityScoredDoc>& docs) {
    std::vector<BlendRecord> records;
    records.reserve(docs.size());
    for (const auto& doc : docs) {
        if (doc.token_count == 0) throw std::invalid_argument("doc " + doc.doc_id + " has zero tokens");
        records.push_back({doc.body, "text", doc.token_count});
    }
    return records;
}

std::vector<BlendRecord> make_qa_records(const std::vector<synth::SynthesizedQA>& items,
                                         QaFormat format, const ingest::TokenCounter& counter) {
    std::vector<BlendRecord> records;
    records.reserve(items.size());
    for (const auto& item : items) {
        std::string text = format_qa(item, format);
        size_t tokens = static_cast<size_t>(ingest::count_tokens(text, counter));
        records.push_back({std::move(text), "qa", std::max<size_t>(tokens, 1)});
    }
    return records;
}

void BlendManifest::validate() const {
    if (ratio_text <= 0 || ratio_qa <= 0)
        throw std::invalid_argument("ratio components must be positive");
    if (shard_size_tokens == 0) throw std::invalid_argument("shard_size_tokens must be positive");
    if (drift_bound <= 0) throw std::invalid_argument("drift_bound must be positive");
}

json BlendReport::to_json() const {
    json j;
    j["shard_count"] = shard_count;
    j["text_tokens"] = text_tokens;
    j["qa_tokens"] = qa_tokens;
    j["total_tokens"] = total_tokens;
    j["text_records"] = text_records;
    j["qa_records"] = qa_records;
    j["achieved_ratio"] = achieved_ratio;
    j["ratio_within_1pct"] = ratio_within_1pct;
    j["max_boundary_drift"] = max_boundary_drift;
    j["drift_ok"] = drift_ok;
    j["shortfall"] = shortfall;
    json paths = json::array();
    for (const auto& p : shard_paths) paths.push_back(p.string());
    j["shards"] = paths;
    return j;
}

BlendReport blend_corpora(std::vector<BlendRecord> text_records,
                          std::vector<BlendRecord> qa_records, const BlendManifest& manifest,
                          const std::filesystem::path& out_dir) {
    manifest.validate();
    if (text_records.empty()) throw std::invalid_argument("empty text source");
    if (qa_records.empty()) throw std::invalid_argument("empty qa source");
    std::filesystem::create_directories(out_dir);

    Rng text_rng(util::fnv1a64("blend/text", manifest.rng_seed));
    Rng qa_rng(util::fnv1a64("blend/qa", manifest.rng_seed));
    text_rng.shuffle(text_records);
    qa_rng.shuffle(qa_records);

    double target_text_share = manifest.ratio_text / (manifest.ratio_text + manifest.ratio_qa);

    BlendReport report;
    size_t ti = 0, qi = 0;
    size_t shard_tokens = 0;
    std::unique_ptr<JsonlWriter> shard;
    auto shard_path = [&](size_t index) {
        char name[32];
        std::snprintf(name, sizeof(name), "shard-%05zu.jsonl", index);
        return out_dir / name;
    };
    auto note_boundary = [&]() {
        double share = static_cast<double>(report.text_tokens) /
                       static_cast<double>(report.total_tokens);
        report.max_boundary_drift =
            std::max(report.max_boundary_drift, std::fabs(share - target_text_share));
    };

    while (ti < text_records.size() && qi < qa_records.size()) {
        // Greedy deficit: emit from the source whose consumed tokens lag its
        // target proportion the most.
        double text_deficit = target_text_share * static_cast<double>(report.total_tokens) -
                              static_cast<double>(report.text_tokens);
        const BlendRecord& rec = text_deficit >= 0 ? text_records[ti] : qa_records[qi];
        bool is_text = text_deficit >= 0;

        if (!shard) {
            report.shard_paths.push_back(shard_path(report.shard_count));
            shard = std::make_unique<JsonlWriter>(report.shard_paths.back());
            ++report.shard_count;
            shard_tokens = 0;
        }

        json j;
        j["text"] = rec.text;
        j["source"] = rec.source;
        j["tokens"] = rec.tokens;
        shard->write(j);
        shard_tokens += rec.tokens;
        report.total_tokens += rec.tokens;
        if (is_text) {
            report.text_tokens += rec.tokens;
            ++report.text_records;
            ++ti;
        } else {
            report.qa_tokens += rec.tokens;
            ++report.qa_records;
            ++qi;
        }

        if (shard_tokens >= manifest.shard_size_tokens) {
            shard.reset();
            note_boundary();
        }
    }
    if (shard) {
        shard.reset();
        note_boundary();
    }

    if (ti >= text_records.size() && qi < qa_records.size()) report.shortfall = "text";
    if (qi >= qa_records.size() && ti < text_records.size()) report.shortfall = "qa";

    if (report.qa_tokens > 0)
        report.achieved_ratio =
            static_cast<double>(report.text_tokens) / static_cast<double>(report.qa_tokens);
    double target_ratio = manifest.ratio_text / manifest.ratio_qa;
    report.ratio_within_1pct =
        report.qa_tokens > 0 &&
        std::fabs(report.achieved_ratio - target_ratio) <= 0.01 * target_ratio;
    report.drift_ok = report.max_boundary_drift <= manifest.drift_bound;
    return report;
}

}  // namespace qaforge::blend
