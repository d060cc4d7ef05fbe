#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "qaforge/blend.hpp"
#include "qaforge/rng.hpp"

using namespace qaforge;

namespace {

blend::QualityScoredDoc doc(const std::string& id, double kd, double edu, size_t words = 20) {
    blend::QualityScoredDoc d;
    d.doc_id = id;
    std::ostringstream body;
    for (size_t i = 0; i < words; ++i) body << id << "w" << i << " ";
    d.body = body.str();
    d.knowledge_density_score = kd;
    d.educational_score = edu;
    d.token_count = words;
    return d;
}

synth::SynthesizedQA mcq(const std::string& id) {
    synth::SynthesizedQA qa;
    qa.qa_id = id;
    qa.type = synth::QuestionType::multiple_choice;
    qa.mcq.question = "Which value corresponds to " + id + "?";
    qa.mcq.options = {"w " + id, "x " + id, "y " + id, "z " + id};
    qa.mcq.answer_index = 1;
    return qa;
}

std::vector<blend::BlendRecord> synthetic_records(const std::string& source, size_t count,
                                                  size_t min_tokens, size_t max_tokens,
                                                  uint64_t seed) {
    Rng rng(seed);
    std::vector<blend::BlendRecord> records;
    for (size_t i = 0; i < count; ++i) {
        size_t tokens = min_tokens + rng.below(max_tokens - min_tokens + 1);
        std::ostringstream body;
        for (size_t t = 0; t < tokens; ++t) body << source << i << "t" << t << " ";
        records.push_back({body.str(), source, tokens});
    }
    return records;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

std::filesystem::path fresh_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("select_dual_criteria keeps only docs passing both criteria") {
    std::vector<blend::QualityScoredDoc> docs = {
        doc("both", 0.9, 0.9), doc("kd-only", 0.9, 0.1), doc("edu-only", 0.1, 0.9),
        doc("neither", 0.1, 0.1), doc("boundary", 0.5, 0.5)};
    blend::SelectionReport report;
    auto kept = blend::select_dual_criteria(docs, 0.5, 0.5, &report);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].doc_id == "both");
    CHECK(kept[1].doc_id == "boundary");  // thresholds are inclusive
    CHECK(report.input == 5);
    CHECK(report.kept == 2);
    CHECK(report.pass_kd == 3);
    CHECK(report.pass_edu == 3);
}

TEST_CASE("percentile_threshold admits the top fraction") {
    std::vector<double> scores;
    for (int i = 1; i <= 100; ++i) scores.push_back(i);  // 1..100
    // top 20% of 100 scores: 81..100 -> cutoff 81
    CHECK(blend::percentile_threshold(scores) == doctest::Approx(81.0));
    CHECK(blend::percentile_threshold(scores, 1.0) == doctest::Approx(1.0));
    size_t admitted = 0;
    double cut = blend::percentile_threshold(scores, 0.33);
    for (double s : scores)
        if (s >= cut) ++admitted;
    CHECK(admitted == 33);
    CHECK_THROWS_AS(blend::percentile_threshold({}, 0.2), std::invalid_argument);
    CHECK_THROWS_AS(blend::percentile_threshold({1.0}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(blend::percentile_threshold({1.0}, 1.5), std::invalid_argument);
}

TEST_CASE("format_qa renders MCQ options and letter answers; cot inserts reasoning") {
    auto qa = mcq("q1");
    auto plain = blend::format_qa(qa, blend::QaFormat::plain);
    CHECK(plain.find(qa.mcq.question) == 0);
    CHECK(plain.find("A. w q1") != std::string::npos);
    CHECK(plain.find("D. z q1") != std::string::npos);
    auto answer_pos = plain.find("Answer: B. x q1");
    CHECK(answer_pos != std::string::npos);

    CHECK_THROWS_AS(blend::format_qa(qa, blend::QaFormat::cot), blend::MissingCot);
    qa.cot = "Eliminate w, y, z.";
    auto cot = blend::format_qa(qa, blend::QaFormat::cot);
    auto reasoning_pos = cot.find(*qa.cot);
    REQUIRE(reasoning_pos != std::string::npos);
    CHECK(reasoning_pos < cot.find("Answer: B. x q1"));
    CHECK(reasoning_pos > cot.find(qa.mcq.question));
    // plain ignores an available cot
    CHECK(blend::format_qa(qa, blend::QaFormat::plain) == plain);
}

TEST_CASE("record builders count tokens and tag sources") {
    auto text = blend::make_text_records({doc("d1", 1, 1, 25)});
    REQUIRE(text.size() == 1);
    CHECK(text[0].source == "text");
    CHECK(text[0].tokens == 25);
    auto qa = blend::make_qa_records({mcq("q1")}, blend::QaFormat::plain);
    REQUIRE(qa.size() == 1);
    CHECK(qa[0].source == "qa");
    CHECK(qa[0].tokens == ingest::count_tokens(qa[0].text));
    CHECK(qa[0].tokens > 0);
}

TEST_CASE("manifest validation rejects bad ratios and shard sizes") {
    blend::BlendManifest m;
    CHECK_NOTHROW(m.validate());
    m.ratio_text = 0;
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);
    m.ratio_text = 9;
    m.shard_size_tokens = 0;
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);
}

TEST_CASE("1:1 blend meets ratio, drift, and token conservation") {
    auto text = synthetic_records("text", 3000, 20, 120, 1);
    auto qa = synthetic_records("qa", 3000, 20, 120, 2);
    blend::BlendManifest manifest;
    manifest.shard_size_tokens = 8000;
    manifest.rng_seed = 5;
    auto dir = fresh_dir("qaforge_blend_11");
    auto report = blend::blend_corpora(text, qa, manifest, dir);

    CHECK(report.ratio_within_1pct);
    CHECK(std::abs(report.achieved_ratio - 1.0) <= 0.01 + 1e-12);
    CHECK(report.drift_ok);
    CHECK(report.max_boundary_drift <= manifest.drift_bound);
    CHECK(report.total_tokens == report.text_tokens + report.qa_tokens);
    CHECK(report.shard_count == report.shard_paths.size());
    CHECK(report.shard_count > 1);

    // conservation: every emitted record's tokens equals its source record
    size_t sum = 0, records = 0;
    for (const auto& path : report.shard_paths) {
        for_each_jsonl(path, [&](size_t, const json& j, const std::string&) {
            CHECK(j.at("tokens").get<size_t>() ==
                  ingest::count_tokens(j.at("text").get<std::string>()));
            sum += j.at("tokens").get<size_t>();
            ++records;
        });
    }
    CHECK(sum == report.total_tokens);
    CHECK(records == report.text_records + report.qa_records);
}

TEST_CASE("9:1 blend meets the skewed ratio within 1%") {
    auto text = synthetic_records("text", 6000, 20, 120, 3);
    auto qa = synthetic_records("qa", 700, 20, 120, 4);
    blend::BlendManifest manifest;
    manifest.ratio_text = 9;
    manifest.ratio_qa = 1;
    manifest.shard_size_tokens = 10000;
    manifest.rng_seed = 6;
    auto dir = fresh_dir("qaforge_blend_91");
    auto report = blend::blend_corpora(text, qa, manifest, dir);
    CHECK(report.ratio_within_1pct);
    CHECK(report.achieved_ratio == doctest::Approx(9.0).epsilon(0.01));
    CHECK(report.drift_ok);
    CHECK(report.total_tokens == report.text_tokens + report.qa_tokens);
}

TEST_CASE("blend is deterministic: reruns produce byte-identical shards") {
    auto text = synthetic_records("text", 500, 10, 60, 7);
    auto qa = synthetic_records("qa", 500, 10, 60, 8);
    blend::BlendManifest manifest;
    manifest.shard_size_tokens = 3000;
    manifest.rng_seed = 11;
    auto dir_a = fresh_dir("qaforge_blend_det_a");
    auto dir_b = fresh_dir("qaforge_blend_det_b");
    auto a = blend::blend_corpora(text, qa, manifest, dir_a);
    auto b = blend::blend_corpora(text, qa, manifest, dir_b);
    REQUIRE(a.shard_paths.size() == b.shard_paths.size());
    for (size_t i = 0; i < a.shard_paths.size(); ++i)
        CHECK(slurp(a.shard_paths[i]) == slurp(b.shard_paths[i]));
    auto ja = a.to_json(), jb = b.to_json();
    ja.erase("shards");  // paths differ by output dir; everything else must match
    jb.erase("shards");
    CHECK(ja.dump() == jb.dump());
}

TEST_CASE("records are atomic: no text is split across shards") {
    auto text = synthetic_records("text", 200, 50, 200, 9);
    auto qa = synthetic_records("qa", 200, 50, 200, 10);
    std::set<std::string> originals;
    for (const auto& r : text) originals.insert(r.text);
    for (const auto& r : qa) originals.insert(r.text);
    blend::BlendManifest manifest;
    manifest.shard_size_tokens = 2000;
    manifest.rng_seed = 12;
    auto dir = fresh_dir("qaforge_blend_atomic");
    auto report = blend::blend_corpora(text, qa, manifest, dir);
    for (const auto& path : report.shard_paths)
        for_each_jsonl(path, [&](size_t, const json& j, const std::string&) {
            CHECK(originals.count(j.at("text").get<std::string>()) == 1);
        });
}

TEST_CASE("exhausting one source stops the blend and names the shortfall") {
    auto text = synthetic_records("text", 20, 10, 20, 13);   // tiny
    auto qa = synthetic_records("qa", 2000, 10, 20, 14);     // ample
    blend::BlendManifest manifest;
    manifest.shard_size_tokens = 1000;
    manifest.rng_seed = 15;
    auto dir = fresh_dir("qaforge_blend_short");
    auto report = blend::blend_corpora(text, qa, manifest, dir);
    CHECK(report.shortfall == "text");
    CHECK_THROWS_AS(blend::blend_corpora({}, qa, manifest, dir), std::invalid_argument);
}
