#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "qaforge/prompts.hpp"
#include "qaforge/synth.hpp"
#include "qaforge/util.hpp"
#include "qaforge/vocab.hpp"

using namespace qaforge;

namespace {

ingest::SeedRecord make_seed(const std::string& id) {
    ingest::SeedRecord seed;
    seed.seed_id = id;
    seed.source_kind = ingest::SourceKind::qa_pair;
    seed.question = "Seed question for " + id + "?";
    seed.answer = "Seed answer for " + id;
    seed.token_count = 8;
    return seed;
}

synth::SynthesisJob make_job(const std::string& seed_ref, synth::Path path,
                             synth::QuestionType qtype = synth::QuestionType::multiple_choice,
                             int n = 10) {
    synth::SynthesisJob job;
    job.seed_ref = seed_ref;
    job.path = path;
    job.role = path == synth::Path::high_difficulty ? synth::Role::graduate
                                                    : synth::Role::college;
    job.question_type = qtype;
    job.n = n;
    return job;
}

}  // namespace

TEST_CASE("multi-grade MCQ prompt carries role, count, and format constraints") {
    auto seed = make_seed("s1");
    auto job = make_job("s1", synth::Path::multi_grade);
    auto req = synth::render_prompt(job, seed);
    CHECK(util::contains(req.user_text, std::string(prompts::kSynthesisMarker)));
    CHECK(util::contains(req.user_text, std::string(prompts::kMcqConstraintMarker)));
    CHECK(!util::contains(req.user_text, std::string(prompts::kBoosterMarker)));
    CHECK(util::contains(req.user_text, seed.question));
    CHECK(util::contains(req.user_text, "10"));
    CHECK(util::contains(req.user_text, "college"));
}

TEST_CASE("high-difficulty prompt carries the booster block and graduate role") {
    auto seed = make_seed("s1");
    auto job = make_job("s1", synth::Path::high_difficulty);
    auto req = synth::render_prompt(job, seed);
    CHECK(util::contains(req.user_text, std::string(prompts::kBoosterMarker)));
    CHECK(util::contains(req.user_text, "graduate"));
}

TEST_CASE("essay prompt forbids open-ended questions instead of MCQ constraints") {
    auto seed = make_seed("s1");
    auto job = make_job("s1", synth::Path::multi_grade, synth::QuestionType::essay);
    auto req = synth::render_prompt(job, seed);
    CHECK(util::contains(req.user_text, std::string(prompts::kEssayConstraintMarker)));
    CHECK(!util::contains(req.user_text, std::string(prompts::kMcqConstraintMarker)));
}

TEST_CASE("job validation: high_difficulty requires graduate role; n bounds") {
    auto job = make_job("s1", synth::Path::high_difficulty);
    CHECK_NOTHROW(job.validate());
    job.role = synth::Role::high_school;
    CHECK_THROWS_AS(job.validate(), std::invalid_argument);
    job = make_job("s1", synth::Path::multi_grade);
    job.n = 0;
    CHECK_THROWS_AS(job.validate(), std::invalid_argument);
    job.n = 10;
    job.seed_ref = "";
    CHECK_THROWS_AS(job.validate(), std::invalid_argument);
}

TEST_CASE("parse_items accepts a well-formed 10-item MCQ array") {
    json arr = json::array();
    for (int i = 0; i < 10; ++i) {
        arr.push_back({{"question", "Q" + std::to_string(i) + "?"},
                       {"options", {"o1-" + std::to_string(i), "o2-" + std::to_string(i),
                                    "o3-" + std::to_string(i), "o4-" + std::to_string(i)}},
                       {"answer_index", i % 4}});
    }
    auto parsed = synth::parse_items(arr.dump(), synth::QuestionType::multiple_choice, 10);
    CHECK(parsed.error.empty());
    CHECK(parsed.mcq_items.size() == 10);
    CHECK(parsed.rejected.empty());
    CHECK(!parsed.count_mismatch);
}

TEST_CASE("parse_items rejects malformed items with per-item reasons") {
    json arr = json::array();
    arr.push_back({{"question", "ok?"},
                   {"options", {"a", "b", "c", "d"}},
                   {"answer_index", 0}});
    arr.push_back({{"question", "three options"},
                   {"options", {"a", "b", "c"}},
                   {"answer_index", 0}});
    arr.push_back({{"question", "bad index"},
                   {"options", {"a", "b", "c", "d"}},
                   {"answer_index", 7}});
    arr.push_back({{"question", "dup options"},
                   {"options", {"same", "Same!", "c", "d"}},
                   {"answer_index", 0}});
    auto parsed = synth::parse_items(arr.dump(), synth::QuestionType::multiple_choice, 4);
    CHECK(parsed.mcq_items.size() == 1);
    REQUIRE(parsed.rejected.size() == 3);
    CHECK(parsed.rejected[0].reason == "option count 3 != 4");
    CHECK(!parsed.count_mismatch);  // the array held the expected 4 elements
    auto short_parse = synth::parse_items(arr.dump(), synth::QuestionType::multiple_choice, 7);
    CHECK(short_parse.count_mismatch);  // expected 7, saw 4
}

TEST_CASE("parse_items essay: empty answers rejected, long answers rejected") {
    json arr = json::array();
    arr.push_back({{"question", "Explain X."}, {"solution", "Because."}, {"answer", "X"}});
    arr.push_back({{"question", "Explain Y."}, {"solution", "Because."}, {"answer", ""}});
    std::string huge;
    for (int i = 0; i < 200; ++i) huge += "word ";
    arr.push_back({{"question", "Explain Z."}, {"solution", "Because."}, {"answer", huge}});
    auto parsed = synth::parse_items(arr.dump(), synth::QuestionType::essay, 3);
    CHECK(parsed.essay_items.size() == 1);
    CHECK(parsed.rejected.size() == 2);
}

TEST_CASE("parse_items with no array at all reports a whole-response error") {
    auto parsed = synth::parse_items("I refuse to answer.", synth::QuestionType::multiple_choice, 10);
    CHECK(!parsed.error.empty());
    CHECK(parsed.mcq_items.empty());
}

TEST_CASE("SamplerWeights defaults: STEM x3; high-difficulty boosts H4/H5") {
    auto mg = synth::SamplerWeights::defaults_for(synth::Path::multi_grade);
    CHECK(mg.weight_for("Mathematics", 2) == doctest::Approx(3.0));
    CHECK(mg.weight_for("Philosophy", 2) == doctest::Approx(1.0));
    CHECK(mg.weight_for("Mathematics", 5) == doctest::Approx(3.0));

    auto hd = synth::SamplerWeights::defaults_for(synth::Path::high_difficulty);
    CHECK(hd.weight_for("Philosophy", 4) == doctest::Approx(2.0));
    CHECK(hd.weight_for("Philosophy", 5) == doctest::Approx(3.0));
    CHECK(hd.weight_for("Mathematics", 5) == doctest::Approx(9.0));
    CHECK(hd.weight_for("Philosophy", 1) == doctest::Approx(1.0));
}

TEST_CASE("weighted sampling recovers a 3x boost within 3 sigma") {
    std::vector<synth::AnnotatedSeed> pool;
    for (int i = 0; i < 200; ++i) {
        synth::AnnotatedSeed a;
        a.seed = make_seed("s" + std::to_string(i));
        a.discipline = i < 100 ? "Mathematics" : "Philosophy";
        a.h_level = 2;
        pool.push_back(a);
    }
    auto weights = synth::SamplerWeights::defaults_for(synth::Path::multi_grade);
    size_t draws = 100000;
    auto picked = synth::sample_seeds_weighted(pool, weights, draws, 31);
    size_t stem = 0;
    for (size_t idx : picked)
        if (pool[idx].discipline == "Mathematics") ++stem;
    double share = double(stem) / draws;
    double expect = 0.75;  // 3:1 weight, equal pool halves
    double sigma = std::sqrt(expect * (1 - expect) / draws);
    CHECK(std::abs(share - expect) < 3 * sigma);
}

TEST_CASE("weighted sampling from a single stratum returns only that stratum") {
    std::vector<synth::AnnotatedSeed> pool;
    synth::AnnotatedSeed a;
    a.seed = make_seed("only");
    a.discipline = "History";
    a.h_level = 1;
    pool.push_back(a);
    auto picked = synth::sample_seeds_weighted(pool, {}, 50, 1);
    CHECK(picked.size() == 50);
    for (size_t idx : picked) CHECK(idx == 0);
    CHECK_THROWS_AS(synth::sample_seeds_weighted({}, {}, 5, 1), std::runtime_error);
}

TEST_CASE("sampling without replacement yields distinct indices, deterministic") {
    std::vector<synth::AnnotatedSeed> pool;
    for (int i = 0; i < 40; ++i) {
        synth::AnnotatedSeed a;
        a.seed = make_seed("s" + std::to_string(i));
        a.discipline = "Physics";
        a.h_level = 3;
        pool.push_back(a);
    }
    auto a = synth::sample_seeds_weighted(pool, {}, 20, 8, false);
    auto b = synth::sample_seeds_weighted(pool, {}, 20, 8, false);
    CHECK(a == b);
    std::set<size_t> distinct(a.begin(), a.end());
    CHECK(distinct.size() == 20);
}

TEST_CASE("run_synthesis: 100 jobs x n=10 produce 1000 items with total lineage") {
    llm::MockOptions opts;
    opts.behavior = llm::MockBehavior::scripted_json;
    auto gw = llm::make_mock_gateway(17, opts);

    std::map<std::string, ingest::SeedRecord> seeds;
    std::vector<synth::SynthesisJob> jobs;
    for (int i = 0; i < 100; ++i) {
        std::string id = "s" + std::to_string(i);
        seeds[id] = make_seed(id);
        jobs.push_back(make_job(id, i % 2 == 0 ? synth::Path::multi_grade
                                               : synth::Path::high_difficulty));
    }
    synth::SynthesisStats stats;
    auto items = synth::run_synthesis(jobs, seeds, *gw, &stats);
    CHECK(stats.jobs == 100);
    CHECK(stats.failed_jobs == 0);
    CHECK(items.size() == 1000);

    std::set<std::string> ids;
    for (const auto& item : items) {
        ids.insert(item.qa_id);
        CHECK(seeds.count(item.lineage.seed_id) == 1);
        CHECK(item.lineage.prompt_hash != 0);
        REQUIRE(item.mcq.options.size() == 4);
        CHECK(item.mcq.answer_index >= 0);
        CHECK(item.mcq.answer_index < 4);
    }
    CHECK(ids.size() == 1000);  // qa_ids globally unique

    // rerun against a fresh identically-seeded mock: byte-identical serialization
    auto gw2 = llm::make_mock_gateway(17, opts);
    auto again = synth::run_synthesis(jobs, seeds, *gw2);
    REQUIRE(again.size() == items.size());
    for (size_t i = 0; i < items.size(); ++i)
        CHECK(items[i].to_json().dump() == again[i].to_json().dump());
}

TEST_CASE("an unparsable completion fails the job, not the run") {
    llm::MockOptions opts;
    opts.handler = [](const llm::PromptRequest& r) -> std::string {
        if (util::contains(r.user_text, "Seed question for bad?")) return "garbage";
        llm::MockOptions scripted;
        scripted.behavior = llm::MockBehavior::scripted_json;
        llm::MockBackend inner(17, scripted);
        llm::BackendProfile profile;
        profile.endpoint_url = "mock://local";
        profile.model_id = "mock";
        return inner.generate(r, profile);
    };
    auto gw = llm::make_mock_gateway(17, opts);
    std::map<std::string, ingest::SeedRecord> seeds = {{"good", make_seed("good")},
                                                       {"bad", make_seed("bad")}};
    std::vector<synth::SynthesisJob> jobs = {make_job("good", synth::Path::multi_grade),
                                             make_job("bad", synth::Path::multi_grade)};
    synth::SynthesisStats stats;
    auto items = synth::run_synthesis(jobs, seeds, *gw, &stats);
    CHECK(stats.failed_jobs == 1);
    CHECK(items.size() == 10);
    for (const auto& item : items) CHECK(item.lineage.seed_id == "good");
}

TEST_CASE("SynthesizedQA json round trip preserves every field") {
    synth::SynthesizedQA qa;
    qa.qa_id = "q1";
    qa.type = synth::QuestionType::multiple_choice;
    qa.mcq.question = "Pick one.";
    qa.mcq.options = {"w", "x", "y", "z"};
    qa.mcq.answer_index = 2;
    qa.lineage.seed_id = "s9";
    qa.lineage.path = synth::Path::high_difficulty;
    qa.lineage.role = synth::Role::graduate;
    qa.lineage.prompt_hash = 777;
    qa.discipline = "Physics";
    qa.h_level = 4;
    qa.cot = "think";
    auto back = synth::SynthesizedQA::from_json(qa.to_json());
    REQUIRE(back.has_value());
    CHECK(back->to_json().dump() == qa.to_json().dump());
    CHECK(back->answer_text() == "C. y");
}
