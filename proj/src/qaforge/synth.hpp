#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "qaforge/gateway.hpp"
#include "qaforge/jsonio.hpp"
#include "qaforge/seeds.hpp"

namespace qaforge::synth {

enum class Path { multi_grade, high_difficulty };
enum class Role { high_school, college, graduate };
enum class QuestionType { multiple_choice, essay };

std::string path_name(Path p);
std::string role_name(Role r);
std::string question_type_name(QuestionType q);
bool path_from_name(std::string_view s, Path& out);
bool role_from_name(std::string_view s, Role& out);
bool question_type_from_name(std::string_view s, QuestionType& out);

struct SynthesisJob {
    std::string seed_ref;
    Path path = Path::multi_grade;
    Role role = Role::college;
    QuestionType question_type = QuestionType::multiple_choice;
    int n = 10;

    void validate() const;  // high_difficulty forces role graduate
    std::string key() const;
};

struct McqItem {
    std::string question;
    std::vector<std::string> options;  // exactly 4, pairwise distinct after normalization
    int answer_index = -1;
};

struct EssayItem {
    std::string question;
    std::string solution;
    std::string answer;
};

struct Lineage {
    std::string seed_id;
    Path path = Path::multi_grade;
    Role role = Role::college;
    uint64_t prompt_hash = 0;
};

struct SynthesizedQA {
    std::string qa_id;
    QuestionType type = QuestionType::multiple_choice;
    McqItem mcq;      // valid when type == multiple_choice
    EssayItem essay;  // valid when type == essay
    Lineage lineage;
    std::optional<std::string> discipline;
    std::optional<int> h_level;
    std::optional<std::string> cot;

    const std::string& question() const {
        return type == QuestionType::multiple_choice ? mcq.question : essay.question;
    }
    std::string answer_text() const;  // MCQ: "B. option text"; essay: answer

    json to_json() const;
    static std::optional<SynthesizedQA> from_json(const json& j, std::string* error = nullptr);
};

struct SamplerWeights {
    std::map<std::string, double> discipline_multipliers;  // default 1.0
    std::map<int, double> difficulty_multipliers;          // keyed by h_level, default 1.0

    double weight_for(const std::string& discipline, int h_level) const;
    // STEM x3; high-difficulty additionally boosts H4 x2, H5 x3.
    static SamplerWeights defaults_for(Path path);
};

struct AnnotatedSeed {
    ingest::SeedRecord seed;
    std::string discipline;
    int h_level = 0;
};

// Draw `count` indices with probability proportional to
// discipline_multiplier x difficulty_multiplier; deterministic per rng_seed.
// Throws std::runtime_error on an empty pool.
std::vector<size_t> sample_seeds_weighted(const std::vector<AnnotatedSeed>& pool,
                                          const SamplerWeights& weights, size_t count,
                                          uint64_t rng_seed, bool with_replacement = true);

// Renders the synthesis prompt for the job; the high-difficulty path carries
// the booster block.
llm::PromptRequest render_prompt(const SynthesisJob& job, const ingest::SeedRecord& seed);

struct RejectedItem {
    json raw;
    std::string reason;
};

struct ParseOptions {
    // "Not open-ended" heuristic bound for essay answers.
    size_t essay_answer_max_tokens = 120;
};

struct ParseResult {
    std::vector<McqItem> mcq_items;
    std::vector<EssayItem> essay_items;
    std::vector<RejectedItem> rejected;
    bool count_mismatch = false;  // warning only
    std::string error;            // non-empty: no parsable array, whole response rejected
};

ParseResult parse_items(std::string_view response, QuestionType question_type, int expected_n,
                        const ParseOptions& options = {});

struct VerifyResult {
    std::vector<SynthesizedQA> kept;
    std::vector<SynthesizedQA> demoted;
};

// Re-scores each item's difficulty through the gateway; items outside `keep`
// are demoted (returned, not deleted). kept + demoted partition the input.
VerifyResult post_verify_difficulty(std::vector<SynthesizedQA> items, llm::Gateway& gateway,
                                    const std::set<int>& keep_levels);

struct SynthesisStats {
    size_t jobs = 0;
    size_t failed_jobs = 0;
    size_t accepted = 0;
    size_t rejected = 0;
    size_t duplicates_dropped = 0;
};

// Orchestrates render -> complete -> parse for each job; duplicate questions
// within one seed's output dropped (first kept); idempotent per job key.
std::vector<SynthesizedQA> run_synthesis(const std::vector<SynthesisJob>& jobs,
                                         const std::map<std::string, ingest::SeedRecord>& seeds,
                                         llm::Gateway& gateway, SynthesisStats* stats = nullptr,
                                         const ParseOptions& options = {});

}  // namespace qaforge::synth
