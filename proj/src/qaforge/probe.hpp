#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "qaforge/gateway.hpp"
#include "qaforge/jsonio.hpp"

namespace qaforge::probe {

enum class Grading { exact_match, choice_letter };

// A labeled QA item: probed, or serving as a few-shot exemplar.
struct ProbeItem {
    std::string id;
    std::string question;
    std::string answer;               // gold answer text (exemplars and essay grading)
    std::vector<std::string> options; // non-empty for multiple-choice
    int answer_index = -1;            // valid when options present
    std::string discipline;
    int h_level = 0;
};

struct ProbeConfig {
    int trials = 10;
    int shots = 5;
    std::vector<ProbeItem> exemplar_pool;
    Grading grading = Grading::exact_match;
};

// "Question: ...\n<options>" block as rendered into prompts; exposed so
// graders can key on the exact probed text.
std::string question_block(const ProbeItem& item);
std::string rendered_answer(const ProbeItem& item);

// Deterministic per (rng_seed, trial_index); exemplar sets are pairwise
// distinct across trials and never contain the probed item; decode is greedy.
// Throws std::runtime_error (InsufficientExemplars) when the pool is too
// small for `trials` distinct `shots`-sized sets.
llm::PromptRequest build_fewshot_prompt(const ProbeItem& item, const ProbeConfig& config,
                                        int trial_index, uint64_t rng_seed);

// Exposed for the exemplar-disjointness property test.
std::vector<size_t> select_exemplars(const ProbeItem& item, const ProbeConfig& config,
                                     int trial_index, uint64_t rng_seed);

bool grade(std::string_view response, const ProbeItem& gold, Grading grading);

struct ProbeResult {
    std::string discipline;
    int h_level = 0;
    std::string checkpoint_tag;
    size_t item_count = 0;
    size_t ungraded = 0;  // gateway failures, excluded from the denominator
    double accuracy = 0.0;
    // per item (within this cell), per trial.
    std::vector<std::vector<bool>> per_trial_correct;

    json to_json() const;
};

// Runs trials greedy completions per item, grades them, and aggregates
// accuracy per (discipline, h_level) cell. Deterministic against the mock.
std::vector<ProbeResult> run_probe(const std::vector<ProbeItem>& items, const ProbeConfig& config,
                                   llm::Gateway& gateway, const std::string& checkpoint_tag,
                                   uint64_t rng_seed);

void write_results_csv(const std::vector<ProbeResult>& results, const std::filesystem::path& path);
void write_results_jsonl(const std::vector<ProbeResult>& results,
                         const std::filesystem::path& path);

}  // namespace qaforge::probe
