#include "qaforge/prompts.hpp"

#include "qaforge/util.hpp"
#include "qaforge/vocab.hpp"

namespace qaforge::prompts {

std::string discipline_template() {
    return R"(Act as an educational taxonomist. Classify the input question into our standardized discipline hierarchy using sequential reasoning, then output strictly in JSON format:
1. Primary Discipline Identification
   Select exactly one primary discipline from:
   {Discipline List}
   - Use "cross-discipline" only for explicit multi-domain integration
   - Assign "Other" only if no discipline matches >=60
2. Secondary Discipline Assignment
   - Identify the most specific applicable sub-discipline
   - Null if primary discipline has no sub-domains
   - Use "General" for non-specialized content
3. Validation Rules
   - Reject non-educational content -> Output "Invalid"
   - Correct spelling/terminology variations before classification
Output Schema:
{
  "primary_discipline": "",
  "secondary_discipline": "",
  "confidence": 0.0-1.0,
  "rejection_reason": null
}
Input: {Seed Data}
)";
}

std::string difficulty_template() {
    return R"(Act as an educational assessment expert, analyze the provided question through sequential reasoning and output strictly in JSON format:
1. Knowledge Analysis
   - Core concepts (<=3): [comma-separated list]
   - Integration type: {single-concept | cross-chapter | cross-discipline}
2. Cognitive Tier (Bloom's Taxonomy)
   {memory | understanding | application | analysis | synthesis | evaluation}
3. Difficulty Assessment
   - Estimated pass rate (P) for QS Top 100 university majors: [0-100%]
   - Tier:
     - extreme: P < 10%
     - challenge: 10% <= P < 30%
     - improvement: 30% <= P < 50%
     - standard: 50% <= P < 80%
     - basic: P >= 80%
     - other: invalid inputs
4. Exception Handling
   - Mark "other" for non-questions/unanswerable items
   - Correct minor errors (e.g., missing correct options) before assessment
   - Ignore provided solutions/answers
Output Schema:
{
  "difficulty_tier": "basic|standard|improvement|challenge|extreme|other",
  "rationale": [
    "Involves {N} core knowledge points",
    "Cognitive level: {Bloom's tier}",
    "Estimated pass rate: approximately {XX}%"
  ]
}
Input: {Seed Data}
)";
}

std::string multi_grade_template() {
    return R"(Act as a {Role Assigner} educator, analyze the knowledge points assessed by the provided {Seed Format}. Generate {Number} novel questions adhering to these requirements:

1. Questions must demonstrate substantial differentiation while testing application of identified knowledge points.
2. Difficulty must align with {Role Assigner} standards through:
   a) Down-scaling overqualified knowledge points to prerequisite concepts;
   b) Up-scaling underqualified points to advanced applications.
3. Linguistic consistency must be maintained with the input question.
{Format-specific Constraints}

Output Schema: {Format-specified JSON}
Input: {Seed Data}
)";
}

std::string high_difficulty_template() {
    return R"(Act as a graduate educator, analyze the knowledge points assessed by the provided {Seed Format}. Generate {Number} novel questions adhering to these requirements:

1. Questions must demonstrate substantial differentiation while testing application of identified knowledge points
2. Difficulty must align with graduate standards through:
   a) Down-scaling overqualified knowledge points to prerequisite concepts
   b) Up-scaling underqualified points to advanced applications
3. Linguistic consistency must be maintained with the input question
{Format-specific Constraints}

[Difficulty Booster]
1. Knowledge Analysis:
   - Core concepts (<=3)
   - Integration type: {single | cross-chapter | cross-discipline}
2. Cognitive Tier (Bloom's Taxonomy):
   {memory | understanding | application | analysis | synthesis | evaluation}
3. Difficulty Validation:
   - Estimate pass rate 0 <= P <= 100%
   - Tier:
     - extreme: P < 10%
     - challenge: 10% <= P < 30%
     - improvement: 30% <= P < 50%
     - standard: 50% <= P < 80%
     - basic: P >= 80%
   - REJECT if not challenge/extreme (P >= 30%)

Output Schema: {Format-specified JSON}
Input: {Seed Data}
)";
}

std::string mcq_constraints() {
    return "4. The generated question type is multiple-choice. For each question, four "
           "alternative options must be generated, and among the four options, there must be "
           "one correct answer.";
}

std::string essay_constraints() {
    return "4. The generated question type is essay-question. For each question, the solution "
           "steps and the final correct answer are provided. The generated questions cannot be "
           "open-ended questions (such as those of the solution type, thinking type, information "
           "listing type, etc.), but must be self-contained with a final answer that can be "
           "determined as correct.";
}

std::string mcq_schema() {
    return R"([{"question": "", "options": [],  "answer_index": 0-3}, ...])";
}

std::string essay_schema() {
    return R"([{"question": "", "solution": "",  "answer": ""}, ...])";
}

// Project-authored prompt (v1): the upstream method describes solvability
// filtering and stepwise re-solution without printing a prompt text.
std::string refine_template() {
    return R"(Act as a rigorous solution auditor. Work through the question below in two parts:
1. Solvability: decide whether the question is solvable as stated. Mark it unsolvable if it has missing critical information, erroneous conditions, or similar issues.
2. Re-solution: if solvable, re-derive the answer through stepwise reasoning, independently of the proposed answer. For multiple-choice questions the final answer must name exactly one of the listed options.
Output strictly in JSON format:
{
  "solvable": true/false,
  "reason": null or "missing critical information" | "erroneous conditions" | "other",
  "solution": "",
  "final_answer": ""
}
Question: {Question}
{Options Block}Proposed answer: {Proposed Answer}
)";
}

// Project-authored prompt (v1) for stage-alignment validation.
std::string stage_template() {
    return R"(Act as an educational stage auditor. Determine the actual educational stage of the question below. Choose exactly one stage from:
["primary", "junior_high", "high_school", "college", "graduate", "other"]
Also state whether the question aligns with its targeted stage.
Output strictly in JSON format:
{"stage": "", "aligned": true/false}
Targeted stage: {Targeted Stage}
Question: {Question}
)";
}

static std::string discipline_list_literal() {
    std::string out = "[";
    const auto& d = vocab::disciplines();
    for (size_t i = 0; i < d.size(); ++i) {
        if (i) out += ", ";
        out += "'" + d[i] + "'";
    }
    out += "]";
    return out;
}

std::string render_discipline(std::string_view seed_text) {
    std::string p = discipline_template();
    p = util::replace_all(std::move(p), "{Discipline List}", discipline_list_literal());
    p = util::replace_all(std::move(p), "{Seed Data}", std::string(seed_text));
    return p;
}

std::string render_difficulty(std::string_view seed_text) {
    return util::replace_all(difficulty_template(), "{Seed Data}", std::string(seed_text));
}

std::string render_refine(std::string_view question, std::string_view options_block,
                          std::string_view proposed_answer) {
    std::string p = refine_template();
    p = util::replace_all(std::move(p), "{Question}", std::string(question));
    p = util::replace_all(std::move(p), "{Options Block}", std::string(options_block));
    p = util::replace_all(std::move(p), "{Proposed Answer}", std::string(proposed_answer));
    return p;
}

std::string render_stage(std::string_view targeted_stage, std::string_view question) {
    std::string p = stage_template();
    p = util::replace_all(std::move(p), "{Targeted Stage}", std::string(targeted_stage));
    p = util::replace_all(std::move(p), "{Question}", std::string(question));
    return p;
}

}  // namespace qaforge::prompts
