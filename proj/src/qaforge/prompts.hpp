#pragma once

#include <string>
#include <string_view>

namespace qaforge::prompts {

// Stable marker strings the deterministic mock keys on to recognize what kind
// of request it received. Each is a substring of exactly one prompt template.
inline constexpr std::string_view kDisciplineMarker = "Act as an educational taxonomist";
inline constexpr std::string_view kDifficultyMarker = "Act as an educational assessment expert";
inline constexpr std::string_view kSynthesisMarker = "analyze the knowledge points assessed by the provided";
inline constexpr std::string_view kBoosterMarker = "[Difficulty Booster]";
inline constexpr std::string_view kRefineMarker = "Act as a rigorous solution auditor";
inline constexpr std::string_view kStageMarker = "Act as an educational stage auditor";
inline constexpr std::string_view kMcqConstraintMarker = "four alternative options must be generated";
inline constexpr std::string_view kEssayConstraintMarker = "cannot be open-ended questions";

// Raw template texts (assets_v1). Placeholders use {Curly Brace} names.
std::string discipline_template();
std::string difficulty_template();
std::string multi_grade_template();
std::string high_difficulty_template();
std::string mcq_constraints();
std::string essay_constraints();
std::string mcq_schema();
std::string essay_schema();
std::string refine_template();
std::string stage_template();

// Rendered prompts.
std::string render_discipline(std::string_view seed_text);
std::string render_difficulty(std::string_view seed_text);
std::string render_refine(std::string_view question, std::string_view options_block,
                          std::string_view proposed_answer);
std::string render_stage(std::string_view targeted_stage, std::string_view question);

}  // namespace qaforge::prompts
