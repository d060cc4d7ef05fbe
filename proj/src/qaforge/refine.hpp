#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qaforge/gateway.hpp"
#include "qaforge/jsonio.hpp"
#include "qaforge/synth.hpp"

namespace qaforge::refine {

struct RefinementOutcome {
    std::string qa_id;
    bool solvable = true;
    std::optional<std::string> reason;  // present iff !solvable, or deferred note
    std::optional<std::string> refined_answer;
    std::optional<std::string> refined_solution;
    bool changed = false;
    bool deferred = false;  // backend failure: item retained unrefined

    json to_json() const;
};

// Literal comparison after case/whitespace/punctuation folding; no semantic
// numeric equivalence ("0.5" != "1/2" by design).
bool answers_equal(std::string_view a, std::string_view b);

// One backend call: solvability verdict plus a stepwise re-solution. MCQ
// refined answers must name one of the four options, else the item is marked
// unsolvable with reason "unresolvable answer". Backend failure defers.
RefinementOutcome assess_and_refine(const synth::SynthesizedQA& item, llm::Gateway& gateway);

std::vector<RefinementOutcome> refine_batch(const std::vector<synth::SynthesizedQA>& items,
                                            llm::Gateway& gateway);

struct ApplyResult {
    std::vector<synth::SynthesizedQA> kept;     // solvable (refined) + deferred-unrefined
    std::vector<synth::SynthesizedQA> dropped;  // unsolvable, and deferred under strict
    size_t deferred = 0;
};

// Merges outcomes into items by qa_id. Unsolvable items are dropped (audit
// records written when audit_log is given); deferred items are kept unrefined
// unless strict, which drops them too. kept + dropped always partition input.
// Throws std::invalid_argument on an outcome without a matching item.
ApplyResult apply_refinements(const std::vector<synth::SynthesizedQA>& items,
                              const std::vector<RefinementOutcome>& outcomes, bool strict = false,
                              JsonlWriter* audit_log = nullptr);

// Fraction of solvable, non-deferred outcomes with changed = true.
// Throws std::invalid_argument when there is no such outcome.
double inconsistency_rate(const std::vector<RefinementOutcome>& outcomes);

}  // namespace qaforge::refine
