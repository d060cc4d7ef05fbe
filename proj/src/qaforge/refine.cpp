#include "qaforge/refine.hpp"

#include <stdexcept>
#include <unordered_map>

#include "qaforge/jsonextract.hpp"
#include "qaforge/prompts.hpp"
#include "qaforge/util.hpp"

namespace qaforge::refine {

json RefinementOutcome::to_json() const {
    json j;
    j["qa_id"] = qa_id;
    j["solvable"] = solvable;
    j["reason"] = reason ? json(*reason) : json(nullptr);
    j["refined_answer"] = refined_answer ? json(*refined_answer) : json(nullptr);
    j["refined_solution"] = refined_solution ? json(*refined_solution) : json(nullptr);
    j["changed"] = changed;
    j["deferred"] = deferred;
    return j;
}

bool answers_equal(std::string_view a, std::string_view b) {
    return util::normalize_text(a) == util::normalize_text(b);
}

namespace {

std::string options_block(const synth::SynthesizedQA& item) {
    if (item.type != synth::QuestionType::multiple_choice) return "";
    std::string block = "Options:\n";
    for (size_t i = 0; i < item.mcq.options.size(); ++i)
        block += std::string(1, static_cast<char>('A' + i)) + ". " + item.mcq.options[i] + "\n";
    return block;
}

std::string proposed_answer(const synth::SynthesizedQA& item) {
    if (item.type == synth::QuestionType::multiple_choice)
        return item.mcq.options[static_cast<size_t>(item.mcq.answer_index)];
    return item.essay.answer;
}

// Index of the option matching `answer` (letter "B", "B. text", or plain
// option text), or -1.
int resolve_option(const std::vector<std::string>& options, const std::string& answer) {
    std::string trimmed = util::trim(answer);
    if (trimmed.size() == 1 || (trimmed.size() >= 2 && trimmed[1] == '.')) {
        char c = trimmed[0];
        if (c >= 'A' && c < static_cast<char>('A' + options.size())) {
            int idx = c - 'A';
            if (trimmed.size() == 1) return idx;
            if (answers_equal(trimmed.substr(2), options[static_cast<size_t>(idx)])) return idx;
        }
    }
    for (size_t i = 0; i < options.size(); ++i)
        if (answers_equal(trimmed, options[i])) return static_cast<int>(i);
    return -1;
}

}  // namespace

RefinementOutcome assess_and_refine(const synth::SynthesizedQA& item, llm::Gateway& gateway) {
    RefinementOutcome out;
    out.qa_id = item.qa_id;

    llm::PromptRequest req;
    req.request_id = item.qa_id + "/refine";
    req.user_text =
        prompts::render_refine(item.question(), options_block(item), proposed_answer(item));
    req.decode_mode = llm::DecodeMode::sampled;

    std::optional<json> obj;
    try {
        auto resp = gateway.complete(req);
        obj = extract_json_object(resp.text);
    } catch (const llm::GatewayError& e) {
        out.deferred = true;
        out.reason = std::string("backend failure: ") + e.what();
        return out;
    }
    if (!obj) {
        out.deferred = true;
        out.reason = "unparsable refinement response";
        return out;
    }

    out.solvable = obj->value("solvable", false);
    if (!out.solvable) {
        out.reason = "other";
        if (obj->contains("reason") && (*obj)["reason"].is_string())
            out.reason = (*obj)["reason"].get<std::string>();
        return out;
    }

    std::string answer;
    if (obj->contains("final_answer") && (*obj)["final_answer"].is_string())
        answer = (*obj)["final_answer"].get<std::string>();
    if (obj->contains("solution") && (*obj)["solution"].is_string())
        out.refined_solution = (*obj)["solution"].get<std::string>();

    if (item.type == synth::QuestionType::multiple_choice) {
        int idx = resolve_option(item.mcq.options, answer);
        if (idx < 0) {
            out.solvable = false;
            out.reason = "unresolvable answer";
            out.refined_solution.reset();
            return out;
        }
        out.refined_answer = item.mcq.options[static_cast<size_t>(idx)];
        out.changed = idx != item.mcq.answer_index;
    } else {
        if (answer.empty()) {
            out.solvable = false;
            out.reason = "unresolvable answer";
            out.refined_solution.reset();
            return out;
        }
        out.refined_answer = answer;
        out.changed = !answers_equal(answer, item.essay.answer);
    }
    return out;
}

std::vector<RefinementOutcome> refine_batch(const std::vector<synth::SynthesizedQA>& items,
                                            llm::Gateway& gateway) {
    std::vector<RefinementOutcome> outcomes;
    outcomes.reserve(items.size());
    for (const auto& item : items) outcomes.push_back(assess_and_refine(item, gateway));
    return outcomes;
}

ApplyResult apply_refinements(const std::vector<synth::SynthesizedQA>& items,
                              const std::vector<RefinementOutcome>& outcomes, bool strict,
                              JsonlWriter* audit_log) {
    std::unordered_map<std::string, const RefinementOutcome*> by_id;
    for (const auto& o : outcomes) {
        if (by_id.count(o.qa_id)) throw std::invalid_argument("duplicate outcome: " + o.qa_id);
        by_id[o.qa_id] = &o;
    }
    std::unordered_map<std::string, bool> seen;
    for (const auto& item : items) seen.emplace(item.qa_id, true);
    for (const auto& o : outcomes)
        if (!seen.count(o.qa_id)) throw std::invalid_argument("orphan outcome: " + o.qa_id);

    ApplyResult result;
    for (const auto& item : items) {
        auto it = by_id.find(item.qa_id);
        if (it == by_id.end()) {
            result.kept.push_back(item);  // never assessed: retained unrefined
            continue;
        }
        const auto& o = *it->second;
        if (o.deferred) {
            ++result.deferred;
            if (audit_log) audit_log->write(o.to_json());
            if (strict) result.dropped.push_back(item);
            else result.kept.push_back(item);
            continue;
        }
        if (!o.solvable) {
            if (audit_log) audit_log->write(o.to_json());
            result.dropped.push_back(item);
            continue;
        }
        auto refined = item;
        if (o.refined_answer) {
            if (refined.type == synth::QuestionType::multiple_choice) {
                int idx = resolve_option(refined.mcq.options, *o.refined_answer);
                if (idx >= 0) refined.mcq.answer_index = idx;
            } else {
                refined.essay.answer = *o.refined_answer;
            }
        }
        if (o.refined_solution && refined.type == synth::QuestionType::essay)
            refined.essay.solution = *o.refined_solution;
        if (o.changed && audit_log) audit_log->write(o.to_json());
        result.kept.push_back(std::move(refined));
    }
    return result;
}

double inconsistency_rate(const std::vector<RefinementOutcome>& outcomes) {
    size_t solvable = 0, changed = 0;
    for (const auto& o : outcomes) {
        if (o.deferred || !o.solvable) continue;
        ++solvable;
        if (o.changed) ++changed;
    }
    if (solvable == 0) throw std::invalid_argument("no solvable outcomes");
    return static_cast<double>(changed) / static_cast<double>(solvable);
}

}  // namespace qaforge::refine
