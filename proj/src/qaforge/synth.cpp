#include "qaforge/synth.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <unordered_set>

#include "qaforge/annotate.hpp"
#include "qaforge/jsonextract.hpp"
#include "qaforge/prompts.hpp"
#include "qaforge/rng.hpp"
#include "qaforge/util.hpp"
#include "qaforge/vocab.hpp"

namespace qaforge::synth {

std::string path_name(Path p) {
    return p == Path::multi_grade ? "multi_grade" : "high_difficulty";
}

std::string role_name(Role r) {
    switch (r) {
        case Role::high_school: return "high_school";
        case Role::college: return "college";
        case Role::graduate: return "graduate";
    }
    return "college";
}

std::string question_type_name(QuestionType q) {
    return q == QuestionType::multiple_choice ? "multiple_choice" : "essay";
}

bool path_from_name(std::string_view s, Path& out) {
    if (s == "multi_grade" || s == "multi-grade") out = Path::multi_grade;
    else if (s == "high_difficulty" || s == "high-difficulty") out = Path::high_difficulty;
    else return false;
    return true;
}

bool role_from_name(std::string_view s, Role& out) {
    if (s == "high_school" || s == "high-school") out = Role::high_school;
    else if (s == "college") out = Role::college;
    else if (s == "graduate") out = Role::graduate;
    else return false;
    return true;
}

bool question_type_from_name(std::string_view s, QuestionType& out) {
    if (s == "multiple_choice" || s == "mcq") out = QuestionType::multiple_choice;
    else if (s == "essay") out = QuestionType::essay;
    else return false;
    return true;
}

void SynthesisJob::validate() const {
    if (seed_ref.empty()) throw std::invalid_argument("job seed_ref must not be empty");
    if (n < 1) throw std::invalid_argument("job n must be >= 1");
    if (path == Path::high_difficulty && role != Role::graduate)
        throw std::invalid_argument("high_difficulty jobs require the graduate role");
}

std::string SynthesisJob::key() const {
    return seed_ref + "|" + path_name(path) + "|" + role_name(role) + "|" +
           question_type_name(question_type);
}

std::string SynthesizedQA::answer_text() const {
    if (type == QuestionType::multiple_choice) {
        if (mcq.answer_index >= 0 && mcq.answer_index < static_cast<int>(mcq.options.size()))
            return std::string(1, static_cast<char>('A' + mcq.answer_index)) + ". " +
                   mcq.options[mcq.answer_index];
        return "";
    }
    return essay.answer;
}

json SynthesizedQA::to_json() const {
    json j;
    j["qa_id"] = qa_id;
    j["type"] = question_type_name(type);
    if (type == QuestionType::multiple_choice) {
        j["question"] = mcq.question;
        j["options"] = mcq.options;
        j["answer_index"] = mcq.answer_index;
    } else {
        j["question"] = essay.question;
        j["solution"] = essay.solution;
        j["answer"] = essay.answer;
    }
    j["lineage"] = {{"seed_id", lineage.seed_id},
                    {"path", path_name(lineage.path)},
                    {"role", role_name(lineage.role)},
                    {"prompt_hash", lineage.prompt_hash}};
    if (discipline) j["discipline"] = *discipline;
    if (h_level) j["h_level"] = *h_level;
    if (cot) j["cot"] = *cot;
    return j;
}

std::optional<SynthesizedQA> SynthesizedQA::from_json(const json& j, std::string* error) {
    auto fail = [&](const std::string& msg) -> std::optional<SynthesizedQA> {
        if (error) *error = msg;
        return std::nullopt;
    };
    if (!j.is_object()) return fail("not an object");
    SynthesizedQA qa;
    qa.qa_id = j.value("qa_id", "");
    if (qa.qa_id.empty()) return fail("missing qa_id");
    QuestionType t;
    if (!question_type_from_name(j.value("type", ""), t)) return fail("bad type");
    qa.type = t;
    if (t == QuestionType::multiple_choice) {
        qa.mcq.question = j.value("question", "");
        if (j.contains("options") && j["options"].is_array())
            for (const auto& o : j["options"]) qa.mcq.options.push_back(o.get<std::string>());
        qa.mcq.answer_index = j.value("answer_index", -1);
        if (qa.mcq.options.size() != 4) return fail("option count != 4");
        if (qa.mcq.answer_index < 0 || qa.mcq.answer_index > 3) return fail("bad answer_index");
    } else {
        qa.essay.question = j.value("question", "");
        qa.essay.solution = j.value("solution", "");
        qa.essay.answer = j.value("answer", "");
    }
    if (!j.contains("lineage") || !j["lineage"].is_object()) return fail("missing lineage");
    const auto& lin = j["lineage"];
    qa.lineage.seed_id = lin.value("seed_id", "");
    if (qa.lineage.seed_id.empty()) return fail("lineage missing seed_id");
    Path p;
    if (path_from_name(lin.value("path", ""), p)) qa.lineage.path = p;
    Role r;
    if (role_from_name(lin.value("role", ""), r)) qa.lineage.role = r;
    qa.lineage.prompt_hash = lin.value("prompt_hash", 0ull);
    if (j.contains("discipline") && j["discipline"].is_string())
        qa.discipline = j["discipline"].get<std::string>();
    if (j.contains("h_level") && j["h_level"].is_number_integer())
        qa.h_level = j["h_level"].get<int>();
    if (j.contains("cot") && j["cot"].is_string()) qa.cot = j["cot"].get<std::string>();
    return qa;
}

double SamplerWeights::weight_for(const std::string& discipline, int h_level) const {
    double w = 1.0;
    if (auto it = discipline_multipliers.find(discipline); it != discipline_multipliers.end())
        w *= it->second;
    if (auto it = difficulty_multipliers.find(h_level); it != difficulty_multipliers.end())
        w *= it->second;
    return w;
}

SamplerWeights SamplerWeights::defaults_for(Path path) {
    SamplerWeights w;
    for (const auto& d : vocab::stem_disciplines()) w.discipline_multipliers[d] = 3.0;
    if (path == Path::high_difficulty) {
        w.difficulty_multipliers[4] = 2.0;
        w.difficulty_multipliers[5] = 3.0;
    }
    return w;
}

std::vector<size_t> sample_seeds_weighted(const std::vector<AnnotatedSeed>& pool,
                                          const SamplerWeights& weights, size_t count,
                                          uint64_t rng_seed, bool with_replacement) {
    if (pool.empty()) throw std::runtime_error("empty seed pool");
    std::vector<double> w(pool.size());
    for (size_t i = 0; i < pool.size(); ++i) {
        w[i] = weights.weight_for(pool[i].discipline, pool[i].h_level);
        if (w[i] <= 0) throw std::invalid_argument("sampler weights must be positive");
    }

    std::vector<double> cumulative(w.size());
    double acc = 0;
    for (size_t i = 0; i < w.size(); ++i) {
        acc += w[i];
        cumulative[i] = acc;
    }

    Rng rng(rng_seed);
    std::vector<size_t> out;
    out.reserve(count);
    if (with_replacement) {
        for (size_t k = 0; k < count; ++k) {
            double r = rng.real() * acc;
            auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
            out.push_back(static_cast<size_t>(std::min<ptrdiff_t>(
                it - cumulative.begin(), static_cast<ptrdiff_t>(pool.size()) - 1)));
        }
    } else {
        std::vector<char> used(pool.size(), 0);
        size_t remaining = pool.size();
        double total = acc;
        count = std::min(count, pool.size());
        for (size_t k = 0; k < count && remaining > 0; ++k) {
            double r = rng.real() * total;
            double run = 0;
            size_t pick = pool.size();
            for (size_t i = 0; i < pool.size(); ++i) {
                if (used[i]) continue;
                run += w[i];
                if (r < run) {
                    pick = i;
                    break;
                }
            }
            if (pick == pool.size()) {
                for (size_t i = pool.size(); i-- > 0;)
                    if (!used[i]) {
                        pick = i;
                        break;
                    }
            }
            used[pick] = 1;
            total -= w[pick];
            --remaining;
            out.push_back(pick);
        }
    }
    return out;
}

namespace {

std::string seed_format_descriptor(const ingest::SeedRecord& seed) {
    switch (seed.source_kind) {
        case ingest::SourceKind::qa_pair: return "QA pair";
        case ingest::SourceKind::book: return "book excerpt";
        case ingest::SourceKind::web_page: return "web page excerpt";
    }
    return "QA pair";
}

std::string role_phrase(Role r) {
    switch (r) {
        case Role::high_school: return "high school";
        case Role::college: return "college";
        case Role::graduate: return "graduate";
    }
    return "college";
}

}  // namespace

llm::PromptRequest render_prompt(const SynthesisJob& job, const ingest::SeedRecord& seed) {
    job.validate();
    std::string text = job.path == Path::high_difficulty ? prompts::high_difficulty_template()
                                                         : prompts::multi_grade_template();
    const bool mcq = job.question_type == QuestionType::multiple_choice;
    text = util::replace_all(std::move(text), "{Role Assigner}", role_phrase(job.role));
    text = util::replace_all(std::move(text), "{Seed Format}", seed_format_descriptor(seed));
    text = util::replace_all(std::move(text), "{Number}", std::to_string(job.n));
    text = util::replace_all(std::move(text), "{Format-specific Constraints}",
                             mcq ? prompts::mcq_constraints() : prompts::essay_constraints());
    text = util::replace_all(std::move(text), "{Format-specified JSON}",
                             mcq ? prompts::mcq_schema() : prompts::essay_schema());
    text = util::replace_all(std::move(text), "{Seed Data}", seed.content_text());
    text = util::replace_all(std::move(text), "{Seed data}", seed.content_text());

    llm::PromptRequest req;
    req.request_id = job.key();
    req.user_text = text;
    req.decode_mode = llm::DecodeMode::sampled;
    return req;
}

namespace {

const char* kOpenEndedOpeners[] = {
    "discuss",       "describe",        "explain why",      "explain how",
    "comment on",    "share your",      "what are your",    "list the",
    "give examples", "brainstorm",      "reflect on",       "analyze the implications",
};

bool looks_open_ended(const std::string& question) {
    std::string lower = util::to_lower(util::trim(question));
    for (const char* opener : kOpenEndedOpeners)
        if (util::starts_with(lower, opener)) return true;
    return false;
}

std::optional<std::string> validate_mcq(const json& j, McqItem& out) {
    if (!j.is_object()) return "not an object";
    out.question = j.value("question", "");
    if (util::trim(out.question).empty()) return "empty question";
    if (!j.contains("options") || !j["options"].is_array())
        return "missing options";
    out.options.clear();
    for (const auto& o : j["options"]) {
        if (!o.is_string()) return "non-string option";
        out.options.push_back(o.get<std::string>());
    }
    if (out.options.size() != 4)
        return "option count " + std::to_string(out.options.size()) + " != 4";
    std::set<std::string> normed;
    for (const auto& o : out.options) {
        if (util::trim(o).empty()) return "empty option";
        if (!normed.insert(util::normalize_text(o)).second) return "duplicate options";
    }
    if (!j.contains("answer_index") || !j["answer_index"].is_number_integer())
        return "missing answer_index";
    out.answer_index = j["answer_index"].get<int>();
    if (out.answer_index < 0 || out.answer_index > 3)
        return "answer_index " + std::to_string(out.answer_index) + " out of range";
    return std::nullopt;
}

std::optional<std::string> validate_essay(const json& j, EssayItem& out,
                                          const ParseOptions& options) {
    if (!j.is_object()) return "not an object";
    out.question = j.value("question", "");
    out.solution = j.value("solution", "");
    out.answer = j.value("answer", "");
    if (util::trim(out.question).empty()) return "empty question";
    if (util::trim(out.solution).empty()) return "empty solution";
    if (util::trim(out.answer).empty()) return "empty answer";
    if (looks_open_ended(out.question)) return "open-ended question";
    if (util::tokenize(out.answer).size() > options.essay_answer_max_tokens)
        return "answer exceeds length bound";
    return std::nullopt;
}

}  // namespace

ParseResult parse_items(std::string_view response, QuestionType question_type, int expected_n,
                        const ParseOptions& options) {
    ParseResult result;
    auto arr = extract_json_array(response);
    if (!arr || !arr->is_array()) {
        result.error = "no parsable JSON array";
        return result;
    }
    for (const auto& element : *arr) {
        if (question_type == QuestionType::multiple_choice) {
            McqItem item;
            if (auto reason = validate_mcq(element, item)) {
                result.rejected.push_back({element, *reason});
            } else {
                result.mcq_items.push_back(std::move(item));
            }
        } else {
            EssayItem item;
            if (auto reason = validate_essay(element, item, options)) {
                result.rejected.push_back({element, *reason});
            } else {
                result.essay_items.push_back(std::move(item));
            }
        }
    }
    size_t accepted = result.mcq_items.size() + result.essay_items.size();
    result.count_mismatch = expected_n >= 0 &&
                            accepted + result.rejected.size() != static_cast<size_t>(expected_n);
    return result;
}

VerifyResult post_verify_difficulty(std::vector<SynthesizedQA> items, llm::Gateway& gateway,
                                    const std::set<int>& keep_levels) {
    VerifyResult result;
    for (auto& item : items) {
        auto label = annotate::score_difficulty(item.qa_id, item.question(), gateway);
        item.h_level = label.h_level;
        if (keep_levels.count(label.h_level)) {
            result.kept.push_back(std::move(item));
        } else {
            result.demoted.push_back(std::move(item));
        }
    }
    return result;
}

std::vector<SynthesizedQA> run_synthesis(const std::vector<SynthesisJob>& jobs,
                                         const std::map<std::string, ingest::SeedRecord>& seeds,
                                         llm::Gateway& gateway, SynthesisStats* stats,
                                         const ParseOptions& options) {
    std::vector<SynthesizedQA> out;
    std::unordered_set<std::string> seen_jobs;
    std::map<std::string, std::unordered_set<std::string>> seen_questions;  // per seed

    SynthesisStats local;
    for (const auto& job : jobs) {
        ++local.jobs;
        auto seed_it = seeds.find(job.seed_ref);
        if (seed_it == seeds.end()) {
            ++local.failed_jobs;
            continue;
        }
        auto request = render_prompt(job, seed_it->second);
        uint64_t prompt_hash = util::fnv1a64(request.user_text);
        std::string idem_key = job.key() + "|" + std::to_string(prompt_hash);
        if (!seen_jobs.insert(idem_key).second) continue;

        std::string response;
        try {
            response = gateway.complete(request).text;
        } catch (const llm::GatewayError&) {
            ++local.failed_jobs;
            continue;
        }

        auto parsed = parse_items(response, job.question_type, job.n, options);
        if (!parsed.error.empty()) {
            ++local.failed_jobs;
            continue;
        }
        local.rejected += parsed.rejected.size();

        auto& question_set = seen_questions[job.seed_ref];
        size_t index = 0;
        auto emit = [&](SynthesizedQA&& qa) {
            std::string norm = util::normalize_text(qa.question());
            if (!question_set.insert(norm).second) {
                ++local.duplicates_dropped;
                return;
            }
            qa.qa_id = job.seed_ref + "/" + path_name(job.path) + "/" +
                       question_type_name(job.question_type) + "/" +
                       std::to_string(prompt_hash % 100000000) + "-" + std::to_string(index);
            qa.lineage = {job.seed_ref, job.path, job.role, prompt_hash};
            ++local.accepted;
            ++index;
            out.push_back(std::move(qa));
        };
        for (auto& item : parsed.mcq_items) {
            SynthesizedQA qa;
            qa.type = QuestionType::multiple_choice;
            qa.mcq = std::move(item);
            emit(std::move(qa));
        }
        for (auto& item : parsed.essay_items) {
            SynthesizedQA qa;
            qa.type = QuestionType::essay;
            qa.essay = std::move(item);
            emit(std::move(qa));
        }
    }
    if (stats) *stats = local;
    return out;
}

}  // namespace qaforge::synth
