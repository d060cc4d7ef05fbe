#include "qaforge/probe.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <stdexcept>

#include "qaforge/rng.hpp"
#include "qaforge/util.hpp"
#include "qaforge/vocab.hpp"

namespace qaforge::probe {

std::string question_block(const ProbeItem& item) {
    std::string out = item.question;
    if (!item.options.empty()) {
        for (size_t i = 0; i < item.options.size(); ++i)
            out += "\n" + std::string(1, static_cast<char>('A' + i)) + ". " + item.options[i];
    }
    return out;
}

std::string rendered_answer(const ProbeItem& item) {
    if (!item.options.empty() && item.answer_index >= 0 &&
        item.answer_index < static_cast<int>(item.options.size())) {
        return std::string(1, static_cast<char>('A' + item.answer_index)) + ". " +
               item.options[item.answer_index];
    }
    return item.answer;
}

std::vector<size_t> select_exemplars(const ProbeItem& item, const ProbeConfig& config,
                                     int trial_index, uint64_t rng_seed) {
    if (trial_index < 0 || trial_index >= config.trials)
        throw std::invalid_argument("trial_index out of range");
    if (config.shots == 0) return {};

    // Same-discipline exemplars when the pool supports it, else global.
    auto build_pool = [&](bool same_discipline) {
        std::vector<size_t> pool;
        for (size_t i = 0; i < config.exemplar_pool.size(); ++i) {
            const auto& ex = config.exemplar_pool[i];
            if (ex.id == item.id) continue;  // never probe an item against itself
            if (same_discipline && ex.discipline != item.discipline) continue;
            pool.push_back(i);
        }
        return pool;
    };

    // Distinct trial sets come from sliding a window over one seed-shuffled
    // pool ordering: consecutive windows differ by at least one element as
    // long as the pool is strictly larger than the window.
    size_t need = static_cast<size_t>(config.shots) + (config.trials > 1 ? 1 : 0);
    auto pool = build_pool(true);
    if (pool.size() < need || pool.size() < static_cast<size_t>(config.trials))
        pool = build_pool(false);
    if (pool.size() < need || (config.trials > 1 && pool.size() < static_cast<size_t>(config.trials)))
        throw std::runtime_error("insufficient exemplars: pool " + std::to_string(pool.size()) +
                                 ", need " + std::to_string(std::max<size_t>(
                                                 need, static_cast<size_t>(config.trials))));

    Rng rng(util::fnv1a64(item.id, rng_seed));
    rng.shuffle(pool);
    std::vector<size_t> chosen;
    for (int k = 0; k < config.shots; ++k)
        chosen.push_back(pool[(static_cast<size_t>(trial_index) + k) % pool.size()]);
    return chosen;
}

llm::PromptRequest build_fewshot_prompt(const ProbeItem& item, const ProbeConfig& config,
                                        int trial_index, uint64_t rng_seed) {
    auto exemplars = select_exemplars(item, config, trial_index, rng_seed);

    std::string text;
    for (size_t idx : exemplars) {
        const auto& ex = config.exemplar_pool[idx];
        text += "Question: " + question_block(ex) + "\nAnswer: " + rendered_answer(ex) + "\n\n";
    }
    text += "Question: " + question_block(item) + "\nAnswer:";

    llm::PromptRequest req;
    req.request_id = item.id + "/trial" + std::to_string(trial_index);
    req.user_text = text;
    req.decode_mode = llm::DecodeMode::greedy;
    return req;
}

namespace {

// First standalone A-D token (optionally "B." / "(B)") in the response.
int extract_choice_letter(std::string_view response) {
    for (size_t i = 0; i < response.size(); ++i) {
        char c = response[i];
        if (c < 'A' || c > 'D') continue;
        bool left_ok = i == 0 || !std::isalnum(static_cast<unsigned char>(response[i - 1]));
        bool right_ok = i + 1 == response.size() ||
                        !std::isalnum(static_cast<unsigned char>(response[i + 1]));
        if (left_ok && right_ok) return c - 'A';
    }
    return -1;
}

}  // namespace

bool grade(std::string_view response, const ProbeItem& gold, Grading grading) {
    if (grading == Grading::choice_letter && !gold.options.empty()) {
        return extract_choice_letter(response) == gold.answer_index;
    }
    std::string norm_resp = util::normalize_text(response);
    std::string norm_gold = util::normalize_text(rendered_answer(gold));
    if (norm_resp == norm_gold) return true;
    // Also accept the plain option text for multiple-choice golds.
    if (!gold.options.empty() && gold.answer_index >= 0 &&
        gold.answer_index < static_cast<int>(gold.options.size()))
        return norm_resp == util::normalize_text(gold.options[gold.answer_index]);
    return false;
}

json ProbeResult::to_json() const {
    json j;
    j["discipline"] = discipline;
    j["h_level"] = vocab::h_level_name(h_level);
    j["checkpoint_tag"] = checkpoint_tag;
    j["item_count"] = item_count;
    j["ungraded"] = ungraded;
    j["accuracy"] = accuracy;
    json matrix = json::array();
    for (const auto& row : per_trial_correct) {
        json r = json::array();
        for (bool b : row) r.push_back(b);
        matrix.push_back(r);
    }
    j["per_trial_correct"] = matrix;
    return j;
}

std::vector<ProbeResult> run_probe(const std::vector<ProbeItem>& items, const ProbeConfig& config,
                                   llm::Gateway& gateway, const std::string& checkpoint_tag,
                                   uint64_t rng_seed) {
    // One request per (item, trial), batched through the gateway.
    std::vector<llm::PromptRequest> requests;
    requests.reserve(items.size() * static_cast<size_t>(config.trials));
    for (const auto& item : items)
        for (int t = 0; t < config.trials; ++t)
            requests.push_back(build_fewshot_prompt(item, config, t, rng_seed));

    auto responses = gateway.complete_batch(requests);

    struct Cell {
        std::vector<std::vector<bool>> matrix;
        size_t items = 0;
        size_t correct = 0;
        size_t graded = 0;
        size_t ungraded = 0;
    };
    std::map<std::pair<std::string, int>, Cell> cells;

    for (size_t i = 0; i < items.size(); ++i) {
        const auto& item = items[i];
        auto& cell = cells[{item.discipline, item.h_level}];
        ++cell.items;
        std::vector<bool> row;
        for (int t = 0; t < config.trials; ++t) {
            const auto& result = responses[i * static_cast<size_t>(config.trials) +
                                           static_cast<size_t>(t)];
            if (!result.ok) {
                ++cell.ungraded;
                row.push_back(false);
                continue;
            }
            bool correct = grade(result.response.text, item, config.grading);
            row.push_back(correct);
            ++cell.graded;
            if (correct) ++cell.correct;
        }
        cell.matrix.push_back(std::move(row));
    }

    std::vector<ProbeResult> results;
    for (auto& [key, cell] : cells) {
        ProbeResult r;
        r.discipline = key.first;
        r.h_level = key.second;
        r.checkpoint_tag = checkpoint_tag;
        r.item_count = cell.items;
        r.ungraded = cell.ungraded;
        r.accuracy = cell.graded == 0
                         ? 0.0
                         : static_cast<double>(cell.correct) / static_cast<double>(cell.graded);
        r.per_trial_correct = std::move(cell.matrix);
        results.push_back(std::move(r));
    }
    return results;
}

void write_results_csv(const std::vector<ProbeResult>& results,
                       const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << "discipline,h_level,checkpoint_tag,item_count,accuracy\n";
    for (const auto& r : results) {
        out << '"' << r.discipline << "\"," << vocab::h_level_name(r.h_level) << ','
            << r.checkpoint_tag << ',' << r.item_count << ',' << r.accuracy << '\n';
    }
}

void write_results_jsonl(const std::vector<ProbeResult>& results,
                         const std::filesystem::path& path) {
    JsonlWriter writer(path);
    for (const auto& r : results) writer.write(r.to_json());
}

}  // namespace qaforge::probe
