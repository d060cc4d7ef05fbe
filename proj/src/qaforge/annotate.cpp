#include "qaforge/annotate.hpp"

#include <algorithm>
#include <stdexcept>

#include "qaforge/jsonextract.hpp"
#include "qaforge/prompts.hpp"

namespace qaforge::annotate {

json DisciplineLabel::to_json() const {
    json j;
    j["primary_discipline"] = primary_discipline;
    j["secondary_discipline"] = secondary_discipline;
    j["confidence"] = confidence;
    if (rejection_reason) j["rejection_reason"] = *rejection_reason;
    else j["rejection_reason"] = nullptr;
    if (retries > 0) j["retries"] = retries;
    return j;
}

DisciplineLabel DisciplineLabel::from_json(const json& j) {
    DisciplineLabel l;
    l.primary_discipline = j.value("primary_discipline", "Invalid");
    l.secondary_discipline = j.value("secondary_discipline", "");
    l.confidence = j.value("confidence", 0.0);
    if (j.contains("rejection_reason") && j["rejection_reason"].is_string())
        l.rejection_reason = j["rejection_reason"].get<std::string>();
    l.retries = j.value("retries", 0);
    return l;
}

json DifficultyLabel::to_json() const {
    json j;
    j["difficulty_tier"] = vocab::tier_name(tier);
    j["h_level"] = vocab::h_level_name(h_level);
    if (pass_rate_estimate) j["pass_rate_estimate"] = *pass_rate_estimate;
    j["rationale"] = rationale;
    j["band_consistent"] = band_consistent;
    if (retries > 0) j["retries"] = retries;
    return j;
}

DifficultyLabel DifficultyLabel::from_json(const json& j) {
    DifficultyLabel l;
    vocab::Tier t;
    if (vocab::tier_from_name(j.value("difficulty_tier", "other"), t)) l.tier = t;
    l.h_level = vocab::h_level(l.tier);
    if (j.contains("pass_rate_estimate") && j["pass_rate_estimate"].is_number())
        l.pass_rate_estimate = j["pass_rate_estimate"].get<double>();
    if (j.contains("rationale") && j["rationale"].is_array())
        for (const auto& r : j["rationale"])
            if (r.is_string()) l.rationale.push_back(r.get<std::string>());
    l.band_consistent = j.value("band_consistent", true);
    l.retries = j.value("retries", 0);
    return l;
}

vocab::Tier tier_from_pass_rate(double p) {
    if (p < 0.0 || p > 1.0) throw std::domain_error("pass rate outside [0, 1]");
    if (p < 0.10) return vocab::Tier::extreme;
    if (p < 0.30) return vocab::Tier::challenge;
    if (p < 0.50) return vocab::Tier::improvement;
    if (p < 0.80) return vocab::Tier::standard;
    return vocab::Tier::basic;
}

namespace {

// Calls the gateway and returns the first parsable JSON object, retrying the
// request once. Returns nullopt (with retries recorded) when both attempts
// fail to produce a parsable object or the backend degrades.
std::optional<json> complete_json_object(std::string_view record_id, const std::string& prompt,
                                         llm::Gateway& gateway, std::string_view tag,
                                         int& retries) {
    for (int attempt = 0; attempt < 2; ++attempt) {
        retries = attempt;
        llm::PromptRequest req;
        req.request_id = std::string(record_id) + "/" + std::string(tag) + "/" +
                         std::to_string(attempt);
        req.user_text = prompt;
        req.decode_mode = llm::DecodeMode::sampled;
        try {
            auto resp = gateway.complete(req);
            if (auto obj = extract_json_object(resp.text)) return obj;
        } catch (const llm::GatewayError&) {
            // degrade, maybe retry
        }
    }
    return std::nullopt;
}

std::optional<double> pass_rate_from_rationale(const std::vector<std::string>& rationale) {
    for (const auto& line : rationale) {
        auto pos = line.find("approximately ");
        if (pos == std::string::npos) continue;
        pos += 14;
        double value = 0;
        bool any = false;
        while (pos < line.size() && line[pos] >= '0' && line[pos] <= '9') {
            value = value * 10 + (line[pos] - '0');
            ++pos;
            any = true;
        }
        if (any) return value / 100.0;
    }
    return std::nullopt;
}

}  // namespace

DisciplineLabel classify_discipline(std::string_view record_id, std::string_view text,
                                    llm::Gateway& gateway) {
    DisciplineLabel label;
    auto invalid = [&](const std::string& reason) {
        label.primary_discipline = "Invalid";
        label.rejection_reason = reason;
        return label;
    };

    auto obj = complete_json_object(record_id, prompts::render_discipline(text), gateway,
                                    "discipline", label.retries);
    if (!obj) return invalid("unparsable response");

    if (!obj->contains("primary_discipline") || !(*obj)["primary_discipline"].is_string())
        return invalid("missing primary_discipline");
    label.primary_discipline = (*obj)["primary_discipline"].get<std::string>();
    if (!vocab::is_valid_discipline(label.primary_discipline))
        return invalid("unknown discipline: " + label.primary_discipline);

    if (obj->contains("secondary_discipline") && (*obj)["secondary_discipline"].is_string())
        label.secondary_discipline = (*obj)["secondary_discipline"].get<std::string>();
    label.confidence = obj->value("confidence", 0.0);
    if (obj->contains("rejection_reason") && (*obj)["rejection_reason"].is_string())
        label.rejection_reason = (*obj)["rejection_reason"].get<std::string>();

    if (label.primary_discipline == "Invalid" && !label.rejection_reason)
        label.rejection_reason = "model rejection";
    // The prompt's 60% confidence floor for a concrete discipline.
    if (label.valid() && label.primary_discipline != "Other" && label.confidence < 0.6)
        label.primary_discipline = "Other";
    return label;
}

DisciplineLabel classify_discipline(const ingest::SeedRecord& record, llm::Gateway& gateway) {
    return classify_discipline(record.seed_id, record.content_text(), gateway);
}

DifficultyLabel score_difficulty(std::string_view record_id, std::string_view text,
                                 llm::Gateway& gateway) {
    DifficultyLabel label;
    auto obj = complete_json_object(record_id, prompts::render_difficulty(text), gateway,
                                    "difficulty", label.retries);
    if (!obj) {
        label.rationale.push_back("unparsable response");
        return label;  // tier other, h_level none
    }

    vocab::Tier t = vocab::Tier::other;
    if (obj->contains("difficulty_tier") && (*obj)["difficulty_tier"].is_string())
        vocab::tier_from_name((*obj)["difficulty_tier"].get<std::string>(), t);
    label.tier = t;
    label.h_level = vocab::h_level(t);

    if (obj->contains("rationale") && (*obj)["rationale"].is_array())
        for (const auto& r : (*obj)["rationale"])
            if (r.is_string()) label.rationale.push_back(r.get<std::string>());

    label.pass_rate_estimate = pass_rate_from_rationale(label.rationale);
    if (label.pass_rate_estimate && label.tier != vocab::Tier::other) {
        double p = std::clamp(*label.pass_rate_estimate, 0.0, 1.0);
        label.band_consistent = tier_from_pass_rate(p) == label.tier;
    }
    return label;
}

DifficultyLabel score_difficulty(const ingest::SeedRecord& record, llm::Gateway& gateway) {
    return score_difficulty(record.seed_id, record.content_text(), gateway);
}

std::vector<size_t> stratified_sample(size_t item_count,
                                      const std::function<std::string(size_t)>& stratum_of,
                                      const std::vector<StratumQuota>& quotas, uint64_t rng_seed,
                                      SampleReport* report) {
    std::map<std::string, std::vector<size_t>> by_stratum;
    for (size_t i = 0; i < item_count; ++i) by_stratum[stratum_of(i)].push_back(i);

    std::vector<size_t> selected;
    for (const auto& quota : quotas) {
        auto it = by_stratum.find(quota.stratum_key);
        size_t available = it == by_stratum.end() ? 0 : it->second.size();
        size_t take = std::min(quota.target_count, available);
        if (report) {
            report->taken[quota.stratum_key] = take;
            if (take < quota.target_count)
                report->shortfall[quota.stratum_key] = quota.target_count - take;
        }
        if (take == 0) continue;
        auto pool = it->second;
        Rng rng(util::fnv1a64(quota.stratum_key, rng_seed));
        rng.shuffle(pool);
        pool.resize(take);
        std::sort(pool.begin(), pool.end());
        selected.insert(selected.end(), pool.begin(), pool.end());
    }
    return selected;
}

double label_consistency(const std::map<std::string, std::string>& a,
                         const std::map<std::string, std::string>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("label key mismatch");
    size_t equal = 0;
    for (const auto& [id, label] : a) {
        auto it = b.find(id);
        if (it == b.end()) throw std::invalid_argument("label key mismatch: " + id);
        if (it->second == label) ++equal;
    }
    if (a.empty()) return 1.0;
    return static_cast<double>(equal) / static_cast<double>(a.size());
}

}  // namespace qaforge::annotate
