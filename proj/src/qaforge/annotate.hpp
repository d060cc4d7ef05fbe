#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qaforge/gateway.hpp"
#include "qaforge/jsonio.hpp"
#include "qaforge/rng.hpp"
#include "qaforge/seeds.hpp"
#include "qaforge/util.hpp"
#include "qaforge/vocab.hpp"

namespace qaforge::annotate {

struct DisciplineLabel {
    std::string primary_discipline;  // closed vocabulary: 62 + cross-discipline/Other/Invalid
    std::string secondary_discipline;
    double confidence = 0.0;
    std::optional<std::string> rejection_reason;
    int retries = 0;

    bool valid() const { return primary_discipline != "Invalid"; }
    json to_json() const;
    static DisciplineLabel from_json(const json& j);
};

struct DifficultyLabel {
    vocab::Tier tier = vocab::Tier::other;
    int h_level = 0;  // fixed image of tier; 0 = none
    std::optional<double> pass_rate_estimate;  // in [0, 1]
    std::vector<std::string> rationale;
    bool band_consistent = true;  // pass rate (when present) lies in the tier's band
    int retries = 0;

    json to_json() const;
    static DifficultyLabel from_json(const json& j);
};

struct StratumQuota {
    std::string stratum_key;
    size_t target_count = 1;
};

// Piecewise band map: p < .10 extreme, [.10,.30) challenge, [.30,.50)
// improvement, [.50,.80) standard, >= .80 basic. Throws std::domain_error
// outside [0, 1].
vocab::Tier tier_from_pass_rate(double p);

// Renders the classification prompt, parses and validates the completion.
// One retry on parse failure, then degrades to Invalid; never throws for
// backend or schema trouble.
DisciplineLabel classify_discipline(std::string_view record_id, std::string_view text,
                                    llm::Gateway& gateway);
DisciplineLabel classify_discipline(const ingest::SeedRecord& record, llm::Gateway& gateway);

DifficultyLabel score_difficulty(std::string_view record_id, std::string_view text,
                                 llm::Gateway& gateway);
DifficultyLabel score_difficulty(const ingest::SeedRecord& record, llm::Gateway& gateway);

struct SampleReport {
    std::map<std::string, size_t> taken;
    std::map<std::string, size_t> shortfall;
};

// Per-stratum counts = min(target, available); uniform within stratum,
// deterministic for a fixed seed. Returns selected indices into `items`.
std::vector<size_t> stratified_sample(size_t item_count,
                                      const std::function<std::string(size_t)>& stratum_of,
                                      const std::vector<StratumQuota>& quotas, uint64_t rng_seed,
                                      SampleReport* report = nullptr);

// Fraction of ids with equal labels. Throws std::invalid_argument when the
// two labelings are not keyed by identical record ids.
double label_consistency(const std::map<std::string, std::string>& a,
                         const std::map<std::string, std::string>& b);

}  // namespace qaforge::annotate
