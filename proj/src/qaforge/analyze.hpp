#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "qaforge/gateway.hpp"
#include "qaforge/jsonio.hpp"

namespace qaforge::analyze {

struct LabeledItem {
    std::string id;
    std::string discipline;
    int h_level = 0;  // 1..5, 0 = unknown
};

struct DistributionReport {
    std::string dataset_tag;
    std::map<std::string, double> by_discipline;  // shares, sum 1 +- 1e-9
    std::map<int, double> by_tier;                // h_level -> share
    double h4h5_share = 0.0;
    size_t sample_size = 0;

    json to_json() const;
    static DistributionReport from_json(const json& j);
};

// Exact counting; shares at full precision. Throws std::invalid_argument on
// an empty dataset.
DistributionReport distribution(const std::vector<LabeledItem>& dataset, const std::string& tag);

struct DifficultyComparison {
    std::map<int, double> tier_deltas;  // b - a per h_level
    double h4h5_ratio = 0.0;            // b.h4h5 / a.h4h5
    bool ratio_undefined = false;       // a.h4h5 == 0

    json to_json() const;
};

DifficultyComparison compare_difficulty(const DistributionReport& a, const DistributionReport& b);

struct StageItem {
    std::string id;
    std::string targeted_stage;  // one of vocab::stages()
    std::string question;
};

struct StageAlignmentRow {
    std::string targeted_stage;
    double match_accuracy = 0.0;
    std::map<std::string, double> actual_distribution;  // stage -> share
    size_t sample_size = 0;
    size_t degraded = 0;  // backend failures / unparsable, excluded

    json to_json() const;
};

// Relabels each item's actual stage through the gateway and aggregates per
// targeted stage. match_accuracy is the fraction the judge marks aligned.
std::vector<StageAlignmentRow> validate_stage_alignment(const std::vector<StageItem>& sample,
                                                        llm::Gateway& gateway);

enum class ReportFormat { csv, json, markdown };

// Writes one file per report in a stable field order; reruns are
// byte-identical. Returns the path written.
std::filesystem::path emit_report(const DistributionReport& report, ReportFormat format,
                                  const std::filesystem::path& dir);

// Round-trip reader for the csv layout emit_report produces.
DistributionReport read_report_csv(const std::filesystem::path& path);

}  // namespace qaforge::analyze
