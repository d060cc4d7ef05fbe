#include "qaforge/analyze.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "qaforge/jsonextract.hpp"
#include "qaforge/prompts.hpp"
#include "qaforge/util.hpp"
#include "qaforge/vocab.hpp"

namespace qaforge::analyze {

namespace {

std::string fmt_double(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

}  // namespace

json DistributionReport::to_json() const {
    json j;
    j["dataset_tag"] = dataset_tag;
    j["sample_size"] = sample_size;
    json disc = json::object();
    for (const auto& [k, v] : by_discipline) disc[k] = v;
    j["by_discipline"] = disc;
    json tier = json::object();
    for (const auto& [k, v] : by_tier) tier[vocab::h_level_name(k)] = v;
    j["by_tier"] = tier;
    j["h4h5_share"] = h4h5_share;
    return j;
}

DistributionReport DistributionReport::from_json(const json& j) {
    DistributionReport r;
    r.dataset_tag = j.value("dataset_tag", "");
    r.sample_size = j.value("sample_size", size_t{0});
    if (j.contains("by_discipline"))
        for (auto& [k, v] : j["by_discipline"].items()) r.by_discipline[k] = v.get<double>();
    if (j.contains("by_tier"))
        for (auto& [k, v] : j["by_tier"].items()) {
            int level = k == "none" ? 0 : k.size() == 2 ? k[1] - '0' : 0;
            r.by_tier[level] = v.get<double>();
        }
    r.h4h5_share = j.value("h4h5_share", 0.0);
    return r;
}

DistributionReport distribution(const std::vector<LabeledItem>& dataset, const std::string& tag) {
    if (dataset.empty()) throw std::invalid_argument("empty dataset");
    DistributionReport report;
    report.dataset_tag = tag;
    report.sample_size = dataset.size();

    std::map<std::string, size_t> disc_counts;
    std::map<int, size_t> tier_counts;
    for (const auto& item : dataset) {
        ++disc_counts[item.discipline];
        ++tier_counts[item.h_level];
    }
    double n = static_cast<double>(dataset.size());
    for (const auto& [k, c] : disc_counts) report.by_discipline[k] = static_cast<double>(c) / n;
    for (const auto& [k, c] : tier_counts) report.by_tier[k] = static_cast<double>(c) / n;

    auto share = [&](int level) {
        auto it = report.by_tier.find(level);
        return it == report.by_tier.end() ? 0.0 : it->second;
    };
    report.h4h5_share = share(4) + share(5);
    return report;
}

json DifficultyComparison::to_json() const {
    json j;
    json deltas = json::object();
    for (const auto& [k, v] : tier_deltas) deltas[vocab::h_level_name(k)] = v;
    j["tier_deltas"] = deltas;
    j["h4h5_ratio"] = ratio_undefined ? json(nullptr) : json(h4h5_ratio);
    j["ratio_undefined"] = ratio_undefined;
    return j;
}

DifficultyComparison compare_difficulty(const DistributionReport& a, const DistributionReport& b) {
    DifficultyComparison cmp;
    std::map<int, double> levels;
    for (const auto& [k, v] : a.by_tier) levels[k] = 0;
    for (const auto& [k, v] : b.by_tier) levels[k] = 0;
    for (auto& [level, _] : levels) {
        auto ia = a.by_tier.find(level);
        auto ib = b.by_tier.find(level);
        cmp.tier_deltas[level] = (ib == b.by_tier.end() ? 0.0 : ib->second) -
                                 (ia == a.by_tier.end() ? 0.0 : ia->second);
    }
    if (a.h4h5_share == 0.0) {
        cmp.ratio_undefined = true;
    } else {
        cmp.h4h5_ratio = b.h4h5_share / a.h4h5_share;
    }
    return cmp;
}

json StageAlignmentRow::to_json() const {
    json j;
    j["targeted_stage"] = targeted_stage;
    j["match_accuracy"] = match_accuracy;
    json dist = json::object();
    for (const auto& [k, v] : actual_distribution) dist[k] = v;
    j["actual_distribution"] = dist;
    j["sample_size"] = sample_size;
    j["degraded"] = degraded;
    return j;
}

std::vector<StageAlignmentRow> validate_stage_alignment(const std::vector<StageItem>& sample,
                                                        llm::Gateway& gateway) {
    std::vector<llm::PromptRequest> requests;
    requests.reserve(sample.size());
    for (const auto& item : sample) {
        if (!vocab::is_valid_stage(item.targeted_stage))
            throw std::invalid_argument("unknown stage: " + item.targeted_stage);
        llm::PromptRequest req;
        req.request_id = item.id + "/stage";
        req.user_text = prompts::render_stage(item.targeted_stage, item.question);
        req.decode_mode = llm::DecodeMode::sampled;
        requests.push_back(std::move(req));
    }
    auto responses = gateway.complete_batch(requests);

    struct Agg {
        size_t items = 0;
        size_t aligned = 0;
        size_t degraded = 0;
        std::map<std::string, size_t> stage_counts;
    };
    std::map<std::string, Agg> by_target;
    for (size_t i = 0; i < sample.size(); ++i) {
        auto& agg = by_target[sample[i].targeted_stage];
        if (!responses[i].ok) {
            ++agg.degraded;
            continue;
        }
        auto obj = extract_json_object(responses[i].response.text);
        if (!obj || !obj->contains("stage") || !(*obj)["stage"].is_string()) {
            ++agg.degraded;
            continue;
        }
        std::string stage = (*obj)["stage"].get<std::string>();
        if (!vocab::is_valid_stage(stage)) stage = "other";
        ++agg.items;
        ++agg.stage_counts[stage];
        if (obj->value("aligned", false)) ++agg.aligned;
    }

    std::vector<StageAlignmentRow> rows;
    for (const auto& [target, agg] : by_target) {
        StageAlignmentRow row;
        row.targeted_stage = target;
        row.sample_size = agg.items;
        row.degraded = agg.degraded;
        if (agg.items > 0) {
            double n = static_cast<double>(agg.items);
            row.match_accuracy = static_cast<double>(agg.aligned) / n;
            for (const auto& [stage, c] : agg.stage_counts)
                row.actual_distribution[stage] = static_cast<double>(c) / n;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::filesystem::path emit_report(const DistributionReport& report, ReportFormat format,
                                  const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::string stem = report.dataset_tag.empty() ? "report" : report.dataset_tag;
    for (auto& c : stem)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';

    std::filesystem::path path;
    std::string body;
    switch (format) {
        case ReportFormat::csv: {
            path = dir / (stem + ".csv");
            body = "axis,key,share\n";
            for (const auto& [k, v] : report.by_discipline)
                body += "discipline,\"" + k + "\"," + fmt_double(v) + "\n";
            for (const auto& [k, v] : report.by_tier)
                body += "tier," + vocab::h_level_name(k) + "," + fmt_double(v) + "\n";
            body += "meta,sample_size," + std::to_string(report.sample_size) + "\n";
            body += "meta,h4h5_share," + fmt_double(report.h4h5_share) + "\n";
            break;
        }
        case ReportFormat::json: {
            path = dir / (stem + ".json");
            body = report.to_json().dump(2) + "\n";
            break;
        }
        case ReportFormat::markdown: {
            path = dir / (stem + ".md");
            body = "# Distribution: " + report.dataset_tag + "\n\n";
            body += "Sample size: " + std::to_string(report.sample_size) + "\n\n";
            body += "| tier | share |\n|---|---|\n";
            char buf[32];
            for (const auto& [k, v] : report.by_tier) {
                std::snprintf(buf, sizeof(buf), "%.2f%%", v * 100.0);
                body += "| " + vocab::h_level_name(k) + " | " + buf + " |\n";
            }
            std::snprintf(buf, sizeof(buf), "%.2f%%", report.h4h5_share * 100.0);
            body += "| H4+H5 | " + std::string(buf) + " |\n\n";
            body += "| discipline | share |\n|---|---|\n";
            for (const auto& [k, v] : report.by_discipline) {
                std::snprintf(buf, sizeof(buf), "%.2f%%", v * 100.0);
                body += "| " + k + " | " + buf + " |\n";
            }
            break;
        }
    }
    write_file(path, body);
    return path;
}

DistributionReport read_report_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    DistributionReport report;
    report.dataset_tag = path.stem().string();
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto first = line.find(',');
        auto last = line.rfind(',');
        if (first == std::string::npos || last == first) continue;
        std::string axis = line.substr(0, first);
        std::string key = line.substr(first + 1, last - first - 1);
        std::string value = line.substr(last + 1);
        if (key.size() >= 2 && key.front() == '"' && key.back() == '"')
            key = key.substr(1, key.size() - 2);
        if (axis == "discipline") {
            report.by_discipline[key] = std::stod(value);
        } else if (axis == "tier") {
            int level = key == "none" ? 0 : key.size() == 2 ? key[1] - '0' : 0;
            report.by_tier[level] = std::stod(value);
        } else if (axis == "meta" && key == "sample_size") {
            report.sample_size = static_cast<size_t>(std::stoull(value));
        } else if (axis == "meta" && key == "h4h5_share") {
            report.h4h5_share = std::stod(value);
        }
    }
    return report;
}

}  // namespace qaforge::analyze
