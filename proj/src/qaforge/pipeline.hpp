#pragma once

#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "qaforge/gateway.hpp"
#include "qaforge/jsonio.hpp"

namespace qaforge::pipeline {

class ConfigError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Resume with a config whose hash no longer matches the stored manifest.
class ConfigDrift : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class StageFailure : public std::runtime_error {
public:
    StageFailure(std::string stage, const std::string& msg)
        : std::runtime_error(stage + ": " + msg), stage(std::move(stage)) {}
    std::string stage;
};

// Validates and normalizes a config: defaults materialized, unknown keys
// rejected. On failure returns a null json and appends per-key messages to
// `errors`. Normalization is idempotent.
json validate_config(const json& config, std::vector<std::string>* errors = nullptr);

// Stage order (probe present only when enabled in the config).
std::vector<std::string> stage_order(const json& normalized_config);

class Pipeline {
public:
    // Accepts a raw config; throws ConfigError when invalid, ConfigDrift when
    // a manifest from a different config already lives in run_dir.
    explicit Pipeline(const json& config);

    const std::string& run_id() const { return run_id_; }
    const json& config() const { return config_; }
    std::filesystem::path run_dir() const { return run_dir_; }
    json manifest() const;

    bool stage_completed(const std::string& stage) const;

    // Runs one stage (predecessors must be complete); returns its summary.
    // Throws StageFailure / ConfigDrift.
    json run_stage(const std::string& stage);

    // Runs remaining stages in order, skipping completed ones. Returns
    // {stage: summary} including "skipped": true entries.
    json run_all();

    // The resolved execution plan without running anything.
    json dry_run_plan() const;

    // Override the backend (tests); by default built from config.backend.
    void set_gateway(std::shared_ptr<llm::Gateway> gateway) { gateway_ = std::move(gateway); }
    llm::Gateway& gateway();

private:
    json run_ingest();
    json run_decontam(bool post);
    json run_annotate();
    json run_probe();
    json run_synth();
    json run_refine();
    json run_analyze();
    json run_blend();

    void load_or_init_manifest();
    void save_manifest() const;
    std::vector<std::string> benchmark_docs() const;

    json config_;
    std::string run_id_;
    std::filesystem::path run_dir_;
    std::vector<std::string> stages_;
    json manifest_;
    std::shared_ptr<llm::Gateway> gateway_;
};

}  // namespace qaforge::pipeline
