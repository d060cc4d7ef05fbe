#include "qaforge.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "qaforge/pipeline.hpp"

using qaforge::json;

struct qaforge_ctx {
    qaforge::pipeline::Pipeline pipeline;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void set_error(const std::string& msg) { g_last_error = msg; }

qaforge_status classify_exception(const std::exception& e) {
    set_error(e.what());
    if (dynamic_cast<const qaforge::pipeline::ConfigDrift*>(&e)) return QAFORGE_ERR_CONFIG_DRIFT;
    if (dynamic_cast<const qaforge::pipeline::ConfigError*>(&e)) return QAFORGE_ERR_CONFIG;
    if (dynamic_cast<const qaforge::pipeline::StageFailure*>(&e)) return QAFORGE_ERR_STAGE_FAILED;
    if (dynamic_cast<const qaforge::llm::GatewayError*>(&e)) return QAFORGE_ERR_BACKEND;
    if (dynamic_cast<const std::ios_base::failure*>(&e)) return QAFORGE_ERR_IO;
    return QAFORGE_ERR_INTERNAL;
}

}  // namespace

extern "C" {

const char* qaforge_version(void) { return "0.1.0"; }

const char* qaforge_last_error(void) { return g_last_error.c_str(); }

qaforge_status qaforge_validate_config(const char* config_json, char** out_normalized) {
    if (out_normalized) *out_normalized = nullptr;
    if (!config_json) {
        set_error("config_json is null");
        return QAFORGE_ERR_INVALID_ARG;
    }
    json parsed = json::parse(config_json, nullptr, false);
    if (parsed.is_discarded()) {
        set_error("config is not valid JSON");
        return QAFORGE_ERR_CONFIG;
    }
    std::vector<std::string> errors;
    json normalized = qaforge::pipeline::validate_config(parsed, &errors);
    if (normalized.is_null()) {
        json errs = json::array();
        for (const auto& e : errors) errs.push_back(e);
        if (out_normalized) *out_normalized = dup_string(errs.dump());
        set_error(errs.dump());
        return QAFORGE_ERR_CONFIG;
    }
    if (out_normalized) *out_normalized = dup_string(normalized.dump());
    return QAFORGE_OK;
}

qaforge_ctx* qaforge_ctx_new(const char* config_json, long long mock_seed) {
    if (!config_json) {
        set_error("config_json is null");
        return nullptr;
    }
    json parsed = json::parse(config_json, nullptr, false);
    if (parsed.is_discarded()) {
        set_error("config is not valid JSON");
        return nullptr;
    }
    if (mock_seed >= 0 && parsed.is_object()) {
        if (!parsed.contains("backend") || !parsed["backend"].is_object())
            parsed["backend"] = json::object();
        parsed["backend"]["endpoint_url"] = "";
        parsed["backend"]["mock_seed"] = static_cast<uint64_t>(mock_seed);
    }
    try {
        return new qaforge_ctx{qaforge::pipeline::Pipeline(parsed)};
    } catch (const std::exception& e) {
        set_error(e.what());
        return nullptr;
    }
}

void qaforge_ctx_free(qaforge_ctx* ctx) { delete ctx; }

char* qaforge_run_id(qaforge_ctx* ctx) {
    if (!ctx) {
        set_error("ctx is null");
        return nullptr;
    }
    return dup_string(ctx->pipeline.run_id());
}

qaforge_status qaforge_run_stage(qaforge_ctx* ctx, const char* stage, char** out_summary) {
    if (out_summary) *out_summary = nullptr;
    if (!ctx || !stage) {
        set_error(!ctx ? "ctx is null" : "stage is null");
        return QAFORGE_ERR_INVALID_ARG;
    }
    try {
        json summary = ctx->pipeline.run_stage(stage);
        if (out_summary) *out_summary = dup_string(summary.dump());
        return QAFORGE_OK;
    } catch (const std::exception& e) {
        return classify_exception(e);
    }
}

qaforge_status qaforge_run_pipeline(qaforge_ctx* ctx, char** out_summary) {
    if (out_summary) *out_summary = nullptr;
    if (!ctx) {
        set_error("ctx is null");
        return QAFORGE_ERR_INVALID_ARG;
    }
    try {
        json summary = ctx->pipeline.run_all();
        if (out_summary) *out_summary = dup_string(summary.dump());
        return QAFORGE_OK;
    } catch (const std::exception& e) {
        return classify_exception(e);
    }
}

qaforge_status qaforge_dry_run(qaforge_ctx* ctx, char** out_plan) {
    if (out_plan) *out_plan = nullptr;
    if (!ctx) {
        set_error("ctx is null");
        return QAFORGE_ERR_INVALID_ARG;
    }
    try {
        json plan = ctx->pipeline.dry_run_plan();
        if (out_plan) *out_plan = dup_string(plan.dump());
        return QAFORGE_OK;
    } catch (const std::exception& e) {
        return classify_exception(e);
    }
}

void qaforge_string_free(char* s) { std::free(s); }

}  // extern "C"
