// Command-line front end; talks to the library through the C API only.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qaforge.h"

using nlohmann::json;

namespace {

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw CLI::ValidationError("--config", "cannot open " + path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw CLI::ValidationError("--config", path + " is not valid JSON");
    return j;
}

json& section(json& config, const char* name) {
    if (!config.contains(name) || !config[name].is_object()) config[name] = json::object();
    return config[name];
}

struct CtxGuard {
    qaforge_ctx* ctx = nullptr;
    ~CtxGuard() { qaforge_ctx_free(ctx); }
};

int run_stages(const json& config, long long mock_seed, bool dry_run,
               const std::vector<std::string>& stages) {
    std::string dump = config.dump();

    char* normalized = nullptr;
    if (qaforge_validate_config(dump.c_str(), &normalized) != QAFORGE_OK) {
        std::cerr << "config error: " << qaforge_last_error() << "\n";
        qaforge_string_free(normalized);
        return 2;
    }
    qaforge_string_free(normalized);

    CtxGuard guard;
    guard.ctx = qaforge_ctx_new(dump.c_str(), mock_seed);
    if (!guard.ctx) {
        std::cerr << "error: " << qaforge_last_error() << "\n";
        return 2;
    }

    if (dry_run) {
        char* plan = nullptr;
        if (qaforge_dry_run(guard.ctx, &plan) != QAFORGE_OK) {
            std::cerr << "error: " << qaforge_last_error() << "\n";
            return 1;
        }
        std::cout << json::parse(plan).dump(2) << "\n";
        qaforge_string_free(plan);
        return 0;
    }

    for (const auto& stage : stages) {
        char* summary = nullptr;
        qaforge_status status = stage == "all" ? qaforge_run_pipeline(guard.ctx, &summary)
                                               : qaforge_run_stage(guard.ctx, stage.c_str(),
                                                                   &summary);
        if (status != QAFORGE_OK) {
            std::cerr << "stage " << stage << " failed: " << qaforge_last_error() << "\n";
            qaforge_string_free(summary);
            return 1;
        }
        json out;
        out[stage] = json::parse(summary);
        std::cout << out.dump(2) << "\n";
        qaforge_string_free(summary);
    }
    return 0;
}

// Tool-local arithmetic over two distribution-report JSON files.
int compare_reports(const std::string& dataset_path, const std::string& compare_path) {
    auto load = [](const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open " + path);
        return json::parse(in);
    };
    json a = load(dataset_path);
    json b = load(compare_path);
    json out;
    json deltas = json::object();
    json a_tiers = a.value("by_tier", json::object());
    json b_tiers = b.value("by_tier", json::object());
    for (auto& [tier, share] : a_tiers.items())
        deltas[tier] = b_tiers.value(tier, 0.0) - share.get<double>();
    for (auto& [tier, share] : b_tiers.items())
        if (!deltas.contains(tier)) deltas[tier] = share.get<double>();
    out["tier_deltas"] = deltas;
    double ah = a.value("h4h5_share", 0.0);
    double bh = b.value("h4h5_share", 0.0);
    if (ah == 0.0) {
        out["h4h5_ratio"] = nullptr;
        out["ratio_undefined"] = true;
    } else {
        out["h4h5_ratio"] = bh / ah;
        out["ratio_undefined"] = false;
    }
    std::cout << out.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qaforge: batch QA synthesis pipeline"};
    app.set_version_flag("--version", qaforge_version());
    app.require_subcommand(1);

    std::string config_path;
    long long mock_seed = -1;
    bool dry_run = false;
    app.add_option("--config", config_path, "Pipeline config file (JSON)");
    app.add_option("--mock-backend", mock_seed, "Use the deterministic mock backend with SEED");
    app.add_flag("--dry-run", dry_run, "Print the resolved plan without running");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Read and validate seed records");
    std::string seeds_path, seed_source;
    ingest->add_option("--seeds", seeds_path, "Seed ndjson file");
    ingest->add_option("--source", seed_source, "qa_pair | book | web_page");

    // decontam
    auto* decontam = app.add_subcommand("decontam", "Benchmark decontamination");
    int ngram_size = 0;
    double embed_threshold = 0.0;
    std::string benchmarks;
    bool post = false;
    decontam->add_option("--ngram-size", ngram_size, "Exact-overlap n-gram size");
    decontam->add_option("--embed-threshold", embed_threshold,
                         "Enable embedding check at this cosine threshold");
    decontam->add_option("--benchmarks", benchmarks, "Benchmark file or directory");
    decontam->add_flag("--post", post, "Run the post-synthesis pass");

    // annotate
    app.add_subcommand("annotate", "Discipline and difficulty annotation");

    // probe
    auto* probe = app.add_subcommand("probe", "Few-shot probing");
    std::string checkpoint_tag;
    int trials = 0, shots = -1;
    probe->add_option("--checkpoint-tag", checkpoint_tag, "Label for this checkpoint");
    probe->add_option("--trials", trials, "Trials per item");
    probe->add_option("--shots", shots, "Exemplars per prompt");

    // synth
    auto* synth = app.add_subcommand("synth", "Two-way QA synthesis");
    std::vector<std::string> paths;
    std::string role, qtype, weights_file;
    int n = 0;
    synth->add_option("--path", paths, "multi_grade and/or high_difficulty");
    synth->add_option("--role", role, "Fixed multi-grade role");
    synth->add_option("--qtype", qtype, "multiple_choice | essay");
    synth->add_option("--n", n, "Items requested per prompt");
    synth->add_option("--weights", weights_file, "Sampler weights file (JSON)");

    // refine
    auto* refine = app.add_subcommand("refine", "Solvability filter + answer refinement");
    bool strict = false;
    refine->add_flag("--strict", strict, "Drop items the backend could not assess");

    // stats
    auto* stats = app.add_subcommand("stats", "Distribution diagnostics");
    std::string dataset_report, compare_report;
    stats->add_option("--dataset", dataset_report, "Distribution report JSON");
    stats->add_option("--compare", compare_report, "Report to compare against --dataset");

    // blend
    auto* blend = app.add_subcommand("blend", "Mix QA data with general text into shards");
    std::string ratio, blend_format;
    long long shard_tokens = 0;
    blend->add_option("--ratio", ratio, "text:qa token ratio, e.g. 1:1");
    blend->add_option("--shard-tokens", shard_tokens, "Tokens per shard");
    blend->add_option("--format", blend_format, "plain | cot");

    // run
    app.add_subcommand("run", "Run the full pipeline (resumable)");

    // let the global --config/--mock-backend/--dry-run appear after a subcommand
    for (auto* sub : app.get_subcommands([](const CLI::App*) { return true; }))
        sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        json config = load_config(config_path);
        std::vector<std::string> stages;

        if (ingest->parsed()) {
            if (!seeds_path.empty()) config["seeds"] = seeds_path;
            if (!seed_source.empty()) config["seed_source"] = seed_source;
            stages = {"ingest"};
        } else if (decontam->parsed()) {
            auto& dc = section(config, "decontam");
            if (ngram_size > 0) dc["ngram_size"] = ngram_size;
            if (embed_threshold > 0) {
                dc["embed_enabled"] = true;
                dc["embed_threshold"] = embed_threshold;
            }
            if (!benchmarks.empty()) config["benchmarks"] = benchmarks;
            stages = {post ? "decontam_post" : "decontam"};
        } else if (app.get_subcommand("annotate")->parsed()) {
            stages = {"annotate"};
        } else if (probe->parsed()) {
            auto& pc = section(config, "probe");
            pc["enabled"] = true;
            if (!checkpoint_tag.empty()) pc["checkpoint_tag"] = checkpoint_tag;
            if (trials > 0) pc["trials"] = trials;
            if (shots >= 0) pc["shots"] = shots;
            stages = {"probe"};
        } else if (synth->parsed()) {
            auto& sc = section(config, "synth");
            if (!paths.empty()) sc["paths"] = paths;
            if (!role.empty()) sc["role"] = role;
            if (!qtype.empty()) sc["question_type"] = qtype;
            if (n > 0) sc["n"] = n;
            if (!weights_file.empty()) sc["weights_file"] = weights_file;
            stages = {"synth"};
        } else if (refine->parsed()) {
            if (strict) section(config, "refine")["strict"] = true;
            stages = {"refine"};
        } else if (stats->parsed()) {
            if (!dataset_report.empty() && !compare_report.empty())
                return compare_reports(dataset_report, compare_report);
            stages = {"analyze"};
        } else if (blend->parsed()) {
            auto& bc = section(config, "blend");
            if (!ratio.empty()) bc["ratio"] = ratio;
            if (shard_tokens > 0) bc["shard_tokens"] = shard_tokens;
            if (!blend_format.empty()) bc["format"] = blend_format;
            stages = {"blend"};
        } else {
            stages = {"all"};
        }

        return run_stages(config, mock_seed, dry_run, stages);
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
