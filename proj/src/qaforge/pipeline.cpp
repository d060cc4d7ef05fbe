#include "qaforge/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <unordered_set>

#include "qaforge/analyze.hpp"
#include "qaforge/annotate.hpp"
#include "qaforge/blend.hpp"
#include "qaforge/decontam.hpp"
#include "qaforge/probe.hpp"
#include "qaforge/refine.hpp"
#include "qaforge/seeds.hpp"
#include "qaforge/synth.hpp"
#include "qaforge/util.hpp"
#include "qaforge/vocab.hpp"

namespace qaforge::pipeline {

namespace {

struct KeySpec {
    const char* name;
    json::value_t type;
    json fallback;
};

void check_section(const json& input, json& out, const std::string& prefix,
                   const std::vector<KeySpec>& keys, std::vector<std::string>& errors) {
    for (const auto& spec : keys) {
        if (!input.contains(spec.name)) {
            out[spec.name] = spec.fallback;
            continue;
        }
        const json& v = input[spec.name];
        bool ok = v.type() == spec.type ||
                  (spec.type == json::value_t::number_float && v.is_number()) ||
                  (spec.type == json::value_t::number_integer && v.is_number_integer()) ||
                  (spec.type == json::value_t::number_unsigned && v.is_number_integer() &&
                   v.get<int64_t>() >= 0);
        if (!ok) {
            errors.push_back(prefix + spec.name + ": wrong type");
            out[spec.name] = spec.fallback;
            continue;
        }
        if (spec.type == json::value_t::number_float) out[spec.name] = v.get<double>();
        else out[spec.name] = v;
    }
    for (auto& [key, _] : input.items()) {
        bool known = std::any_of(keys.begin(), keys.end(),
                                 [&](const KeySpec& s) { return key == s.name; });
        if (!known) errors.push_back("unknown key: " + prefix + key);
    }
}

bool parse_ratio(const std::string& s, double& text_part, double& qa_part) {
    auto colon = s.find(':');
    if (colon == std::string::npos) return false;
    try {
        text_part = std::stod(s.substr(0, colon));
        qa_part = std::stod(s.substr(colon + 1));
    } catch (...) {
        return false;
    }
    return text_part > 0 && qa_part > 0;
}

std::string hex64(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace

json validate_config(const json& config, std::vector<std::string>* errors) {
    std::vector<std::string> errs;
    if (!config.is_object()) {
        if (errors) errors->push_back("config must be a JSON object");
        return json();
    }

    json norm = json::object();
    const std::vector<KeySpec> top = {
        {"rng_seed", json::value_t::number_unsigned, 0},
        {"run_dir", json::value_t::string, "qaforge-run"},
        {"seeds", json::value_t::string, ""},
        {"seed_source", json::value_t::string, "qa_pair"},
        {"benchmarks", json::value_t::string, ""},
        {"text_corpus", json::value_t::string, ""},
        {"backend", json::value_t::object, json::object()},
        {"decontam", json::value_t::object, json::object()},
        {"probe", json::value_t::object, json::object()},
        {"synth", json::value_t::object, json::object()},
        {"refine", json::value_t::object, json::object()},
        {"blend", json::value_t::object, json::object()},
    };
    // Sections are validated below; scalar members first.
    json scalars = config;
    for (const char* section : {"backend", "decontam", "probe", "synth", "refine", "blend"})
        scalars.erase(section);
    json top_norm = json::object();
    check_section(scalars, top_norm, "", top, errs);
    for (auto& [k, v] : top_norm.items())
        if (!v.is_object()) norm[k] = v;

    ingest::SourceKind kind;
    if (!ingest::source_kind_from_name(norm["seed_source"].get<std::string>(), kind)) {
        errs.push_back("seed_source: must be qa_pair, book, or web_page");
        norm["seed_source"] = "qa_pair";
    }

    json backend = json::object();
    check_section(config.value("backend", json::object()), backend, "backend.",
                  {{"mock_seed", json::value_t::number_unsigned, 0},
                   {"endpoint_url", json::value_t::string, ""},
                   {"model_id", json::value_t::string, ""},
                   {"temperature", json::value_t::number_float, 0.6},
                   {"top_p", json::value_t::number_float, 0.95},
                   {"top_k", json::value_t::number_integer, -1},
                   {"max_in_flight", json::value_t::number_integer, 8},
                   {"retry_budget", json::value_t::number_integer, 3}},
                  errs);
    norm["backend"] = backend;

    json decontam = json::object();
    check_section(config.value("decontam", json::object()), decontam, "decontam.",
                  {{"ngram_size", json::value_t::number_integer, 10},
                   {"embed_enabled", json::value_t::boolean, false},
                   {"embed_threshold", json::value_t::number_float, 0.95},
                   {"embed_dim", json::value_t::number_integer, 256}},
                  errs);
    if (decontam["ngram_size"].get<int>() < 2) errs.push_back("decontam.ngram_size: must be >= 2");
    norm["decontam"] = decontam;

    json probe = json::object();
    check_section(config.value("probe", json::object()), probe, "probe.",
                  {{"enabled", json::value_t::boolean, false},
                   {"trials", json::value_t::number_integer, 10},
                   {"shots", json::value_t::number_integer, 5},
                   {"checkpoint_tag", json::value_t::string, "pipeline"}},
                  errs);
    if (probe["trials"].get<int>() < 1) errs.push_back("probe.trials: must be >= 1");
    if (probe["shots"].get<int>() < 0) errs.push_back("probe.shots: must be >= 0");
    norm["probe"] = probe;

    json synth_cfg = json::object();
    check_section(config.value("synth", json::object()), synth_cfg, "synth.",
                  {{"n", json::value_t::number_integer, 10},
                   {"paths", json::value_t::array, json::array({"multi_grade", "high_difficulty"})},
                   {"question_type", json::value_t::string, "multiple_choice"},
                   {"jobs_per_path", json::value_t::number_integer, 0},
                   {"role", json::value_t::string, ""},
                   {"weights_file", json::value_t::string, ""},
                   {"weights_hash", json::value_t::number_unsigned, 0}},
                  errs);
    if (synth_cfg["n"].get<int>() < 1) errs.push_back("synth.n: must be >= 1");
    for (const auto& p : synth_cfg["paths"]) {
        synth::Path path;
        if (!p.is_string() || !synth::path_from_name(p.get<std::string>(), path))
            errs.push_back("synth.paths: unknown path " + p.dump());
    }
    if (const std::string role = synth_cfg["role"].get<std::string>(); !role.empty()) {
        synth::Role r;
        if (!synth::role_from_name(role, r))
            errs.push_back("synth.role: must be high_school, college, or graduate");
    }
    synth::QuestionType qtype;
    if (!synth::question_type_from_name(synth_cfg["question_type"].get<std::string>(), qtype)) {
        errs.push_back("synth.question_type: must be multiple_choice or essay");
        synth_cfg["question_type"] = "multiple_choice";
    }
    norm["synth"] = synth_cfg;

    json refine_cfg = json::object();
    check_section(config.value("refine", json::object()), refine_cfg, "refine.",
                  {{"strict", json::value_t::boolean, false}}, errs);
    norm["refine"] = refine_cfg;

    json blend_cfg = json::object();
    check_section(config.value("blend", json::object()), blend_cfg, "blend.",
                  {{"ratio", json::value_t::string, "1:1"},
                   {"shard_tokens", json::value_t::number_unsigned, 4194304},
                   {"format", json::value_t::string, "plain"},
                   {"drift_bound", json::value_t::number_float, 0.02},
                   {"top_fraction", json::value_t::number_float, 0.20}},
                  errs);
    double rt, rq;
    if (!parse_ratio(blend_cfg["ratio"].get<std::string>(), rt, rq)) {
        errs.push_back("blend.ratio: must look like \"1:1\" with positive parts");
        blend_cfg["ratio"] = "1:1";
    }
    const std::string fmt = blend_cfg["format"].get<std::string>();
    if (fmt != "plain" && fmt != "cot") {
        errs.push_back("blend.format: must be plain or cot");
        blend_cfg["format"] = "plain";
    }
    norm["blend"] = blend_cfg;

    if (errors) *errors = errs;
    if (!errs.empty()) return json();
    return norm;
}

std::vector<std::string> stage_order(const json& normalized_config) {
    std::vector<std::string> order = {"ingest", "decontam", "annotate"};
    if (normalized_config.contains("probe") && normalized_config["probe"].value("enabled", false))
        order.push_back("probe");
    for (const char* s : {"synth", "refine", "decontam_post", "analyze", "blend"})
        order.push_back(s);
    return order;
}

Pipeline::Pipeline(const json& config) {
    std::vector<std::string> errors;
    config_ = validate_config(config, &errors);
    if (config_.is_null()) {
        std::string msg = "invalid config";
        for (const auto& e : errors) msg += "; " + e;
        throw ConfigError(msg);
    }
    // Weights are config by content: a changed file must surface as drift.
    std::string weights_file = config_["synth"]["weights_file"].get<std::string>();
    if (!weights_file.empty() && std::filesystem::exists(weights_file))
        config_["synth"]["weights_hash"] = util::fnv1a64(read_file(weights_file));
    run_id_ = hex64(util::fnv1a64(config_.dump()));
    run_dir_ = config_["run_dir"].get<std::string>();
    stages_ = stage_order(config_);
    load_or_init_manifest();
}

void Pipeline::load_or_init_manifest() {
    std::filesystem::create_directories(run_dir_);
    auto path = run_dir_ / "manifest.json";
    if (std::filesystem::exists(path)) {
        json stored = json::parse(read_file(path), nullptr, false);
        if (stored.is_object() && stored.value("run_id", "") == run_id_) {
            manifest_ = stored;
            return;
        }
        throw ConfigDrift("manifest in " + run_dir_.string() +
                          " was produced by a different config (run_id mismatch)");
    }
    manifest_ = json::object();
    manifest_["run_id"] = run_id_;
    manifest_["rng_seed"] = config_["rng_seed"];
    manifest_["stages"] = stages_;
    manifest_["completed"] = json::object();
    save_manifest();
}

void Pipeline::save_manifest() const {
    write_file(run_dir_ / "manifest.json", manifest_.dump(2) + "\n");
}

json Pipeline::manifest() const { return manifest_; }

bool Pipeline::stage_completed(const std::string& stage) const {
    return manifest_["completed"].contains(stage);
}

llm::Gateway& Pipeline::gateway() {
    if (!gateway_) {
        const json& b = config_["backend"];
        if (!b["endpoint_url"].get<std::string>().empty()) {
            llm::BackendProfile profile;
            profile.endpoint_url = b["endpoint_url"].get<std::string>();
            profile.model_id = b["model_id"].get<std::string>();
            profile.temperature = b["temperature"].get<double>();
            profile.top_p = b["top_p"].get<double>();
            profile.top_k = b["top_k"].get<int>();
            profile.max_in_flight = b["max_in_flight"].get<int>();
            profile.retry_budget = b["retry_budget"].get<int>();
            profile.validate();
            gateway_ = std::make_shared<llm::Gateway>(std::make_shared<llm::HttpBackend>(),
                                                      profile);
        } else {
            llm::MockOptions opts;
            opts.behavior = llm::MockBehavior::scripted_json;
            gateway_ = llm::make_mock_gateway(b["mock_seed"].get<uint64_t>(), std::move(opts));
        }
    }
    return *gateway_;
}

json Pipeline::run_stage(const std::string& stage) {
    auto it = std::find(stages_.begin(), stages_.end(), stage);
    if (it == stages_.end()) throw StageFailure(stage, "unknown stage");
    for (auto pred = stages_.begin(); pred != it; ++pred)
        if (!stage_completed(*pred))
            throw StageFailure(stage, "predecessor " + *pred + " not complete");

    json summary;
    try {
        if (stage == "ingest") summary = run_ingest();
        else if (stage == "decontam") summary = run_decontam(false);
        else if (stage == "annotate") summary = run_annotate();
        else if (stage == "probe") summary = run_probe();
        else if (stage == "synth") summary = run_synth();
        else if (stage == "refine") summary = run_refine();
        else if (stage == "decontam_post") summary = run_decontam(true);
        else if (stage == "analyze") summary = run_analyze();
        else if (stage == "blend") summary = run_blend();
    } catch (const StageFailure&) {
        throw;
    } catch (const std::exception& e) {
        throw StageFailure(stage, e.what());
    }

    json marker;
    marker["summary"] = summary;
    marker["config_hash"] = hex64(util::fnv1a64(stage, util::fnv1a64(config_.dump())));
    manifest_["completed"][stage] = marker;
    save_manifest();
    return summary;
}

json Pipeline::run_all() {
    json out = json::object();
    for (const auto& stage : stages_) {
        if (stage_completed(stage)) {
            out[stage] = {{"skipped", true}};
            continue;
        }
        out[stage] = run_stage(stage);
    }
    return out;
}

json Pipeline::dry_run_plan() const {
    json plan;
    plan["run_id"] = run_id_;
    plan["run_dir"] = run_dir_.string();
    json stage_list = json::array();
    for (const auto& stage : stages_)
        stage_list.push_back({{"stage", stage}, {"completed", stage_completed(stage)}});
    plan["stages"] = stage_list;
    plan["config"] = config_;
    return plan;
}

std::vector<std::string> Pipeline::benchmark_docs() const {
    std::string root = config_["benchmarks"].get<std::string>();
    if (root.empty()) return {};
    std::vector<std::filesystem::path> files;
    if (std::filesystem::is_directory(root)) {
        for (const auto& entry : std::filesystem::directory_iterator(root))
            if (entry.is_regular_file()) files.push_back(entry.path());
        std::sort(files.begin(), files.end());
    } else if (std::filesystem::exists(root)) {
        files.push_back(root);
    } else {
        throw std::runtime_error("benchmarks path not found: " + root);
    }
    std::vector<std::string> docs;
    for (const auto& file : files) {
        std::ifstream in(file);
        std::string line;
        while (std::getline(in, line))
            if (!util::trim(line).empty()) docs.push_back(line);
    }
    return docs;
}

json Pipeline::run_ingest() {
    std::string path = config_["seeds"].get<std::string>();
    if (path.empty()) throw std::runtime_error("config.seeds is required");
    ingest::SourceKind kind;
    ingest::source_kind_from_name(config_["seed_source"].get<std::string>(), kind);

    JsonlWriter out(run_dir_ / "seeds.jsonl");
    JsonlWriter rejects(run_dir_ / "ingest_rejects.jsonl");
    auto stats = ingest::read_seeds(path, kind,
                                    [&](ingest::SeedRecord&& rec) { out.write(rec.to_json()); },
                                    &rejects);
    json summary;
    summary["lines"] = stats.lines;
    summary["records"] = stats.records;
    summary["rejects"] = stats.rejects;
    return summary;
}

json Pipeline::run_decontam(bool post) {
    auto input_path = run_dir_ / (post ? "refined.jsonl" : "seeds.jsonl");
    auto output_path = run_dir_ / (post ? "final_qa.jsonl" : "clean_seeds.jsonl");
    auto report_path = run_dir_ / (post ? "contamination_post.jsonl" : "contamination.jsonl");

    std::vector<std::pair<std::string, std::string>> records;  // id, checked text
    std::vector<std::pair<std::string, std::string>> lines;    // id, raw line
    for_each_jsonl(input_path, [&](size_t, const json& j, const std::string& raw) {
        if (j.is_discarded()) return;
        if (post) {
            auto qa = synth::SynthesizedQA::from_json(j);
            if (!qa) return;
            records.emplace_back(qa->qa_id, qa->question());
            lines.emplace_back(qa->qa_id, raw);
        } else {
            auto rec = ingest::SeedRecord::from_json(j);
            if (!rec) return;
            records.emplace_back(rec->seed_id, rec->content_text());
            lines.emplace_back(rec->seed_id, raw);
        }
    });

    auto docs = benchmark_docs();
    json summary;
    std::ofstream out(output_path);
    if (docs.empty()) {
        // No benchmark corpus configured: everything passes, recorded as such.
        for (const auto& [id, raw] : lines) out << raw << '\n';
        summary["input"] = records.size();
        summary["clean"] = records.size();
        summary["flagged"] = 0;
        summary["benchmark_docs"] = 0;
        return summary;
    }

    const json& dc = config_["decontam"];
    auto index = decontam::build_ngram_index(docs, dc["ngram_size"].get<int>());

    std::optional<decontam::EmbedConfig> embed;
    if (dc["embed_enabled"].get<bool>()) {
        decontam::EmbedConfig cfg;
        cfg.embedder = decontam::make_hash_embedder(
            static_cast<size_t>(dc["embed_dim"].get<int>()));
        for (const auto& doc : docs) cfg.benchmark_vectors.push_back(cfg.embedder(doc));
        cfg.threshold = dc["embed_threshold"].get<double>();
        embed = std::move(cfg);
    }

    std::unordered_set<std::string> clean_ids;
    JsonlWriter report(report_path);
    auto stats = decontam::filter_corpus(records, index,
                                         [&](const std::string& id) { clean_ids.insert(id); },
                                         &report, embed ? &*embed : nullptr);
    for (const auto& [id, raw] : lines)
        if (clean_ids.count(id)) out << raw << '\n';

    summary["input"] = stats.input;
    summary["clean"] = stats.clean;
    summary["flagged"] = stats.flagged;
    summary["benchmark_docs"] = docs.size();
    return summary;
}

json Pipeline::run_annotate() {
    auto& gw = gateway();
    JsonlWriter out(run_dir_ / "annotated.jsonl");
    size_t records = 0, valid_discipline = 0, tiered = 0;
    for_each_jsonl(run_dir_ / "clean_seeds.jsonl", [&](size_t, const json& j, const std::string&) {
        if (j.is_discarded()) return;
        auto rec = ingest::SeedRecord::from_json(j);
        if (!rec) return;
        auto discipline = annotate::classify_discipline(*rec, gw);
        auto difficulty = annotate::score_difficulty(*rec, gw);
        ++records;
        if (discipline.valid()) ++valid_discipline;
        if (difficulty.h_level > 0) ++tiered;
        json line;
        line["seed"] = rec->to_json();
        line["discipline"] = discipline.to_json();
        line["difficulty"] = difficulty.to_json();
        out.write(line);
    });
    json summary;
    summary["records"] = records;
    summary["valid_discipline"] = valid_discipline;
    summary["tiered"] = tiered;
    return summary;
}

namespace {

struct AnnotatedRow {
    ingest::SeedRecord seed;
    std::string discipline;
    int h_level = 0;
};

std::vector<AnnotatedRow> load_annotated(const std::filesystem::path& path) {
    std::vector<AnnotatedRow> rows;
    for_each_jsonl(path, [&](size_t, const json& j, const std::string&) {
        if (j.is_discarded() || !j.is_object() || !j.contains("seed")) return;
        auto rec = ingest::SeedRecord::from_json(j["seed"]);
        if (!rec) return;
        AnnotatedRow row;
        row.seed = std::move(*rec);
        auto disc = annotate::DisciplineLabel::from_json(j.value("discipline", json::object()));
        row.discipline = disc.primary_discipline;
        auto diff = annotate::DifficultyLabel::from_json(j.value("difficulty", json::object()));
        row.h_level = diff.h_level;
        rows.push_back(std::move(row));
    });
    return rows;
}

}  // namespace

json Pipeline::run_probe() {
    const json& pc = config_["probe"];
    auto rows = load_annotated(run_dir_ / "annotated.jsonl");
    std::vector<probe::ProbeItem> items;
    for (const auto& row : rows) {
        if (row.seed.source_kind != ingest::SourceKind::qa_pair) continue;
        if (row.seed.question.empty() || row.seed.answer.empty()) continue;
        probe::ProbeItem item;
        item.id = row.seed.seed_id;
        item.question = row.seed.question;
        item.answer = row.seed.answer;
        item.discipline = row.discipline;
        item.h_level = row.h_level;
        items.push_back(std::move(item));
    }

    probe::ProbeConfig cfg;
    cfg.trials = pc["trials"].get<int>();
    cfg.shots = pc["shots"].get<int>();
    json summary;
    size_t need = static_cast<size_t>(cfg.shots) + static_cast<size_t>(cfg.trials) + 1;
    if (items.size() < need) {
        summary["skipped"] = "insufficient items: " + std::to_string(items.size());
        return summary;
    }
    cfg.exemplar_pool = items;
    auto results = probe::run_probe(items, cfg, gateway(),
                                    pc["checkpoint_tag"].get<std::string>(),
                                    config_["rng_seed"].get<uint64_t>());
    probe::write_results_jsonl(results, run_dir_ / "probe_results.jsonl");
    probe::write_results_csv(results, run_dir_ / "probe_results.csv");
    summary["items"] = items.size();
    summary["cells"] = results.size();
    return summary;
}

json Pipeline::run_synth() {
    const json& sc = config_["synth"];
    auto rows = load_annotated(run_dir_ / "annotated.jsonl");
    if (rows.empty()) throw std::runtime_error("no annotated seeds");
    std::sort(rows.begin(), rows.end(),
              [](const AnnotatedRow& a, const AnnotatedRow& b) {
                  return a.seed.seed_id < b.seed.seed_id;
              });

    std::map<std::string, ingest::SeedRecord> seed_map;
    std::vector<synth::AnnotatedSeed> pool;
    for (const auto& row : rows) {
        seed_map[row.seed.seed_id] = row.seed;
        pool.push_back({row.seed, row.discipline, row.h_level});
    }

    synth::QuestionType qtype;
    synth::question_type_from_name(sc["question_type"].get<std::string>(), qtype);
    int n = sc["n"].get<int>();
    size_t jobs_per_path = static_cast<size_t>(sc["jobs_per_path"].get<int>());
    uint64_t rng_seed = config_["rng_seed"].get<uint64_t>();

    std::vector<synth::SynthesisJob> jobs;
    for (const auto& path_value : sc["paths"]) {
        synth::Path path;
        synth::path_from_name(path_value.get<std::string>(), path);
        synth::SamplerWeights weights = synth::SamplerWeights::defaults_for(path);
        std::string weights_file = sc["weights_file"].get<std::string>();
        if (!weights_file.empty()) {
            json w = json::parse(read_file(weights_file), nullptr, false);
            if (!w.is_object()) throw std::runtime_error("unparsable weights file: " + weights_file);
            if (w.contains("discipline_multipliers"))
                for (auto& [k, v] : w["discipline_multipliers"].items())
                    weights.discipline_multipliers[k] = v.get<double>();
            if (w.contains("difficulty_multipliers"))
                for (auto& [k, v] : w["difficulty_multipliers"].items())
                    weights.difficulty_multipliers[std::stoi(k)] = v.get<double>();
        }
        std::vector<size_t> chosen;
        if (jobs_per_path > 0 && jobs_per_path < pool.size()) {
            chosen = synth::sample_seeds_weighted(
                pool, weights, jobs_per_path,
                util::fnv1a64(synth::path_name(path), rng_seed), /*with_replacement=*/false);
            std::sort(chosen.begin(), chosen.end());
        } else {
            chosen.resize(pool.size());
            for (size_t i = 0; i < pool.size(); ++i) chosen[i] = i;
        }
        static const synth::Role kRoleCycle[3] = {synth::Role::high_school, synth::Role::college,
                                                  synth::Role::graduate};
        std::optional<synth::Role> fixed_role;
        if (const std::string role = sc["role"].get<std::string>(); !role.empty()) {
            synth::Role r;
            synth::role_from_name(role, r);
            fixed_role = r;
        }
        for (size_t k = 0; k < chosen.size(); ++k) {
            synth::SynthesisJob job;
            job.seed_ref = pool[chosen[k]].seed.seed_id;
            job.path = path;
            job.role = path == synth::Path::high_difficulty ? synth::Role::graduate
                       : fixed_role                         ? *fixed_role
                                                            : kRoleCycle[k % 3];
            job.question_type = qtype;
            job.n = n;
            jobs.push_back(std::move(job));
        }
    }

    synth::SynthesisStats stats;
    auto items = synth::run_synthesis(jobs, seed_map, gateway(), &stats);
    JsonlWriter out(run_dir_ / "synthesized.jsonl");
    for (const auto& item : items) out.write(item.to_json());

    json summary;
    summary["jobs"] = stats.jobs;
    summary["failed_jobs"] = stats.failed_jobs;
    summary["accepted"] = stats.accepted;
    summary["rejected"] = stats.rejected;
    summary["duplicates_dropped"] = stats.duplicates_dropped;
    return summary;
}

json Pipeline::run_refine() {
    std::vector<synth::SynthesizedQA> items;
    for_each_jsonl(run_dir_ / "synthesized.jsonl", [&](size_t, const json& j, const std::string&) {
        if (j.is_discarded()) return;
        if (auto qa = synth::SynthesizedQA::from_json(j)) items.push_back(std::move(*qa));
    });

    auto outcomes = refine::refine_batch(items, gateway());
    JsonlWriter audit(run_dir_ / "refine_audit.jsonl");
    auto applied = refine::apply_refinements(items, outcomes, config_["refine"]["strict"].get<bool>(),
                                             &audit);
    JsonlWriter out(run_dir_ / "refined.jsonl");
    for (const auto& item : applied.kept) out.write(item.to_json());

    json summary;
    summary["input"] = items.size();
    summary["kept"] = applied.kept.size();
    summary["dropped"] = applied.dropped.size();
    summary["deferred"] = applied.deferred;
    if (!outcomes.empty()) {
        try {
            summary["inconsistency_rate"] = refine::inconsistency_rate(outcomes);
        } catch (const std::invalid_argument&) {
            summary["inconsistency_rate"] = nullptr;
        }
    }
    return summary;
}

json Pipeline::run_analyze() {
    auto& gw = gateway();
    std::vector<analyze::LabeledItem> labeled;
    JsonlWriter out(run_dir_ / "labeled_qa.jsonl");
    for_each_jsonl(run_dir_ / "final_qa.jsonl", [&](size_t, const json& j, const std::string&) {
        if (j.is_discarded()) return;
        auto qa = synth::SynthesizedQA::from_json(j);
        if (!qa) return;
        auto discipline = annotate::classify_discipline(qa->qa_id, qa->question(), gw);
        auto difficulty = annotate::score_difficulty(qa->qa_id, qa->question(), gw);
        qa->discipline = discipline.primary_discipline;
        qa->h_level = difficulty.h_level;
        out.write(qa->to_json());
        labeled.push_back({qa->qa_id, discipline.primary_discipline, difficulty.h_level});
    });
    if (labeled.empty()) throw std::runtime_error("no items to analyze");

    auto report = analyze::distribution(labeled, "final");
    auto report_dir = run_dir_ / "reports";
    analyze::emit_report(report, analyze::ReportFormat::csv, report_dir);
    analyze::emit_report(report, analyze::ReportFormat::json, report_dir);
    analyze::emit_report(report, analyze::ReportFormat::markdown, report_dir);

    json summary;
    summary["sample_size"] = report.sample_size;
    summary["h4h5_share"] = report.h4h5_share;
    summary["disciplines"] = report.by_discipline.size();
    return summary;
}

json Pipeline::run_blend() {
    const json& bc = config_["blend"];
    std::string corpus_path = config_["text_corpus"].get<std::string>();
    if (corpus_path.empty()) throw std::runtime_error("config.text_corpus is required");

    std::vector<blend::QualityScoredDoc> docs;
    for_each_jsonl(corpus_path, [&](size_t lineno, const json& j, const std::string&) {
        if (j.is_discarded() || !j.is_object()) return;
        blend::QualityScoredDoc doc;
        doc.doc_id = j.value("id", j.value("doc_id", "doc-" + std::to_string(lineno)));
        doc.body = j.value("text", j.value("body", ""));
        if (doc.body.empty()) return;
        doc.knowledge_density_score = j.value("knowledge_density_score", 0.0);
        doc.educational_score = j.value("educational_score", 0.0);
        doc.token_count = j.value("tokens", size_t{0});
        if (doc.token_count == 0)
            doc.token_count = static_cast<size_t>(ingest::count_tokens(doc.body));
        docs.push_back(std::move(doc));
    });
    if (docs.empty()) throw std::runtime_error("empty text corpus");

    double top_fraction = bc["top_fraction"].get<double>();
    std::vector<double> kd, edu;
    for (const auto& d : docs) {
        kd.push_back(d.knowledge_density_score);
        edu.push_back(d.educational_score);
    }
    blend::SelectionReport selection;
    auto selected = blend::select_dual_criteria(docs, blend::percentile_threshold(kd, top_fraction),
                                          blend::percentile_threshold(edu, top_fraction),
                                          &selection);
    if (selected.empty()) selected = docs;  // degenerate scores: keep everything

    std::vector<synth::SynthesizedQA> qa_items;
    for_each_jsonl(run_dir_ / "labeled_qa.jsonl", [&](size_t, const json& j, const std::string&) {
        if (j.is_discarded()) return;
        if (auto qa = synth::SynthesizedQA::from_json(j)) qa_items.push_back(std::move(*qa));
    });
    if (qa_items.empty()) throw std::runtime_error("no QA items to blend");

    blend::BlendManifest manifest;
    parse_ratio(bc["ratio"].get<std::string>(), manifest.ratio_text, manifest.ratio_qa);
    manifest.shard_size_tokens = bc["shard_tokens"].get<size_t>();
    manifest.rng_seed = config_["rng_seed"].get<uint64_t>();
    manifest.qa_format = bc["format"].get<std::string>() == "cot" ? blend::QaFormat::cot
                                                                  : blend::QaFormat::plain;
    manifest.drift_bound = bc["drift_bound"].get<double>();

    auto report = blend::blend_corpora(blend::make_text_records(selected),
                                       blend::make_qa_records(qa_items, manifest.qa_format),
                                       manifest, run_dir_ / "shards");
    write_file(run_dir_ / "blend_report.json", report.to_json().dump(2) + "\n");

    json summary = report.to_json();
    summary["selection"] = selection.to_json();
    return summary;
}

}  // namespace qaforge::pipeline
