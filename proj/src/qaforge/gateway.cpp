#include "qaforge/gateway.hpp"

#include <cmath>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "qaforge/prompts.hpp"
#include "qaforge/util.hpp"
#include "qaforge/vocab.hpp"

namespace qaforge::llm {

using nlohmann::json;

void BackendProfile::validate() const {
    if (temperature < 0.0 || temperature > 2.0)
        throw std::invalid_argument("temperature must be in [0, 2]");
    if (top_p <= 0.0 || top_p > 1.0) throw std::invalid_argument("top_p must be in (0, 1]");
    if (max_in_flight < 1) throw std::invalid_argument("max_in_flight must be >= 1");
    if (retry_budget < 0) throw std::invalid_argument("retry_budget must be >= 0");
}

// ---------------------------------------------------------------------------
// HTTP backend

std::string HttpBackend::generate(const PromptRequest& request, const BackendProfile& profile) {
    // Split endpoint_url into scheme://host[:port] and path.
    const std::string& url = profile.endpoint_url;
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw BackendFailure("bad endpoint url: " + url, false);
    auto path_start = url.find('/', scheme_end + 3);
    std::string base = path_start == std::string::npos ? url : url.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/v1/chat/completions"
                                                       : url.substr(path_start);

    json body;
    body["model"] = profile.model_id;
    json messages = json::array();
    if (!request.system_text.empty())
        messages.push_back({{"role", "system"}, {"content", request.system_text}});
    messages.push_back({{"role", "user"}, {"content", request.user_text}});
    body["messages"] = messages;
    // Greedy mode is a temperature-0 request.
    body["temperature"] = request.decode_mode == DecodeMode::greedy ? 0.0 : profile.temperature;
    body["top_p"] = profile.top_p;
    if (profile.top_k >= 0) body["top_k"] = profile.top_k;

    httplib::Client client(base);
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(profile.timeout));
    client.set_connection_timeout(
        std::chrono::duration_cast<std::chrono::seconds>(profile.timeout));

    auto res = client.Post(path, body.dump(), "application/json");
    if (!res) throw BackendFailure("backend unreachable: " + base, true);
    if (res->status >= 500 || res->status == 429)
        throw BackendFailure("backend status " + std::to_string(res->status), true);
    if (res->status != 200)
        throw BackendFailure("backend status " + std::to_string(res->status), false);

    json parsed = json::parse(res->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("choices") || parsed["choices"].empty())
        throw BackendFailure("malformed completion response", false);
    const auto& choice = parsed["choices"][0];
    if (choice.contains("message")) return choice["message"].value("content", "");
    return choice.value("text", "");
}

// ---------------------------------------------------------------------------
// Mock backend

namespace {

// Deterministic per-request hash and derived uniform real.
uint64_t request_hash(uint64_t seed, std::string_view text, std::string_view salt = "") {
    uint64_t h = util::fnv1a64(text, seed * 0x9e3779b97f4a7c15ull + 0xcbf29ce484222325ull);
    if (!salt.empty()) h = util::fnv1a64(salt, h);
    return h;
}

double hash_real(uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

// Extract text following the last occurrence of `key` (to end of prompt).
std::string after_last(const std::string& text, std::string_view key) {
    auto pos = text.rfind(key);
    if (pos == std::string::npos) return "";
    return util::trim(text.substr(pos + key.size()));
}

// Extract the first line following `key`.
std::string line_after(const std::string& text, std::string_view key) {
    auto pos = text.find(key);
    if (pos == std::string::npos) return "";
    auto start = pos + key.size();
    auto end = text.find('\n', start);
    return util::trim(text.substr(start, end == std::string::npos ? std::string::npos
                                                                  : end - start));
}

int parse_generate_count(const std::string& prompt) {
    auto num = line_after(prompt, "Generate ");
    int n = 0;
    for (char c : num) {
        if (c < '0' || c > '9') break;
        n = n * 10 + (c - '0');
    }
    return n > 0 ? n : 10;
}

const char* kTierNames[5] = {"basic", "standard", "improvement", "challenge", "extreme"};

// Pass-rate bands per tier (percent, [lo, hi)).
void tier_band(int tier_idx, int& lo, int& hi) {
    switch (tier_idx) {
        case 0: lo = 80; hi = 100; break;
        case 1: lo = 50; hi = 80; break;
        case 2: lo = 30; hi = 50; break;
        case 3: lo = 10; hi = 30; break;
        default: lo = 0; hi = 10; break;
    }
}

int pick_weighted(uint64_t h, const double (&w)[5]) {
    double total = 0;
    for (double x : w) total += x;
    double r = hash_real(h) * total;
    double acc = 0;
    for (int i = 0; i < 5; ++i) {
        acc += w[i];
        if (r < acc) return i;
    }
    return 4;
}

}  // namespace

MockBackend::MockBackend(uint64_t seed, MockOptions opts)
    : seed_(seed), opts_(std::move(opts)), failures_left_(opts_.fail_first_n) {}

std::string MockBackend::generate(const PromptRequest& request, const BackendProfile&) {
    calls_.fetch_add(1);
    int now = in_flight_.fetch_add(1) + 1;
    int peak = peak_in_flight_.load();
    while (now > peak && !peak_in_flight_.compare_exchange_weak(peak, now)) {
    }
    struct Guard {
        std::atomic<int>& c;
        ~Guard() { c.fetch_sub(1); }
    } guard{in_flight_};

    if (failures_left_.load() > 0 && failures_left_.fetch_sub(1) > 0)
        throw BackendFailure("scripted transient failure", true);

    if (opts_.handler) return opts_.handler(request);
    return dispatch(request);
}

std::string MockBackend::dispatch(const PromptRequest& request) {
    const std::string& text = request.user_text;
    if (opts_.behavior == MockBehavior::echo) return text;

    if (util::contains(text, prompts::kDisciplineMarker)) return mock_classification(text);
    if (util::contains(text, prompts::kDifficultyMarker)) return mock_difficulty(text);
    if (util::contains(text, prompts::kSynthesisMarker)) return mock_synthesis(text);
    if (util::contains(text, prompts::kRefineMarker)) return mock_refinement(text);
    if (util::contains(text, prompts::kStageMarker)) return mock_stage_relabel(text);
    if (opts_.behavior == MockBehavior::scripted_grader || util::contains(text, "\nAnswer:"))
        return mock_probe_answer(text);
    return text;
}

std::string MockBackend::mock_classification(const std::string& prompt) {
    std::string seed_data = after_last(prompt, "Input: ");
    uint64_t h = request_hash(seed_, seed_data, "classify");
    const auto& d = vocab::disciplines();
    json out;
    out["primary_discipline"] = d[h % d.size()];
    out["secondary_discipline"] = "General";
    out["confidence"] = 0.62 + static_cast<double>((h >> 8) % 38) / 100.0;
    out["rejection_reason"] = nullptr;
    return out.dump();
}

std::string MockBackend::mock_difficulty(const std::string& prompt) {
    std::string seed_data = after_last(prompt, "Input: ");
    uint64_t h = request_hash(seed_, seed_data, "difficulty");

    int tier_idx = -1;
    // Synthesized items carry an explicit cue; seed material is hashed.
    for (int i = 0; i < 5; ++i) {
        if (util::contains(seed_data, std::string("intended difficulty: ") + kTierNames[i])) {
            tier_idx = i;
            break;
        }
    }
    if (tier_idx < 0) {
        static const double uniform[5] = {0.2, 0.2, 0.2, 0.2, 0.2};
        tier_idx = pick_weighted(h, uniform);
    }

    int lo, hi;
    tier_band(tier_idx, lo, hi);
    int pass_rate = lo + static_cast<int>((h >> 13) % static_cast<uint64_t>(hi - lo));

    json out;
    out["difficulty_tier"] = kTierNames[tier_idx];
    out["rationale"] = json::array({
        "Involves " + std::to_string(1 + (h >> 23) % 3) + " core knowledge points",
        "Cognitive level: application",
        "Estimated pass rate: approximately " + std::to_string(pass_rate) + "%",
    });
    return out.dump();
}

std::string MockBackend::mock_synthesis(const std::string& prompt) {
    const bool boosted = util::contains(prompt, prompts::kBoosterMarker);
    const bool mcq = util::contains(prompt, prompts::kMcqConstraintMarker);
    const int n = parse_generate_count(prompt);
    std::string seed_data = after_last(prompt, "Input: ");
    uint64_t base = request_hash(seed_, prompt, "synth");

    // Output difficulty correlates with the requested path: the booster prompt
    // yields a distribution skewed toward challenge/extreme.
    static const double boosted_w[5] = {0.04, 0.07, 0.14, 0.38, 0.37};
    static const double plain_w[5] = {0.32, 0.28, 0.20, 0.13, 0.07};

    auto topic = util::tokenize(seed_data);
    std::string topic_word = topic.empty() ? "the material" : topic[0];

    json arr = json::array();
    for (int i = 0; i < n; ++i) {
        uint64_t h = util::fnv1a64("#" + std::to_string(i), base);
        int tier_idx = pick_weighted(h, boosted ? boosted_w : plain_w);
        std::string question = "Compute the value derived from " + topic_word + " in scenario " +
                               std::to_string(h % 9973) + " (intended difficulty: " +
                               kTierNames[tier_idx] + ")?";
        json item;
        item["question"] = question;
        if (mcq) {
            json options = json::array();
            for (int k = 0; k < 4; ++k)
                options.push_back("Value " + std::to_string((h >> (4 * k)) % 997) + "-" +
                                  std::to_string(k));
            item["options"] = options;
            item["answer_index"] = static_cast<int>(h % 4);
        } else {
            item["solution"] = "Step 1: restate scenario " + std::to_string(h % 9973) +
                               ". Step 2: apply the identified relation. Step 3: evaluate.";
            item["answer"] = std::to_string(h % 4096);
        }
        arr.push_back(item);
    }
    return arr.dump();
}

std::string MockBackend::mock_refinement(const std::string& prompt) {
    std::string question = line_after(prompt, "Question: ");
    std::string proposed = line_after(prompt, "Proposed answer: ");
    uint64_t h = request_hash(seed_, question, "refine");

    json out;
    if (hash_real(h) < opts_.unsolvable_rate) {
        out["solvable"] = false;
        out["reason"] = (h >> 17) % 2 == 0 ? "missing critical information" : "erroneous conditions";
        out["solution"] = nullptr;
        out["final_answer"] = nullptr;
        return out.dump();
    }
    out["solvable"] = true;
    out["reason"] = nullptr;
    out["solution"] = "Recomputed stepwise from the stated conditions.";

    if (hash_real(util::fnv1a64("change", h)) < opts_.answer_change_rate) {
        // Pick a different option when the prompt lists options, otherwise
        // perturb the free-form answer.
        auto opt_pos = prompt.find("Options:\n");
        if (opt_pos != std::string::npos) {
            std::vector<std::string> opts;
            size_t pos = opt_pos + 9;
            while (pos < prompt.size()) {
                auto eol = prompt.find('\n', pos);
                std::string line = util::trim(prompt.substr(pos, eol - pos));
                if (line.size() < 3 || line[1] != '.') break;
                opts.push_back(line);
                if (eol == std::string::npos) break;
                pos = eol + 1;
            }
            if (!opts.empty()) {
                size_t idx = 0;
                for (size_t i = 0; i < opts.size(); ++i)
                    if (util::normalize_text(opts[i].substr(2)) == util::normalize_text(proposed))
                        idx = (i + 1) % opts.size();
                out["final_answer"] = util::trim(opts[idx].substr(2));
                return out.dump();
            }
        }
        out["final_answer"] = proposed + " (corrected)";
        return out.dump();
    }
    out["final_answer"] = proposed;
    return out.dump();
}

std::string MockBackend::mock_stage_relabel(const std::string& prompt) {
    std::string targeted = line_after(prompt, "Targeted stage: ");

    StageScript script;
    auto it = opts_.stage_scripts.find(targeted);
    if (it != opts_.stage_scripts.end()) {
        script = it->second;
    } else {
        script.match_accuracy = 1.0;
        script.distribution[targeted] = 1.0;
    }

    std::lock_guard<std::mutex> lock(stage_mutex_);
    auto& ctr = stage_counters_[targeted];
    uint64_t c = ctr.items++;

    // Bresenham-style quota assignment: over any batch the emitted aligned
    // fraction and stage counts track the scripted proportions within one item.
    bool aligned = static_cast<uint64_t>(std::floor((c + 1) * script.match_accuracy + 1e-9)) >
                   static_cast<uint64_t>(std::floor(c * script.match_accuracy + 1e-9));
    if (aligned) ctr.aligned++;

    std::string best_stage;
    double best_deficit = -1e18;
    for (const auto& [stage, share] : script.distribution) {
        double deficit = share * static_cast<double>(c + 1) -
                         static_cast<double>(ctr.stage_counts[stage]);
        if (deficit > best_deficit) {
            best_deficit = deficit;
            best_stage = stage;
        }
    }
    if (best_stage.empty()) best_stage = targeted;
    ctr.stage_counts[best_stage]++;

    json out;
    out["stage"] = best_stage;
    out["aligned"] = aligned;
    return out.dump();
}

std::string MockBackend::mock_probe_answer(const std::string& prompt) {
    // The probed item is the last "Question:" block, answer withheld.
    auto qpos = prompt.rfind("Question: ");
    if (qpos == std::string::npos) return "unknown";
    auto apos = prompt.find("\nAnswer:", qpos);
    std::string question = util::trim(
        prompt.substr(qpos + 10, apos == std::string::npos ? std::string::npos : apos - qpos - 10));

    auto it = opts_.grader_table.find(util::normalize_text(question));
    if (it == opts_.grader_table.end())
        return "no scripted answer " + std::to_string(request_hash(seed_, question) % 1000);

    if (it->second.h_level <= opts_.grader_max_level) return it->second.answer;

    // Deliberately wrong: rotate option letters, or mangle free-form answers.
    const std::string& gold = it->second.answer;
    if (gold.size() >= 1 && gold[0] >= 'A' && gold[0] <= 'D' &&
        (gold.size() == 1 || gold[1] == '.' || gold[1] == ' ')) {
        char wrong = static_cast<char>('A' + ((gold[0] - 'A') + 1) % 4);
        return std::string(1, wrong) + ". (distractor)";
    }
    return "not " + gold;
}

// ---------------------------------------------------------------------------
// Gateway

Gateway::Gateway(std::shared_ptr<Backend> backend, BackendProfile profile)
    : backend_(std::move(backend)), profile_(std::move(profile)) {
    profile_.validate();
}

void Gateway::set_transcript_path(const std::filesystem::path& path) {
    std::lock_guard<std::mutex> lock(transcript_mutex_);
    transcript_path_ = path;
}

void Gateway::log_transcript(const PromptRequest& request, const CompletionResult& result) {
    std::lock_guard<std::mutex> lock(transcript_mutex_);
    if (!transcript_path_) return;
    std::ofstream out(*transcript_path_, std::ios::app);
    json j;
    j["request_id"] = request.request_id;
    j["decode_mode"] = request.decode_mode == DecodeMode::greedy ? "greedy" : "sampled";
    j["user_text"] = request.user_text;
    j["ok"] = result.ok;
    if (result.ok) {
        j["text"] = result.response.text;
        j["attempt_count"] = result.response.attempt_count;
    } else {
        j["error"] = result.error;
    }
    out << j.dump() << '\n';
}

CompletionResponse Gateway::complete(const PromptRequest& request) {
    int attempts = 0;
    for (;;) {
        ++attempts;
        auto start = std::chrono::steady_clock::now();
        try {
            std::string text = backend_->generate(request, profile_);
            CompletionResponse resp;
            resp.request_id = request.request_id;
            resp.text = std::move(text);
            resp.backend_latency = std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - start);
            resp.attempt_count = attempts;
            log_transcript(request, CompletionResult{true, resp, ""});
            return resp;
        } catch (const BackendFailure& e) {
            if (!e.transient || attempts > profile_.retry_budget) {
                log_transcript(request, CompletionResult{false, {}, e.what()});
                throw GatewayError(std::string(e.what()) + " (after " + std::to_string(attempts) +
                                   " attempts)");
            }
            // Exponential backoff with deterministic jitter.
            uint64_t jh = util::fnv1a64(request.request_id + "#" + std::to_string(attempts));
            double jitter = 0.5 + hash_real(jh);
            auto delay = std::chrono::milliseconds(static_cast<int64_t>(
                static_cast<double>(profile_.retry_backoff.count()) * (1 << (attempts - 1)) *
                jitter));
            std::this_thread::sleep_for(delay);
        }
    }
}

std::vector<CompletionResult> Gateway::complete_batch(const std::vector<PromptRequest>& requests) {
    std::vector<CompletionResult> results(requests.size());
    if (requests.empty()) return results;

    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= requests.size()) return;
            try {
                results[i] = CompletionResult{true, complete(requests[i]), ""};
            } catch (const std::exception& e) {
                results[i] = CompletionResult{false, {}, e.what()};
            }
        }
    };

    size_t n_workers = std::min<size_t>(static_cast<size_t>(profile_.max_in_flight),
                                        requests.size());
    std::vector<std::thread> threads;
    threads.reserve(n_workers);
    for (size_t i = 0; i < n_workers; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    return results;
}

std::shared_ptr<Gateway> make_mock_gateway(uint64_t seed, MockOptions opts) {
    BackendProfile profile;
    profile.endpoint_url = "mock://local";
    profile.model_id = "mock";
    profile.retry_backoff = std::chrono::milliseconds(1);
    return std::make_shared<Gateway>(std::make_shared<MockBackend>(seed, std::move(opts)),
                                     profile);
}

}  // namespace qaforge::llm
