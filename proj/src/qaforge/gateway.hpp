#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace qaforge::llm {

enum class DecodeMode { sampled, greedy };

struct BackendProfile {
    std::string endpoint_url;
    std::string model_id;
    double temperature = 0.6;
    double top_p = 0.95;
    int top_k = -1;  // -1 disables
    int max_in_flight = 8;
    std::chrono::milliseconds timeout{30000};
    int retry_budget = 3;
    std::chrono::milliseconds retry_backoff{200};

    void validate() const;  // throws std::invalid_argument on bad ranges
};

struct PromptRequest {
    std::string request_id;
    std::string system_text;
    std::string user_text;
    DecodeMode decode_mode = DecodeMode::sampled;
};

struct CompletionResponse {
    std::string request_id;
    std::string text;
    std::chrono::milliseconds backend_latency{0};
    int attempt_count = 1;
};

// Per-item outcome for batch calls; batches never abort on one failure.
struct CompletionResult {
    bool ok = false;
    CompletionResponse response;
    std::string error;
};

class BackendFailure : public std::runtime_error {
public:
    BackendFailure(const std::string& msg, bool transient)
        : std::runtime_error(msg), transient(transient) {}
    bool transient;
};

class GatewayError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string generate(const PromptRequest& request, const BackendProfile& profile) = 0;
};

// Chat-completion style HTTP JSON backend: role-tagged messages in, text out.
class HttpBackend : public Backend {
public:
    std::string generate(const PromptRequest& request, const BackendProfile& profile) override;
};

enum class MockBehavior { echo, scripted_json, scripted_grader };

struct GraderEntry {
    std::string answer;  // gold answer text (or option letter)
    int h_level = 1;
};

// One targeted-stage row for the scripted stage relabeler: a match-accuracy
// fraction plus an actual-stage distribution over vocab::stages().
struct StageScript {
    double match_accuracy = 1.0;
    std::map<std::string, double> distribution;  // stage -> share
};

struct MockOptions {
    MockBehavior behavior = MockBehavior::echo;

    // scripted_grader: answer correctly iff the probed item's h_level <= this.
    int grader_max_level = 2;
    // question text (normalized) -> gold answer + difficulty.
    std::unordered_map<std::string, GraderEntry> grader_table;

    // scripted_json refinement behavior.
    double unsolvable_rate = 0.0;
    double answer_change_rate = 0.0;

    // Fail this many generate() calls with a transient error before succeeding.
    int fail_first_n = 0;

    // Scripted stage relabeler rows keyed by targeted stage.
    std::map<std::string, StageScript> stage_scripts;

    // Optional full override; when set it wins over everything else.
    std::function<std::string(const PromptRequest&)> handler;
};

// Deterministic offline backend. Responses are a pure function of (seed,
// request text), so any thread interleaving yields the same transcript.
// The stage relabeler is the one stateful part: it assigns labels by
// quota so scripted row proportions are recovered exactly over a batch.
class MockBackend : public Backend {
public:
    explicit MockBackend(uint64_t seed, MockOptions opts = {});

    std::string generate(const PromptRequest& request, const BackendProfile& profile) override;

    int peak_in_flight() const { return peak_in_flight_.load(); }
    int call_count() const { return calls_.load(); }

private:
    std::string dispatch(const PromptRequest& request);
    std::string mock_classification(const std::string& prompt);
    std::string mock_difficulty(const std::string& prompt);
    std::string mock_synthesis(const std::string& prompt);
    std::string mock_refinement(const std::string& prompt);
    std::string mock_stage_relabel(const std::string& prompt);
    std::string mock_probe_answer(const std::string& prompt);

    uint64_t seed_;
    MockOptions opts_;
    std::atomic<int> in_flight_{0};
    std::atomic<int> peak_in_flight_{0};
    std::atomic<int> calls_{0};
    std::atomic<int> failures_left_;

    struct StageCounters {
        uint64_t items = 0;
        uint64_t aligned = 0;
        std::map<std::string, uint64_t> stage_counts;
    };
    std::mutex stage_mutex_;
    std::map<std::string, StageCounters> stage_counters_;
};

// Shareable client: retry with exponential backoff on transient failures,
// bounded in-flight batches, order-preserving results.
class Gateway {
public:
    Gateway(std::shared_ptr<Backend> backend, BackendProfile profile);

    // Retries up to retry_budget on transient failure; throws GatewayError when
    // the budget is exhausted or the failure is permanent.
    CompletionResponse complete(const PromptRequest& request);

    // Results in input order; per-item errors recorded, never thrown.
    std::vector<CompletionResult> complete_batch(const std::vector<PromptRequest>& requests);

    const BackendProfile& profile() const { return profile_; }
    Backend& backend() { return *backend_; }

    // Optional line-delimited JSON request/response audit log.
    void set_transcript_path(const std::filesystem::path& path);

private:
    void log_transcript(const PromptRequest& request, const CompletionResult& result);

    std::shared_ptr<Backend> backend_;
    BackendProfile profile_;
    std::mutex transcript_mutex_;
    std::optional<std::filesystem::path> transcript_path_;
};

// Builds a gateway around a deterministic mock (profile fields are dummies).
std::shared_ptr<Gateway> make_mock_gateway(uint64_t seed, MockOptions opts = {});

}  // namespace qaforge::llm
