#include <doctest.h>

#include <atomic>
#include <map>
#include <set>

#include "qaforge/annotate.hpp"
#include "qaforge/gateway.hpp"
#include "qaforge/rng.hpp"

using namespace qaforge;

namespace {

std::shared_ptr<llm::Gateway> handler_gateway(
    std::function<std::string(const llm::PromptRequest&)> handler) {
    llm::MockOptions opts;
    opts.handler = std::move(handler);
    return llm::make_mock_gateway(1, opts);
}

// Independent restatement of the pass-rate bands (percent thresholds).
vocab::Tier oracle_tier(double p) {
    double pct = p * 100.0;
    if (pct >= 80) return vocab::Tier::basic;
    if (pct >= 50) return vocab::Tier::standard;
    if (pct >= 30) return vocab::Tier::improvement;
    if (pct >= 10) return vocab::Tier::challenge;
    return vocab::Tier::extreme;
}

}  // namespace

TEST_CASE("tier_from_pass_rate documented examples and boundaries") {
    CHECK(annotate::tier_from_pass_rate(0.85) == vocab::Tier::basic);
    CHECK(vocab::h_level(annotate::tier_from_pass_rate(0.85)) == 1);
    CHECK(annotate::tier_from_pass_rate(0.05) == vocab::Tier::extreme);
    CHECK(vocab::h_level(annotate::tier_from_pass_rate(0.05)) == 5);
    // left-closed bands
    CHECK(annotate::tier_from_pass_rate(0.30) == vocab::Tier::improvement);
    CHECK(annotate::tier_from_pass_rate(0.10) == vocab::Tier::challenge);
    CHECK(annotate::tier_from_pass_rate(0.50) == vocab::Tier::standard);
    CHECK(annotate::tier_from_pass_rate(0.80) == vocab::Tier::basic);
    CHECK(annotate::tier_from_pass_rate(0.0) == vocab::Tier::extreme);
    CHECK(annotate::tier_from_pass_rate(1.0) == vocab::Tier::basic);
    CHECK_THROWS_AS(annotate::tier_from_pass_rate(-0.01), std::domain_error);
    CHECK_THROWS_AS(annotate::tier_from_pass_rate(1.01), std::domain_error);
}

TEST_CASE("tier_from_pass_rate equals the band oracle on 1e5 random rates") {
    Rng rng(2024);
    for (int i = 0; i < 100000; ++i) {
        double p = rng.real();
        CHECK(annotate::tier_from_pass_rate(p) == oracle_tier(p));
    }
}

TEST_CASE("classify_discipline passes a valid scripted label through") {
    auto gw = handler_gateway([](const llm::PromptRequest&) {
        return R"({"primary_discipline":"Mathematics","secondary_discipline":"General","confidence":0.95,"rejection_reason":null})";
    });
    auto label = annotate::classify_discipline("r1", "What is 2+2?", *gw);
    CHECK(label.valid());
    CHECK(label.primary_discipline == "Mathematics");
    CHECK(label.confidence == doctest::Approx(0.95));
    CHECK(label.retries == 0);
}

TEST_CASE("off-vocabulary discipline degrades to Invalid with a reason") {
    auto gw = handler_gateway([](const llm::PromptRequest&) {
        return R"({"primary_discipline":"Astrology","confidence":0.9})";
    });
    auto label = annotate::classify_discipline("r1", "text", *gw);
    CHECK(!label.valid());
    REQUIRE(label.rejection_reason.has_value());
    CHECK(label.rejection_reason->find("unknown discipline") == 0);
}

TEST_CASE("malformed JSON once then valid yields a label with one retry") {
    std::atomic<int> calls{0};
    auto gw = handler_gateway([&](const llm::PromptRequest&) -> std::string {
        if (calls.fetch_add(1) == 0) return "not json {{{";
        return R"({"primary_discipline":"Physics","confidence":0.8})";
    });
    auto label = annotate::classify_discipline("r1", "text", *gw);
    CHECK(label.valid());
    CHECK(label.primary_discipline == "Physics");
    CHECK(label.retries == 1);
}

TEST_CASE("confidence below 0.6 maps a concrete discipline to Other") {
    auto gw = handler_gateway([](const llm::PromptRequest&) {
        return R"({"primary_discipline":"Physics","confidence":0.4})";
    });
    auto label = annotate::classify_discipline("r1", "text", *gw);
    CHECK(label.primary_discipline == "Other");
}

TEST_CASE("score_difficulty maps tiers to h-levels") {
    auto extreme = handler_gateway([](const llm::PromptRequest&) {
        return R"({"difficulty_tier":"extreme","rationale":["very hard"]})";
    });
    auto label = annotate::score_difficulty("r1", "text", *extreme);
    CHECK(label.tier == vocab::Tier::extreme);
    CHECK(label.h_level == 5);

    auto other = handler_gateway([](const llm::PromptRequest&) {
        return R"({"difficulty_tier":"other","rationale":["not a question"]})";
    });
    label = annotate::score_difficulty("r1", "text", *other);
    CHECK(label.tier == vocab::Tier::other);
    CHECK(label.h_level == 0);
}

TEST_CASE("score_difficulty band check accepts challenge at 20% pass rate") {
    auto gw = handler_gateway([](const llm::PromptRequest&) {
        return R"({"difficulty_tier":"challenge","rationale":["Estimated pass rate: approximately 20%"]})";
    });
    auto label = annotate::score_difficulty("r1", "text", *gw);
    CHECK(label.tier == vocab::Tier::challenge);
    CHECK(label.h_level == 4);
    REQUIRE(label.pass_rate_estimate.has_value());
    CHECK(*label.pass_rate_estimate == doctest::Approx(0.20));
    CHECK(label.band_consistent);
}

TEST_CASE("score_difficulty flags a pass rate outside the reported band") {
    auto gw = handler_gateway([](const llm::PromptRequest&) {
        return R"({"difficulty_tier":"basic","rationale":["Estimated pass rate: approximately 20%"]})";
    });
    auto label = annotate::score_difficulty("r1", "text", *gw);
    CHECK(!label.band_consistent);
}

TEST_CASE("stratified_sample honors quotas, reports shortfall, is deterministic") {
    // 62 strata x 10 items each
    std::vector<std::string> strata;
    for (const auto& d : vocab::disciplines()) strata.push_back(d);
    size_t per = 10;
    auto stratum_of = [&](size_t i) { return strata[i / per]; };
    std::vector<annotate::StratumQuota> quotas;
    for (const auto& s : strata) quotas.push_back({s, 5});

    annotate::SampleReport report;
    auto picked = annotate::stratified_sample(strata.size() * per, stratum_of, quotas, 42,
                                              &report);
    CHECK(picked.size() == 62 * 5);
    std::map<std::string, size_t> counts;
    for (size_t i : picked) ++counts[stratum_of(i)];
    for (const auto& s : strata) CHECK(counts[s] == 5);
    CHECK(report.shortfall.empty());

    auto again = annotate::stratified_sample(strata.size() * per, stratum_of, quotas, 42);
    CHECK(picked == again);

    // shortfall: quota 5 on a stratum with 3 items
    annotate::SampleReport short_report;
    auto few = annotate::stratified_sample(3, [](size_t) { return std::string("only"); },
                                           {{"only", 5}}, 1, &short_report);
    CHECK(few.size() == 3);
    CHECK(short_report.shortfall.at("only") == 2);
}

TEST_CASE("label_consistency fractions and key mismatch") {
    std::map<std::string, std::string> a, b;
    for (int i = 0; i < 100; ++i) {
        std::string id = "r" + std::to_string(i);
        a[id] = "Mathematics";
        b[id] = i < 82 ? "Mathematics" : "Physics";
    }
    CHECK(annotate::label_consistency(a, a) == doctest::Approx(1.0));
    CHECK(annotate::label_consistency(a, b) == doctest::Approx(0.82));
    std::map<std::string, std::string> c = a;
    for (auto& [id, label] : c) label = "Philosophy";
    CHECK(annotate::label_consistency(a, c) == doctest::Approx(0.0));
    std::map<std::string, std::string> d = a;
    d.erase("r0");
    CHECK_THROWS_AS(annotate::label_consistency(a, d), std::invalid_argument);
}
