#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "qaforge/decontam.hpp"
#include "qaforge/rng.hpp"
#include "qaforge/util.hpp"

using namespace qaforge;

namespace {

std::string random_doc(Rng& rng, size_t words, const std::string& prefix = "w") {
    std::ostringstream out;
    for (size_t i = 0; i < words; ++i) out << prefix << rng.below(50000) << " ";
    return out.str();
}

// Naive oracle: does any normalized n-gram of `text` appear in any benchmark doc?
bool naive_overlap(const std::string& text, const std::vector<std::string>& bench, int n) {
    auto toks = util::normalized_tokens(text);
    if (toks.size() < static_cast<size_t>(n)) return false;
    std::set<std::string> grams;
    for (size_t i = 0; i + n <= toks.size(); ++i) {
        std::string g;
        for (int k = 0; k < n; ++k) g += toks[i + k] + "\x1f";
        grams.insert(g);
    }
    for (const auto& doc : bench) {
        auto btoks = util::normalized_tokens(doc);
        for (size_t i = 0; i + n <= btoks.size(); ++i) {
            std::string g;
            for (int k = 0; k < n; ++k) g += btoks[i + k] + "\x1f";
            if (grams.count(g)) return true;
        }
    }
    return false;
}

}  // namespace

TEST_CASE("one 10-token doc yields an index of size 1") {
    auto index = decontam::build_ngram_index({"a b c d e f g h i j"}, 10);
    CHECK(index.size() == 1);
    CHECK(index.doc_count() == 1);
}

TEST_CASE("T tokens yield T - n + 1 n-grams before dedup") {
    std::ostringstream doc;
    for (int i = 0; i < 57; ++i) doc << "tok" << i << " ";  // all distinct
    auto index = decontam::build_ngram_index({doc.str()}, 10);
    CHECK(index.size() == 57 - 10 + 1);
}

TEST_CASE("index membership is order-independent across input permutations") {
    std::vector<std::string> docs = {"alpha beta gamma delta epsilon zeta eta theta iota kappa",
                                     "one two three four five six seven eight nine ten eleven"};
    auto a = decontam::build_ngram_index(docs, 10);
    std::swap(docs[0], docs[1]);
    auto b = decontam::build_ngram_index(docs, 10);
    CHECK(a.size() == b.size());
    auto toks = util::normalized_tokens(docs[0]);
    for (size_t i = 0; i + 10 <= toks.size(); ++i) {
        uint64_t h = decontam::NgramIndex::hash_ngram(toks, i, 10);
        CHECK(a.contains(h) == b.contains(h));
    }
}

TEST_CASE("build_ngram_index rejects bad inputs") {
    CHECK_THROWS_AS(decontam::build_ngram_index({}, 10), std::invalid_argument);
    CHECK_THROWS_AS(decontam::build_ngram_index({"a b"}, 1), std::invalid_argument);
}

TEST_CASE("verbatim benchmark sentence of >= 10 tokens is flagged") {
    std::string sentence = "the mitochondria is the powerhouse of the cell we are told";
    auto index = decontam::build_ngram_index({sentence}, 10);
    auto report = decontam::check_exact("r1", "Intro text. " + sentence + " More text.", index);
    CHECK(report.verdict == decontam::Verdict::ngram_hit);
    CHECK(report.matched_span.has_value());
}

TEST_CASE("a 9-token overlap stays clean under n = 10") {
    std::string bench = "b1 b2 b3 b4 b5 b6 b7 b8 b9 b10 b11 b12";
    auto index = decontam::build_ngram_index({bench}, 10);
    // plant exactly 9 consecutive benchmark tokens
    auto report = decontam::check_exact("r1", "x1 x2 b1 b2 b3 b4 b5 b6 b7 b8 b9 y1 y2", index);
    CHECK(report.verdict == decontam::Verdict::clean);
}

TEST_CASE("planted contaminations match the naive oracle exactly") {
    Rng rng(99);
    std::vector<std::string> bench;
    for (int i = 0; i < 20; ++i) bench.push_back(random_doc(rng, 40, "bench"));
    auto index = decontam::build_ngram_index(bench, 10);

    size_t planted = 0;
    std::vector<std::pair<std::string, std::string>> corpus;
    for (int i = 0; i < 300; ++i) {
        std::string doc = random_doc(rng, 30, "corpus");
        if (i % 12 == 0) {
            // splice in 10 consecutive tokens from a benchmark doc
            auto btoks = util::tokenize(bench[rng.below(bench.size())]);
            size_t start = rng.below(btoks.size() - 10);
            std::string overlap;
            for (size_t k = 0; k < 10; ++k) overlap += btoks[start + k] + " ";
            doc += " " + overlap;
            ++planted;
        }
        corpus.emplace_back("d" + std::to_string(i), doc);
    }

    size_t hits = 0;
    for (const auto& [id, text] : corpus) {
        bool flagged = decontam::check_exact(id, text, index).verdict ==
                       decontam::Verdict::ngram_hit;
        CHECK(flagged == naive_overlap(text, bench, 10));
        if (flagged) ++hits;
    }
    CHECK(hits == planted);
}

TEST_CASE("adding benchmark docs never turns a hit into clean") {
    Rng rng(5);
    std::vector<std::string> bench = {random_doc(rng, 30)};
    std::string record = "padding " + bench[0];
    auto small = decontam::build_ngram_index(bench, 10);
    REQUIRE(decontam::check_exact("r", record, small).verdict == decontam::Verdict::ngram_hit);
    bench.push_back(random_doc(rng, 30, "extra"));
    auto big = decontam::build_ngram_index(bench, 10);
    CHECK(decontam::check_exact("r", record, big).verdict == decontam::Verdict::ngram_hit);
}

TEST_CASE("embedding check: identical record has similarity 1") {
    auto embedder = decontam::make_hash_embedder();
    std::string text = "an unusual passage about spectral graph theory";
    std::vector<std::vector<double>> vectors = {embedder(text)};
    auto report = decontam::check_embedding("r1", text, vectors, embedder, 0.95);
    CHECK(report.verdict == decontam::Verdict::embedding_hit);
    REQUIRE(report.similarity.has_value());
    CHECK(*report.similarity == doctest::Approx(1.0));
}

TEST_CASE("embedding check: disjoint vocabularies are clean") {
    auto embedder = decontam::make_hash_embedder();
    std::vector<std::vector<double>> vectors = {embedder("aaa bbb ccc ddd eee")};
    auto report = decontam::check_embedding("r1", "vvv www xxx yyy zzz", vectors, embedder, 0.5);
    CHECK(report.verdict == decontam::Verdict::clean);
    CHECK(*report.similarity < 0.3);
}

TEST_CASE("embedding near-duplicate above threshold is flagged; similarity verified") {
    auto embedder = decontam::make_hash_embedder();
    std::string bench = "t1 t2 t3 t4 t5 t6 t7 t8 t9 t10 t11 t12 t13 t14 t15 t16 t17 t18 t19 t20";
    std::string near = bench + " extra";
    auto vb = embedder(bench);
    auto vn = embedder(near);
    double dot = 0;
    for (size_t i = 0; i < vb.size(); ++i) dot += vb[i] * vn[i];
    REQUIRE(dot > 0.95);  // near-duplicate by construction
    auto report = decontam::check_embedding("r1", near, {vb}, embedder, 0.95);
    CHECK(report.verdict == decontam::Verdict::embedding_hit);
    CHECK(*report.similarity == doctest::Approx(dot));
}

TEST_CASE("filter_corpus conserves counts and passes all-clean input through") {
    Rng rng(77);
    std::vector<std::string> bench = {random_doc(rng, 50, "bench")};
    auto index = decontam::build_ngram_index(bench, 10);

    std::vector<std::pair<std::string, std::string>> corpus;
    for (int i = 0; i < 50; ++i)
        corpus.emplace_back("c" + std::to_string(i), random_doc(rng, 20, "clean"));
    std::vector<std::string> clean;
    auto stats = decontam::filter_corpus(corpus, index,
                                         [&](const std::string& id) { clean.push_back(id); });
    CHECK(stats.input == 50);
    CHECK(stats.clean + stats.flagged == stats.input);
    CHECK(clean.size() == stats.clean);
    CHECK(stats.clean == 50);  // disjoint prefixes: all clean
}

TEST_CASE("filtering the benchmark against itself removes everything") {
    std::vector<std::string> bench;
    Rng rng(13);
    for (int i = 0; i < 10; ++i) bench.push_back(random_doc(rng, 30, "self"));
    auto index = decontam::build_ngram_index(bench, 10);
    std::vector<std::pair<std::string, std::string>> corpus;
    for (size_t i = 0; i < bench.size(); ++i)
        corpus.emplace_back("b" + std::to_string(i), bench[i]);
    size_t kept = 0;
    auto stats = decontam::filter_corpus(corpus, index, [&](const std::string&) { ++kept; });
    CHECK(kept == 0);
    CHECK(stats.flagged == bench.size());
}
