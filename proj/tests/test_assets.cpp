#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "qaforge/jsonio.hpp"
#include "qaforge/prompts.hpp"
#include "qaforge/vocab.hpp"

using namespace qaforge;

namespace {

const std::filesystem::path kDataDir = QAFORGE_DATA_DIR;

}  // namespace

TEST_CASE("disciplines_v1.txt mirrors the embedded vocabulary exactly") {
    std::ostringstream expected;
    for (const auto& d : vocab::disciplines()) expected << d << "\n";
    CHECK(read_file(kDataDir / "disciplines_v1.txt") == expected.str());
    CHECK(vocab::disciplines().size() == 62);
}

TEST_CASE("prompt assets mirror the embedded templates exactly") {
    const std::pair<const char*, std::string> assets[] = {
        {"discipline_v1.txt", prompts::discipline_template()},
        {"difficulty_v1.txt", prompts::difficulty_template()},
        {"multi_grade_v1.txt", prompts::multi_grade_template()},
        {"high_difficulty_v1.txt", prompts::high_difficulty_template()},
        {"mcq_constraints_v1.txt", prompts::mcq_constraints()},
        {"essay_constraints_v1.txt", prompts::essay_constraints()},
        {"mcq_schema_v1.txt", prompts::mcq_schema()},
        {"essay_schema_v1.txt", prompts::essay_schema()},
        {"refine_v1.txt", prompts::refine_template()},
        {"stage_v1.txt", prompts::stage_template()},
    };
    for (const auto& [name, body] : assets) {
        INFO(name);
        CHECK(read_file(kDataDir / "prompts" / name) == body);
    }
}
