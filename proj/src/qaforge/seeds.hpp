#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qaforge/jsonio.hpp"

namespace qaforge::ingest {

enum class SourceKind { qa_pair, book, web_page };
enum class Language { en, zh, other };

std::string source_kind_name(SourceKind k);
bool source_kind_from_name(std::string_view name, SourceKind& out);
std::string language_name(Language l);

struct SeedRecord {
    std::string seed_id;
    SourceKind source_kind = SourceKind::qa_pair;
    std::string question;  // qa_pair only
    std::string answer;    // qa_pair only
    std::string body;      // book / web_page only
    Language language = Language::en;
    uint64_t token_count = 0;
    std::string origin;

    // The text fed to annotation / decontamination / synthesis.
    std::string content_text() const;

    json to_json() const;
    static std::optional<SeedRecord> from_json(const json& j, std::string* error = nullptr);
};

struct TokenCounter {
    enum class Mode { whitespace_proxy, pluggable_external };
    Mode mode = Mode::whitespace_proxy;
    std::string name = "whitespace_proxy";
    std::function<uint64_t(std::string_view)> external;  // required for pluggable_external
};

uint64_t count_tokens(std::string_view text, const TokenCounter& counter = {});

Language detect_language(std::string_view text);

struct ReadStats {
    size_t lines = 0;
    size_t records = 0;
    size_t rejects = 0;
};

// Streams validated SeedRecords from a line-delimited JSON file with fields
// {id?, question?, answer?, text?, source?}. Malformed lines go to `rejects`
// (when given) as {"line": n, "reason": ..., "raw": ...}; the read never
// aborts mid-file. records + rejects == input line count.
ReadStats read_seeds(const std::filesystem::path& path, SourceKind kind,
                     const std::function<void(SeedRecord&&)>& sink,
                     JsonlWriter* rejects = nullptr,
                     const TokenCounter& counter = {});

// Splits a document body into chunks of at most max_tokens proxy tokens,
// respecting paragraph boundaries where possible. Concatenating the chunks
// reconstructs the body modulo whitespace. max_tokens must be >= 64.
std::vector<SeedRecord> chunk_document(const std::string& body, uint64_t max_tokens,
                                       SourceKind kind = SourceKind::book,
                                       std::string_view origin = "",
                                       std::string_view id_prefix = "chunk",
                                       const TokenCounter& counter = {});

}  // namespace qaforge::ingest
