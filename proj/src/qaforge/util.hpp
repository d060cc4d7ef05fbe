#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace qaforge::util {

// 64-bit FNV-1a. Used for n-gram hashing, config hashes and prompt lineage.
inline uint64_t fnv1a64(std::string_view data, uint64_t seed = 0xcbf29ce484222325ull) {
    uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline bool is_ascii_space(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline bool is_ascii_punct(unsigned char c) {
    return c < 0x80 && !is_ascii_space(c) &&
           !((c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'));
}

// A token is a maximal run of characters that are neither ASCII whitespace nor
// ASCII punctuation. Bytes >= 0x80 count as word characters, so CJK text forms
// tokens between punctuation marks.
std::vector<std::string> tokenize(std::string_view text);

// tokenize + ASCII lowercase. The normal form used for n-gram decontamination
// and answer comparison.
std::vector<std::string> normalized_tokens(std::string_view text);

// Lowercased tokens joined by single spaces.
std::string normalize_text(std::string_view text);

std::string to_lower(std::string_view text);
std::string trim(std::string_view text);

// Fraction of non-ASCII codepoints that fall in the CJK unified ideograph range.
double han_fraction(std::string_view text);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool starts_with(std::string_view s, std::string_view prefix);
bool contains(std::string_view s, std::string_view needle);

// Replace every occurrence of `from` in `s` with `to`.
std::string replace_all(std::string s, std::string_view from, std::string_view to);

}  // namespace qaforge::util
