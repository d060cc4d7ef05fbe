#pragma once

#include <optional>
#include <string_view>

#include <json.hpp>

namespace qaforge {

// Finds the first balanced {...} or [...] region (string- and escape-aware)
// starting from any occurrence of `open`, and parses it. Tolerates surrounding
// prose and markdown fences in model completions.
inline std::optional<nlohmann::json> extract_json(std::string_view text, char open, char close) {
    for (size_t start = 0; start < text.size(); ++start) {
        if (text[start] != open) continue;
        int depth = 0;
        bool in_string = false, escaped = false;
        for (size_t i = start; i < text.size(); ++i) {
            char c = text[i];
            if (in_string) {
                if (escaped) escaped = false;
                else if (c == '\\') escaped = true;
                else if (c == '"') in_string = false;
                continue;
            }
            if (c == '"') in_string = true;
            else if (c == open) ++depth;
            else if (c == close && --depth == 0) {
                auto j = nlohmann::json::parse(text.substr(start, i - start + 1), nullptr, false);
                if (!j.is_discarded()) return j;
                break;  // balanced but unparsable; try the next opener
            }
        }
    }
    return std::nullopt;
}

inline std::optional<nlohmann::json> extract_json_object(std::string_view text) {
    return extract_json(text, '{', '}');
}

inline std::optional<nlohmann::json> extract_json_array(std::string_view text) {
    return extract_json(text, '[', ']');
}

}  // namespace qaforge
