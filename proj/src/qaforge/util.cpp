#include "qaforge/util.hpp"

#include <algorithm>
#include <cctype>

namespace qaforge::util {

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) {
            out.push_back(cur);
            cur.clear();
        }
    };
    for (size_t i = 0; i < text.size();) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (c < 0x80) {
            if (is_ascii_space(c) || is_ascii_punct(c)) {
                flush();
            } else {
                cur.push_back(static_cast<char>(c));
            }
            ++i;
            continue;
        }
        // Decode one UTF-8 sequence; CJK ideographs count as single tokens.
        size_t len = 1;
        uint32_t cp = 0;
        if ((c >> 5) == 0x6 && i + 1 < text.size()) {
            cp = (c & 0x1f) << 6 | (text[i + 1] & 0x3f);
            len = 2;
        } else if ((c >> 4) == 0xe && i + 2 < text.size()) {
            cp = (c & 0x0f) << 12 | (text[i + 1] & 0x3f) << 6 | (text[i + 2] & 0x3f);
            len = 3;
        } else if ((c >> 3) == 0x1e && i + 3 < text.size()) {
            cp = (c & 0x07) << 18 | (text[i + 1] & 0x3f) << 12 | (text[i + 2] & 0x3f) << 6 |
                 (text[i + 3] & 0x3f);
            len = 4;
        } else {
            cp = c;
        }
        bool cjk = (cp >= 0x4e00 && cp <= 0x9fff) || (cp >= 0x3400 && cp <= 0x4dbf);
        if (cjk) {
            flush();
            out.emplace_back(text.substr(i, len));
        } else {
            cur.append(text.substr(i, len));
        }
        i += len;
    }
    flush();
    return out;
}

std::vector<std::string> normalized_tokens(std::string_view text) {
    auto toks = tokenize(text);
    for (auto& t : toks) {
        std::transform(t.begin(), t.end(), t.begin(),
                       [](unsigned char c) { return c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c); });
    }
    return toks;
}

std::string normalize_text(std::string_view text) {
    return join(normalized_tokens(text), " ");
}

std::string to_lower(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c); });
    return out;
}

std::string trim(std::string_view text) {
    size_t b = 0, e = text.size();
    while (b < e && is_ascii_space(static_cast<unsigned char>(text[b]))) ++b;
    while (e > b && is_ascii_space(static_cast<unsigned char>(text[e - 1]))) --e;
    return std::string(text.substr(b, e - b));
}

double han_fraction(std::string_view text) {
    size_t total_cp = 0, han_cp = 0;
    for (size_t i = 0; i < text.size();) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        uint32_t cp = 0;
        size_t len = 1;
        if (c < 0x80) {
            cp = c;
        } else if ((c >> 5) == 0x6 && i + 1 < text.size()) {
            cp = (c & 0x1f) << 6 | (text[i + 1] & 0x3f);
            len = 2;
        } else if ((c >> 4) == 0xe && i + 2 < text.size()) {
            cp = (c & 0x0f) << 12 | (text[i + 1] & 0x3f) << 6 | (text[i + 2] & 0x3f);
            len = 3;
        } else if ((c >> 3) == 0x1e && i + 3 < text.size()) {
            cp = (c & 0x07) << 18 | (text[i + 1] & 0x3f) << 12 | (text[i + 2] & 0x3f) << 6 |
                 (text[i + 3] & 0x3f);
            len = 4;
        }
        i += len;
        ++total_cp;
        if (cp >= 0x4e00 && cp <= 0x9fff) ++han_cp;
    }
    return total_cp == 0 ? 0.0 : static_cast<double>(han_cp) / static_cast<double>(total_cp);
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

bool starts_with(std::string_view s, std::string_view prefix) {
    return s.size() >= prefix.size() && s.substr(0, prefix.size()) == prefix;
}

bool contains(std::string_view s, std::string_view needle) {
    return s.find(needle) != std::string_view::npos;
}

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
    if (from.empty()) return s;
    size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
        s.replace(pos, from.size(), to);
        pos += to.size();
    }
    return s;
}

}  // namespace qaforge::util
