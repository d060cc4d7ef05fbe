#include "qaforge/seeds.hpp"

#include <stdexcept>

#include "qaforge/util.hpp"

namespace qaforge::ingest {

std::string source_kind_name(SourceKind k) {
    switch (k) {
        case SourceKind::qa_pair: return "qa_pair";
        case SourceKind::book: return "book";
        case SourceKind::web_page: return "web_page";
    }
    return "qa_pair";
}

bool source_kind_from_name(std::string_view name, SourceKind& out) {
    if (name == "qa_pair") out = SourceKind::qa_pair;
    else if (name == "book") out = SourceKind::book;
    else if (name == "web_page") out = SourceKind::web_page;
    else return false;
    return true;
}

std::string language_name(Language l) {
    switch (l) {
        case Language::en: return "en";
        case Language::zh: return "zh";
        case Language::other: return "other";
    }
    return "other";
}

std::string SeedRecord::content_text() const {
    if (source_kind == SourceKind::qa_pair) return question + "\n" + answer;
    return body;
}

json SeedRecord::to_json() const {
    json j;
    j["seed_id"] = seed_id;
    j["source_kind"] = source_kind_name(source_kind);
    if (source_kind == SourceKind::qa_pair) {
        j["question"] = question;
        j["answer"] = answer;
    } else {
        j["body"] = body;
    }
    j["language"] = language_name(language);
    j["token_count"] = token_count;
    j["origin"] = origin;
    return j;
}

std::optional<SeedRecord> SeedRecord::from_json(const json& j, std::string* error) {
    auto fail = [&](const std::string& msg) -> std::optional<SeedRecord> {
        if (error) *error = msg;
        return std::nullopt;
    };
    if (!j.is_object()) return fail("not an object");
    SeedRecord r;
    if (!j.contains("seed_id") || !j["seed_id"].is_string()) return fail("missing field seed_id");
    r.seed_id = j["seed_id"];
    SourceKind kind;
    if (!j.contains("source_kind") || !j["source_kind"].is_string() ||
        !source_kind_from_name(j["source_kind"].get<std::string>(), kind))
        return fail("bad source_kind");
    r.source_kind = kind;
    if (kind == SourceKind::qa_pair) {
        r.question = j.value("question", "");
        r.answer = j.value("answer", "");
        if (r.question.empty()) return fail("empty field question");
        if (r.answer.empty()) return fail("empty field answer");
    } else {
        r.body = j.value("body", "");
        if (r.body.empty()) return fail("empty field body");
    }
    std::string lang = j.value("language", "en");
    r.language = lang == "zh" ? Language::zh : lang == "en" ? Language::en : Language::other;
    r.token_count = j.value("token_count", 0ull);
    r.origin = j.value("origin", "");
    if (r.token_count == 0) return fail("token_count must be positive");
    return r;
}

uint64_t count_tokens(std::string_view text, const TokenCounter& counter) {
    if (counter.mode == TokenCounter::Mode::pluggable_external) {
        if (!counter.external) throw std::invalid_argument("external token counter not set");
        return counter.external(text);
    }
    return util::tokenize(text).size();
}

Language detect_language(std::string_view text) {
    double han = util::han_fraction(text);
    if (han > 0.25) return Language::zh;
    size_t letters = 0, total = 0;
    for (unsigned char c : text) {
        if (!util::is_ascii_space(c)) ++total;
        if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) ++letters;
    }
    if (total > 0 && static_cast<double>(letters) / static_cast<double>(total) > 0.3)
        return Language::en;
    return Language::other;
}

ReadStats read_seeds(const std::filesystem::path& path, SourceKind kind,
                     const std::function<void(SeedRecord&&)>& sink, JsonlWriter* rejects,
                     const TokenCounter& counter) {
    ReadStats stats;
    for_each_jsonl(path, [&](size_t lineno, const json& j, const std::string& raw) {
        ++stats.lines;
        auto reject = [&](const std::string& reason) {
            ++stats.rejects;
            if (rejects) rejects->write({{"line", lineno}, {"reason", reason}, {"raw", raw}});
        };
        if (j.is_discarded()) {
            reject("invalid json");
            return;
        }
        if (!j.is_object()) {
            reject("not an object");
            return;
        }

        SeedRecord r;
        r.source_kind = kind;
        r.origin = j.value("source", path.filename().string());
        if (j.contains("id") && j["id"].is_string() && !j["id"].get<std::string>().empty()) {
            r.seed_id = j["id"];
        } else {
            r.seed_id = path.stem().string() + "-" + std::to_string(lineno);
        }

        if (kind == SourceKind::qa_pair) {
            if (!j.contains("question") || !j["question"].is_string()) {
                reject("missing field question");
                return;
            }
            if (!j.contains("answer") || !j["answer"].is_string()) {
                reject("missing field answer");
                return;
            }
            r.question = j["question"];
            r.answer = j["answer"];
            if (util::trim(r.question).empty()) {
                reject("empty field question");
                return;
            }
            if (util::trim(r.answer).empty()) {
                reject("empty field answer");
                return;
            }
        } else {
            if (!j.contains("text") || !j["text"].is_string()) {
                reject("missing field text");
                return;
            }
            r.body = j["text"];
            if (util::trim(r.body).empty()) {
                reject("empty field text");
                return;
            }
        }

        r.language = detect_language(r.content_text());
        r.token_count = count_tokens(r.content_text(), counter);
        if (r.token_count == 0) {
            reject("no countable tokens");
            return;
        }
        ++stats.records;
        sink(std::move(r));
    });
    return stats;
}

namespace {

// A body fragment plus whether a space precedes it when rejoining.
struct Atom {
    std::string text;
    bool space_before;
    uint64_t tokens;
};

std::vector<Atom> paragraph_atoms(const std::string& para, const TokenCounter& counter) {
    std::vector<Atom> atoms;
    std::string word;
    auto flush_word = [&] {
        if (word.empty()) return;
        // CJK runs split into per-character atoms so long unspaced text can
        // still be packed against the token budget.
        auto toks = util::tokenize(word);
        if (toks.size() > 1 && toks[0].size() >= 3 &&
            static_cast<unsigned char>(toks[0][0]) >= 0xe0) {
            bool first = true;
            size_t consumed = 0;
            for (const auto& t : toks) {
                auto pos = word.find(t, consumed);
                if (pos == std::string::npos) break;
                atoms.push_back({t, first && !atoms.empty(), count_tokens(t, counter)});
                consumed = pos + t.size();
                first = false;
            }
            std::string tail = word.substr(consumed);
            if (!tail.empty()) atoms.push_back({tail, false, count_tokens(tail, counter)});
        } else {
            atoms.push_back({word, !atoms.empty(), count_tokens(word, counter)});
        }
        word.clear();
    };
    for (unsigned char c : para) {
        if (util::is_ascii_space(c)) {
            flush_word();
        } else {
            word.push_back(static_cast<char>(c));
        }
    }
    flush_word();
    return atoms;
}

}  // namespace

std::vector<SeedRecord> chunk_document(const std::string& body, uint64_t max_tokens,
                                       SourceKind kind, std::string_view origin,
                                       std::string_view id_prefix, const TokenCounter& counter) {
    if (max_tokens < 64) throw std::invalid_argument("chunk_document: max_tokens must be >= 64");

    // Paragraphs split on blank lines.
    std::vector<std::string> paragraphs;
    size_t pos = 0;
    while (pos < body.size()) {
        auto next = body.find("\n\n", pos);
        std::string para = util::trim(body.substr(pos, next == std::string::npos
                                                           ? std::string::npos
                                                           : next - pos));
        if (!para.empty()) paragraphs.push_back(para);
        if (next == std::string::npos) break;
        pos = next + 2;
    }

    std::vector<SeedRecord> chunks;
    std::string cur;
    uint64_t cur_tokens = 0;

    auto emit = [&] {
        if (cur.empty()) return;
        SeedRecord r;
        r.seed_id = std::string(id_prefix) + "-" + std::to_string(chunks.size());
        r.source_kind = kind;
        r.body = cur;
        r.origin = std::string(origin);
        r.language = detect_language(cur);
        r.token_count = cur_tokens > 0 ? cur_tokens : count_tokens(cur, counter);
        chunks.push_back(std::move(r));
        cur.clear();
        cur_tokens = 0;
    };

    for (const auto& para : paragraphs) {
        uint64_t para_tokens = count_tokens(para, counter);
        if (para_tokens <= max_tokens) {
            if (cur_tokens + para_tokens > max_tokens) emit();
            if (!cur.empty()) cur += "\n\n";
            cur += para;
            cur_tokens += para_tokens;
            continue;
        }
        // Oversize paragraph: close the current chunk, then pack word atoms.
        emit();
        for (const auto& atom : paragraph_atoms(para, counter)) {
            if (cur_tokens + atom.tokens > max_tokens && !cur.empty()) emit();
            if (!cur.empty() && atom.space_before) cur += ' ';
            cur += atom.text;
            cur_tokens += atom.tokens;
        }
        emit();
    }
    emit();

    if (chunks.empty() && !util::trim(body).empty()) {
        // Whitespace-only paragraph structure; keep the trimmed body whole.
        cur = util::trim(body);
        cur_tokens = count_tokens(cur, counter);
        emit();
    }
    return chunks;
}

}  // namespace qaforge::ingest
