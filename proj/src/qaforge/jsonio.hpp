#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace qaforge {

using json = nlohmann::json;

// Calls fn(line_number, parsed_or_discarded) for every line of a line-delimited
// JSON file. Parse failures are reported with a null json and the raw line.
inline void for_each_jsonl(const std::filesystem::path& path,
                           const std::function<void(size_t, const json&, const std::string&)>& fn) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        fn(lineno, j, line);
    }
}

class JsonlWriter {
public:
    explicit JsonlWriter(const std::filesystem::path& path) : out_(path) {
        if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
    }

    void write(const json& j) {
        out_ << j.dump() << '\n';
        ++count_;
    }

    size_t count() const { return count_; }
    void flush() { out_.flush(); }

private:
    std::ofstream out_;
    size_t count_ = 0;
};

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << content;
}

}  // namespace qaforge
