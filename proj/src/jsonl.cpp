#include "expertprompt/jsonl.hpp"

#include <unistd.h>

#include <atomic>
#include <sstream>

namespace expertprompt {

namespace fs = std::filesystem;

namespace {

std::atomic<uint64_t> tmp_counter{0};

fs::path temp_sibling(const fs::path& path) {
    uint64_t n = tmp_counter.fetch_add(1);
    return path.parent_path() /
           (path.filename().string() + ".tmp." + std::to_string(::getpid()) + "." + std::to_string(n));
}

void atomic_write(const std::string& content, const fs::path& path) {
    fs::path parent = path.parent_path();
    if (!parent.empty() && !fs::exists(parent)) {
        throw IoError("parent directory does not exist: " + parent.string());
    }
    fs::path tmp = temp_sibling(path);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot open for writing: " + tmp.string());
        }
        out << content;
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw IoError("write failure: " + path.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("rename failure for " + path.string() + ": " + ec.message());
    }
}

}  // namespace

std::vector<ordered_json> read_jsonl(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open file: " + path.string());
    }
    std::vector<ordered_json> out;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (trim(line).empty()) {
            continue;
        }
        try {
            out.push_back(ordered_json::parse(line));
        } catch (const ordered_json::exception& e) {
            throw RecordParseError(path.string(), line_no, e.what());
        }
    }
    if (in.bad()) {
        throw IoError("read failure: " + path.string());
    }
    return out;
}

size_t write_jsonl(const std::vector<ordered_json>& records, const fs::path& path) {
    std::string buf;
    for (const auto& j : records) {
        buf += j.dump();
        buf += '\n';
    }
    atomic_write(buf, path);
    return records.size();
}

void write_json_file(const ordered_json& doc, const fs::path& path) {
    atomic_write(doc.dump(2) + "\n", path);
}

ordered_json read_json_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open file: " + path.string());
    }
    try {
        return ordered_json::parse(in);
    } catch (const ordered_json::exception& e) {
        throw IoError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

void write_text_file(const std::string& text, const fs::path& path) {
    atomic_write(text, path);
}

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open file: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) {
        throw IoError("read failure: " + path.string());
    }
    return buf.str();
}

}  // namespace expertprompt
