#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "expertprompt/errors.hpp"
#include "expertprompt/types.hpp"

namespace expertprompt {

/// Parse one line-delimited JSON file into raw objects. Blank lines are
/// skipped; malformed lines raise RecordParseError with the line number.
std::vector<ordered_json> read_jsonl(const std::filesystem::path& path);

/// Write pre-serialized JSON objects one per line (UTF-8, '\n' framing).
/// The write is atomic: a temp file is renamed over the target.
/// Returns the number of records written.
size_t write_jsonl(const std::vector<ordered_json>& records, const std::filesystem::path& path);

/// Typed record file I/O. Round-trips losslessly for every record type: JSON
/// string escaping keeps embedded newlines, quotes and non-ASCII intact while
/// preserving one-record-per-line framing.
template <typename T>
size_t write_records(const std::vector<T>& records, const std::filesystem::path& path) {
    std::vector<ordered_json> lines;
    lines.reserve(records.size());
    for (const auto& r : records) {
        lines.push_back(to_json(r));
    }
    return write_jsonl(lines, path);
}

template <typename T>
std::vector<T> read_records(const std::filesystem::path& path) {
    std::vector<T> out;
    size_t line_no = 0;
    for (const auto& j : read_jsonl(path)) {
        ++line_no;
        try {
            T v;
            from_json(j, v);
            out.push_back(std::move(v));
        } catch (const ordered_json::exception& e) {
            throw RecordParseError(path.string(), line_no, e.what());
        }
    }
    return out;
}

/// Single JSON document I/O (manifests, reports).
void write_json_file(const ordered_json& doc, const std::filesystem::path& path);
ordered_json read_json_file(const std::filesystem::path& path);

/// Write plain text atomically (temp + rename).
void write_text_file(const std::string& text, const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace expertprompt
