#include "expertprompt/corpus.hpp"

#include <cstdio>
#include <sstream>
#include <unordered_set>

#include "expertprompt/errors.hpp"
#include "expertprompt/hash.hpp"
#include "expertprompt/jsonl.hpp"

namespace expertprompt {

namespace {

std::string padded_index(size_t i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%05zu", i);
    return buf;
}

Instruction record_from_json(const ordered_json& j, size_t index, const std::string& path,
                             size_t line_no) {
    if (!j.is_object()) {
        throw RecordParseError(path, line_no, "record is not a JSON object");
    }
    if (!j.contains("instruction") || !j.at("instruction").is_string()) {
        throw RecordParseError(path, line_no, "record has no instruction field");
    }
    Instruction ins;
    ins.instruction = j.at("instruction").get<std::string>();
    if (trim(ins.instruction).empty()) {
        throw RecordParseError(path, line_no, "instruction is empty");
    }
    if (j.contains("id") && !j.at("id").is_null()) {
        const auto& id = j.at("id");
        ins.id = id.is_string() ? id.get<std::string>() : id.dump();
    }
    if (ins.id.empty()) {
        ins.id = padded_index(index);
    }
    if (j.contains("input") && j.at("input").is_string()) {
        std::string input = j.at("input").get<std::string>();
        if (!trim(input).empty()) {
            ins.input = std::move(input);
        }
    }
    return ins;
}

}  // namespace

std::vector<Instruction> read_instruction_corpus(const std::filesystem::path& path) {
    std::string raw = read_text_file(path);

    // Skip BOM and leading whitespace to detect the container format.
    size_t start = 0;
    if (raw.size() >= 3 && raw.compare(0, 3, "\xef\xbb\xbf") == 0) {
        start = 3;
    }
    while (start < raw.size() && (raw[start] == ' ' || raw[start] == '\t' || raw[start] == '\n' ||
                                  raw[start] == '\r')) {
        ++start;
    }

    std::vector<Instruction> out;
    if (start < raw.size() && raw[start] == '[') {
        ordered_json doc;
        try {
            doc = ordered_json::parse(raw.substr(start));
        } catch (const ordered_json::exception& e) {
            throw IoError("malformed JSON array in " + path.string() + ": " + e.what());
        }
        if (!doc.is_array()) {
            throw IoError("expected a JSON array in " + path.string());
        }
        size_t index = 0;
        for (const auto& j : doc) {
            // Array input has no line numbers; report the record index instead.
            out.push_back(record_from_json(j, index, path.string(), index + 1));
            ++index;
        }
    } else {
        std::istringstream in(raw);
        std::string line;
        size_t line_no = 0;
        size_t index = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') {
                line.pop_back();
            }
            if (trim(line).empty()) {
                continue;
            }
            ordered_json j;
            try {
                j = ordered_json::parse(line);
            } catch (const ordered_json::exception& e) {
                throw RecordParseError(path.string(), line_no, e.what());
            }
            out.push_back(record_from_json(j, index, path.string(), line_no));
            ++index;
        }
    }

    std::unordered_set<std::string> seen;
    seen.reserve(out.size());
    for (const auto& ins : out) {
        if (!seen.insert(ins.id).second) {
            throw ValidationError("duplicate instruction id '" + ins.id + "' in " + path.string());
        }
    }
    return out;
}

std::string corpus_digest(const std::filesystem::path& path) {
    return file_digest(path.string());
}

}  // namespace expertprompt
