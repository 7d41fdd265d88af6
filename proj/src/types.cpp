#include "expertprompt/types.hpp"

#include <ctime>
#include <vector>

#include "expertprompt/errors.hpp"
#include "expertprompt/text.hpp"

namespace expertprompt {

std::string Instruction::composed_text() const {
    std::string text = trim(instruction);
    if (input && !trim(*input).empty()) {
        text += "\n\n";
        text += trim(*input);
    }
    return text;
}

std::string to_string(Strategy s) {
    switch (s) {
        case Strategy::vanilla:
            return "vanilla";
        case Strategy::expert:
            return "expert";
        case Strategy::static_desc:
            return "static_desc";
    }
    throw ValidationError("unknown strategy value");
}

Strategy strategy_from_string(const std::string& s) {
    if (s == "vanilla") return Strategy::vanilla;
    if (s == "expert") return Strategy::expert;
    if (s == "static_desc" || s == "static") return Strategy::static_desc;
    throw ValidationError("unknown strategy: '" + s + "'");
}

ordered_json to_json(const Instruction& v) {
    ordered_json j;
    j["id"] = v.id;
    j["instruction"] = v.instruction;
    if (v.input) {
        j["input"] = *v.input;
    }
    return j;
}

void from_json(const ordered_json& j, Instruction& v) {
    v.id = j.at("id").get<std::string>();
    v.instruction = j.at("instruction").get<std::string>();
    if (j.contains("input") && !j.at("input").is_null()) {
        v.input = j.at("input").get<std::string>();
    } else {
        v.input.reset();
    }
}

ordered_json to_json(const ExpertIdentity& v) {
    ordered_json j;
    j["instruction_id"] = v.instruction_id;
    j["identity_text"] = v.identity_text;
    j["source_model"] = v.source_model;
    j["prompt_hash"] = v.prompt_hash;
    return j;
}

void from_json(const ordered_json& j, ExpertIdentity& v) {
    v.instruction_id = j.at("instruction_id").get<std::string>();
    v.identity_text = j.at("identity_text").get<std::string>();
    v.source_model = j.at("source_model").get<std::string>();
    v.prompt_hash = j.at("prompt_hash").get<std::string>();
}

ordered_json to_json(const AnswerRecord& v) {
    ordered_json j;
    j["instruction_id"] = v.instruction_id;
    j["strategy"] = to_string(v.strategy);
    j["raw_text"] = v.raw_text;
    j["clean_text"] = v.clean_text;
    j["source_model"] = v.source_model;
    j["prompt_hash"] = v.prompt_hash;
    j["created_at"] = v.created_at;
    return j;
}

void from_json(const ordered_json& j, AnswerRecord& v) {
    v.instruction_id = j.at("instruction_id").get<std::string>();
    v.strategy = strategy_from_string(j.at("strategy").get<std::string>());
    v.raw_text = j.at("raw_text").get<std::string>();
    v.clean_text = j.at("clean_text").get<std::string>();
    v.source_model = j.at("source_model").get<std::string>();
    v.prompt_hash = j.at("prompt_hash").get<std::string>();
    v.created_at = j.value("created_at", "");
}

ordered_json to_json(const JudgeRecord& v) {
    ordered_json j;
    j["instruction_id"] = v.instruction_id;
    j["model_a"] = v.model_a;
    j["model_b"] = v.model_b;
    j["swapped"] = v.swapped;
    j["score_a"] = v.score_a;
    j["score_b"] = v.score_b;
    j["judge_model"] = v.judge_model;
    j["raw_judgment"] = v.raw_judgment;
    j["status"] = "ok";
    return j;
}

void from_json(const ordered_json& j, JudgeRecord& v) {
    v.instruction_id = j.at("instruction_id").get<std::string>();
    v.model_a = j.at("model_a").get<std::string>();
    v.model_b = j.at("model_b").get<std::string>();
    v.swapped = j.at("swapped").get<bool>();
    v.score_a = j.at("score_a").get<double>();
    v.score_b = j.at("score_b").get<double>();
    v.judge_model = j.at("judge_model").get<std::string>();
    v.raw_judgment = j.at("raw_judgment").get<std::string>();
}

ordered_json to_json(const JudgeFailure& v) {
    ordered_json j;
    j["instruction_id"] = v.instruction_id;
    j["reason"] = v.reason;
    j["raw_judgment"] = v.raw_judgment;
    j["status"] = "parse_failure";
    return j;
}

void from_json(const ordered_json& j, JudgeFailure& v) {
    v.instruction_id = j.at("instruction_id").get<std::string>();
    v.reason = j.at("reason").get<std::string>();
    v.raw_judgment = j.value("raw_judgment", "");
}

ordered_json to_json(const RunManifest& v) {
    ordered_json j;
    j["seed"] = v.seed;
    j["k_exemplars"] = v.k_exemplars;
    j["backend_descriptor"] = v.backend_descriptor;
    j["corpus_digest"] = v.corpus_digest;
    // std::map keeps template names sorted, so the dump is stable.
    ordered_json hashes;
    for (const auto& [name, digest] : v.template_hashes) {
        hashes[name] = digest;
    }
    j["template_hashes"] = hashes;
    j["created_at"] = v.created_at;
    return j;
}

void from_json(const ordered_json& j, RunManifest& v) {
    v.seed = j.at("seed").get<uint64_t>();
    v.k_exemplars = j.at("k_exemplars").get<int>();
    v.backend_descriptor = j.at("backend_descriptor").get<std::string>();
    v.corpus_digest = j.at("corpus_digest").get<std::string>();
    v.template_hashes.clear();
    for (const auto& [name, digest] : j.at("template_hashes").items()) {
        v.template_hashes[name] = digest.get<std::string>();
    }
    v.created_at = j.value("created_at", "");
}

ordered_json to_json(const ExemplarPair& v) {
    ordered_json j;
    j["instruction"] = v.instruction;
    j["identity"] = v.identity;
    return j;
}

void from_json(const ordered_json& j, ExemplarPair& v) {
    v.instruction = j.at("instruction").get<std::string>();
    v.identity = j.at("identity").get<std::string>();
}

std::string now_iso8601() {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string trim(std::string_view text) {
    // Collect codepoint boundaries once so trimming can cut mid-string safely.
    std::vector<std::pair<size_t, uint32_t>> points;
    size_t pos = 0;
    while (pos < text.size()) {
        size_t start = pos;
        uint32_t cp = next_codepoint(text, pos);
        points.emplace_back(start, cp);
    }
    size_t begin = 0;
    size_t end = points.size();
    while (begin < end && is_unicode_space(points[begin].second)) {
        ++begin;
    }
    while (end > begin && is_unicode_space(points[end - 1].second)) {
        --end;
    }
    if (begin == end) {
        return "";
    }
    size_t byte_begin = points[begin].first;
    size_t byte_end = (end == points.size()) ? text.size() : points[end].first;
    return std::string(text.substr(byte_begin, byte_end - byte_begin));
}

}  // namespace expertprompt
