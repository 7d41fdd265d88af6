#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

namespace expertprompt {

using ordered_json = nlohmann::ordered_json;

/// One unit of an Alpaca-style instruction corpus.
struct Instruction {
    std::string id;
    std::string instruction;
    std::optional<std::string> input;

    /// Instruction text with the optional supplementary input appended after
    /// one blank line. Every prompting strategy renders this composed form so
    /// strategies stay comparable.
    std::string composed_text() const;
};

/// Synthesized expert description bound to one instruction.
struct ExpertIdentity {
    std::string instruction_id;
    std::string identity_text;
    std::string source_model;
    std::string prompt_hash;
};

enum class Strategy {
    vanilla,
    expert,
    static_desc,
};

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);

/// A generated answer tagged with its prompting strategy. raw_text is the
/// backend output verbatim; clean_text is raw_text after persona-leak
/// stripping (expert strategy only; identical otherwise).
struct AnswerRecord {
    std::string instruction_id;
    Strategy strategy = Strategy::vanilla;
    std::string raw_text;
    std::string clean_text;
    std::string source_model;
    std::string prompt_hash;
    std::string created_at;
};

/// One pairwise judgment. score_a/score_b are stored in canonical
/// orientation: score_a always belongs to model_a even when the answers were
/// presented to the judge in swapped order.
struct JudgeRecord {
    std::string instruction_id;
    std::string model_a;
    std::string model_b;
    bool swapped = false;
    double score_a = 0.0;
    double score_b = 0.0;
    std::string judge_model;
    std::string raw_judgment;
};

/// A judge reply that could not be parsed into two scores. Kept alongside
/// JudgeRecords so failures are counted, never silently dropped.
struct JudgeFailure {
    std::string instruction_id;
    std::string reason;
    std::string raw_judgment;
};

/// Reproducibility envelope written by every command.
struct RunManifest {
    uint64_t seed = 0;
    std::map<std::string, std::string> template_hashes;
    std::string backend_descriptor;
    int k_exemplars = 3;
    std::string corpus_digest;
    std::string created_at;
};

/// One (instruction, identity) demonstration pair for identity synthesis.
struct ExemplarPair {
    std::string instruction;
    std::string identity;
};

// JSON conversions. Field order is fixed and documented in the README; the
// writers below emit fields in exactly this order.
ordered_json to_json(const Instruction& v);
ordered_json to_json(const ExpertIdentity& v);
ordered_json to_json(const AnswerRecord& v);
ordered_json to_json(const JudgeRecord& v);
ordered_json to_json(const JudgeFailure& v);
ordered_json to_json(const RunManifest& v);
ordered_json to_json(const ExemplarPair& v);

void from_json(const ordered_json& j, Instruction& v);
void from_json(const ordered_json& j, ExpertIdentity& v);
void from_json(const ordered_json& j, AnswerRecord& v);
void from_json(const ordered_json& j, JudgeRecord& v);
void from_json(const ordered_json& j, JudgeFailure& v);
void from_json(const ordered_json& j, RunManifest& v);
void from_json(const ordered_json& j, ExemplarPair& v);

/// Current UTC time as ISO-8601 with second precision.
std::string now_iso8601();

/// Trim ASCII and Unicode whitespace from both ends of UTF-8 text.
std::string trim(std::string_view text);

}  // namespace expertprompt
