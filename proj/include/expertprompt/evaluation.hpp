#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "expertprompt/backend.hpp"
#include "expertprompt/batch_runner.hpp"
#include "expertprompt/templates.hpp"
#include "expertprompt/types.hpp"

namespace expertprompt {

/// Uniform sample of n instructions without replacement, deterministic for a
/// given seed, returned in original corpus order. n > corpus size is an error.
std::vector<Instruction> sample_instances(const std::vector<Instruction>& corpus, size_t n,
                                          uint64_t seed);

/// Presentation-order coin for one judging task, derived from the seed and
/// instruction id so it is stable across runs and platforms.
bool swap_bit(uint64_t seed, const std::string& instruction_id);

enum class SwapMode {
    seeded,       /// per-task coin from swap_bit
    force_true,   /// always present answers in (b, a) order
    force_false,  /// always present answers in (a, b) order
};

struct AnswerSide {
    std::string model;
    std::string text;
};

struct PairwiseTask {
    Instruction instruction;
    AnswerSide a;
    AnswerSide b;
    bool swapped = false;
};

/// Builds one task per sampled instruction. Both answer maps must cover the
/// sample and every answer text must be non-empty.
std::vector<PairwiseTask> build_pairwise_tasks(
    const std::vector<Instruction>& sample,
    const std::unordered_map<std::string, AnswerRecord>& answers_a,
    const std::unordered_map<std::string, AnswerRecord>& answers_b, const std::string& label_a,
    const std::string& label_b, SwapMode swap_mode, uint64_t seed);

class JudgmentParseError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct ParsedScores {
    double first = 0.0;
    double second = 0.0;
};

/// Extracts the two scores from a judge reply. Primary rule: the first line
/// holds exactly two numbers separated by whitespace or commas; both must lie
/// in [1, 10] or the reply is rejected. Fallback: the first two standalone
/// numbers in [1, 10] anywhere in the text. Throws JudgmentParseError when no
/// rule yields two scores.
ParsedScores parse_judgment(const std::string& raw);

struct JudgeParams {
    std::string model = "gpt-4";
    double temperature = 0.2;
    int max_output_tokens = 1024;
};

struct JudgeOutcome {
    bool ok = false;
    JudgeRecord record;
    JudgeFailure failure;
};

/// Runs one pairwise judgment: renders the prompt in presentation order
/// (swapped => b first), parses the reply, and un-swaps the scores back into
/// canonical (a, b) orientation. Unparseable replies become failure entries.
JudgeOutcome judge_pair(const PairwiseTask& task, const TemplateStore& store,
                        ChatBackend& backend, const JudgeParams& params,
                        CompletionResponse* response_out = nullptr);

struct AggregateReport {
    size_t n_judged = 0;
    size_t wins = 0;
    size_t ties = 0;
    size_t losses = 0;
    double sum_score_a = 0.0;
    double sum_score_b = 0.0;
    double relative_score_pct = 0.0;
    size_t parse_failures = 0;
};

/// Win/tie/loss counts from A's perspective plus the score-sum ratio:
/// win iff score_a - score_b > tie_epsilon, loss iff score_b - score_a >
/// tie_epsilon, tie otherwise; relative = 100 * sum_a / sum_b.
AggregateReport aggregate(const std::vector<JudgeRecord>& records, double tie_epsilon = 0.0,
                          size_t parse_failures = 0);

struct PreferenceBreakdown {
    double pct_a = 0.0;
    double pct_tie = 0.0;
    double pct_b = 0.0;
};

PreferenceBreakdown preference_breakdown(const std::vector<JudgeRecord>& records,
                                         double tie_epsilon = 0.0);

struct JudgingContext {
    const TemplateStore* templates = nullptr;
    ChatBackend* backend = nullptr;
    JudgeParams params;
    ExecMode mode = ExecMode::serial;
    int num_threads = 4;
    std::string corpus_digest;
};

/// Batch judging with resume; the judgments file carries both parsed records
/// (status "ok") and parse failures (status "parse_failure").
BatchSummary run_judging(const std::vector<PairwiseTask>& tasks, const JudgingContext& ctx,
                         const std::string& output_path);

/// Splits a judgments file into parsed records and parse failures.
std::pair<std::vector<JudgeRecord>, std::vector<JudgeFailure>> load_judgments(
    const std::string& path);

/// Throws ParseFailureCapError when failures exceed `cap` of all attempts.
void enforce_parse_failure_cap(size_t n_judged, size_t parse_failures, double cap = 0.10);

struct JudgeReportData {
    std::string label_a;
    std::string label_b;
    std::string judge_model;
    uint64_t seed = 0;
    size_t n_sampled = 0;
    AggregateReport agg;
    PreferenceBreakdown pref;
    double avg_words_a = 0.0;
    double avg_words_b = 0.0;
};

nlohmann::ordered_json render_report_json(const JudgeReportData& data);
std::string render_report_text(const JudgeReportData& data);

}  // namespace expertprompt
