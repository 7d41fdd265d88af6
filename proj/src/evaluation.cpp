#include "expertprompt/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <sstream>

#include "expertprompt/errors.hpp"
#include "expertprompt/hash.hpp"
#include "expertprompt/jsonl.hpp"
#include "expertprompt/rng.hpp"
#include "expertprompt/word_stats.hpp"

namespace expertprompt {

using nlohmann::ordered_json;

std::vector<Instruction> sample_instances(const std::vector<Instruction>& corpus, size_t n,
                                          uint64_t seed) {
    if (n > corpus.size()) {
        std::ostringstream msg;
        msg << "sample size " << n << " exceeds corpus size " << corpus.size();
        throw ValidationError(msg.str());
    }
    std::vector<size_t> indices(corpus.size());
    std::iota(indices.begin(), indices.end(), size_t{0});
    SeededRng rng(seed);
    for (size_t i = 0; i < n; ++i) {
        size_t j = i + static_cast<size_t>(rng.bounded(indices.size() - i));
        std::swap(indices[i], indices[j]);
    }
    indices.resize(n);
    std::sort(indices.begin(), indices.end());
    std::vector<Instruction> sample;
    sample.reserve(n);
    for (size_t index : indices) {
        sample.push_back(corpus[index]);
    }
    return sample;
}

bool swap_bit(uint64_t seed, const std::string& instruction_id) {
    return (content_hash_u64("swap|" + std::to_string(seed) + "|" + instruction_id) & 1u) != 0;
}

std::vector<PairwiseTask> build_pairwise_tasks(
    const std::vector<Instruction>& sample,
    const std::unordered_map<std::string, AnswerRecord>& answers_a,
    const std::unordered_map<std::string, AnswerRecord>& answers_b, const std::string& label_a,
    const std::string& label_b, SwapMode swap_mode, uint64_t seed) {
    std::vector<std::string> missing_a;
    std::vector<std::string> missing_b;
    std::vector<std::string> empty_answers;
    std::vector<PairwiseTask> tasks;
    tasks.reserve(sample.size());
    for (const auto& instruction : sample) {
        auto it_a = answers_a.find(instruction.id);
        auto it_b = answers_b.find(instruction.id);
        if (it_a == answers_a.end()) {
            missing_a.push_back(instruction.id);
            continue;
        }
        if (it_b == answers_b.end()) {
            missing_b.push_back(instruction.id);
            continue;
        }
        if (trim(it_a->second.clean_text).empty() || trim(it_b->second.clean_text).empty()) {
            empty_answers.push_back(instruction.id);
            continue;
        }
        PairwiseTask task;
        task.instruction = instruction;
        task.a = AnswerSide{label_a, it_a->second.clean_text};
        task.b = AnswerSide{label_b, it_b->second.clean_text};
        switch (swap_mode) {
            case SwapMode::seeded:
                task.swapped = swap_bit(seed, instruction.id);
                break;
            case SwapMode::force_true:
                task.swapped = true;
                break;
            case SwapMode::force_false:
                task.swapped = false;
                break;
        }
        tasks.push_back(std::move(task));
    }
    auto describe = [](const char* what, const std::vector<std::string>& ids) {
        std::ostringstream msg;
        msg << what << " for " << ids.size() << " sampled instruction id(s):";
        size_t shown = std::min<size_t>(ids.size(), 8);
        for (size_t i = 0; i < shown; ++i) {
            msg << ' ' << ids[i];
        }
        if (ids.size() > shown) {
            msg << " ...";
        }
        return msg.str();
    };
    if (!missing_a.empty()) {
        throw ValidationError(describe("first answers file has no record", missing_a));
    }
    if (!missing_b.empty()) {
        throw ValidationError(describe("second answers file has no record", missing_b));
    }
    if (!empty_answers.empty()) {
        throw ValidationError(describe("empty answer text", empty_answers));
    }
    return tasks;
}

namespace {

std::string first_line(const std::string& raw) {
    size_t end = raw.find('\n');
    std::string line = end == std::string::npos ? raw : raw.substr(0, end);
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    return line;
}

bool parse_number_token(const std::string& token, double& out) {
    if (token.empty()) {
        return false;
    }
    const char* begin = token.c_str();
    char* end = nullptr;
    double value = std::strtod(begin, &end);
    if (end != begin + token.size() || !std::isfinite(value)) {
        return false;
    }
    out = value;
    return true;
}

bool is_digit(char c) {
    return std::isdigit(static_cast<unsigned char>(c)) != 0;
}

bool is_word_byte(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

/// First `need` numbers in [lo, hi] that stand alone in the text: a digit run
/// with optional decimal tails, not glued to a word, a dot, or a minus sign.
std::vector<double> standalone_numbers(const std::string& raw, double lo, double hi,
                                       size_t need) {
    std::vector<double> found;
    size_t i = 0;
    const size_t n = raw.size();
    while (i < n && found.size() < need) {
        if (!is_digit(raw[i])) {
            ++i;
            continue;
        }
        const size_t start = i;
        size_t j = i;
        while (j < n && is_digit(raw[j])) {
            ++j;
        }
        while (j + 1 < n && raw[j] == '.' && is_digit(raw[j + 1])) {
            ++j;
            while (j < n && is_digit(raw[j])) {
                ++j;
            }
        }
        bool standalone = true;
        if (start > 0) {
            char prev = raw[start - 1];
            if (is_word_byte(prev) || prev == '.' || prev == '-') {
                standalone = false;
            }
        }
        if (j < n && is_word_byte(raw[j])) {
            standalone = false;
        }
        if (standalone) {
            double value = 0.0;
            if (parse_number_token(raw.substr(start, j - start), value) && value >= lo &&
                value <= hi) {
                found.push_back(value);
            }
        }
        i = j;
    }
    return found;
}

}  // namespace

ParsedScores parse_judgment(const std::string& raw) {
    const std::string line = first_line(raw);
    std::vector<std::string> tokens;
    std::string current;
    for (char c : line) {
        if (std::isspace(static_cast<unsigned char>(c)) != 0 || c == ',') {
            if (!current.empty()) {
                tokens.push_back(current);
                current.clear();
            }
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) {
        tokens.push_back(current);
    }
    if (tokens.size() == 2) {
        double first = 0.0;
        double second = 0.0;
        if (parse_number_token(tokens[0], first) && parse_number_token(tokens[1], second)) {
            if (first < 1.0 || first > 10.0 || second < 1.0 || second > 10.0) {
                throw JudgmentParseError("score outside [1,10] on first line: " + line);
            }
            return ParsedScores{first, second};
        }
    }
    std::vector<double> numbers = standalone_numbers(raw, 1.0, 10.0, 2);
    if (numbers.size() < 2) {
        throw JudgmentParseError("could not find two scores in judgment");
    }
    return ParsedScores{numbers[0], numbers[1]};
}

JudgeOutcome judge_pair(const PairwiseTask& task, const TemplateStore& store,
                        ChatBackend& backend, const JudgeParams& params,
                        CompletionResponse* response_out) {
    const std::string& first_text = task.swapped ? task.b.text : task.a.text;
    const std::string& second_text = task.swapped ? task.a.text : task.b.text;
    RenderedPrompt prompt = render_judge_prompt(store, task.instruction, first_text, second_text);

    CompletionRequest request;
    request.prompt = prompt;
    request.model = params.model;
    request.temperature = params.temperature;
    request.max_output_tokens = params.max_output_tokens;
    request.request_tag = "judge:" + task.instruction.id;
    CompletionResponse response = backend.complete(request);
    if (response.finish_reason == FinishReason::error) {
        throw BackendExhaustedError(response.error.empty() ? "backend returned an error"
                                                           : response.error);
    }
    if (response_out != nullptr) {
        *response_out = response;
    }

    JudgeOutcome outcome;
    try {
        ParsedScores scores = parse_judgment(response.text);
        JudgeRecord record;
        record.instruction_id = task.instruction.id;
        record.model_a = task.a.model;
        record.model_b = task.b.model;
        record.swapped = task.swapped;
        record.score_a = task.swapped ? scores.second : scores.first;
        record.score_b = task.swapped ? scores.first : scores.second;
        record.judge_model = response.model;
        record.raw_judgment = response.text;
        outcome.ok = true;
        outcome.record = std::move(record);
    } catch (const JudgmentParseError& e) {
        outcome.failure =
            JudgeFailure{task.instruction.id, e.what(), response.text};
    }
    return outcome;
}

AggregateReport aggregate(const std::vector<JudgeRecord>& records, double tie_epsilon,
                          size_t parse_failures) {
    if (records.empty()) {
        throw ValidationError("cannot aggregate an empty judgment list");
    }
    const std::string& model_a = records.front().model_a;
    const std::string& model_b = records.front().model_b;
    AggregateReport report;
    report.n_judged = records.size();
    report.parse_failures = parse_failures;
    for (const auto& record : records) {
        if (record.model_a != model_a || record.model_b != model_b) {
            throw ValidationError("judgments mix model pairs: (" + model_a + ", " + model_b +
                                  ") vs (" + record.model_a + ", " + record.model_b + ")");
        }
        if (record.score_a - record.score_b > tie_epsilon) {
            ++report.wins;
        } else if (record.score_b - record.score_a > tie_epsilon) {
            ++report.losses;
        } else {
            ++report.ties;
        }
        report.sum_score_a += record.score_a;
        report.sum_score_b += record.score_b;
    }
    if (report.sum_score_b == 0.0) {
        throw ValidationError("relative score undefined: second-side scores sum to zero");
    }
    report.relative_score_pct = 100.0 * report.sum_score_a / report.sum_score_b;
    return report;
}

PreferenceBreakdown preference_breakdown(const std::vector<JudgeRecord>& records,
                                         double tie_epsilon) {
    AggregateReport report = aggregate(records, tie_epsilon);
    PreferenceBreakdown breakdown;
    const double n = static_cast<double>(report.n_judged);
    breakdown.pct_a = 100.0 * static_cast<double>(report.wins) / n;
    breakdown.pct_tie = 100.0 * static_cast<double>(report.ties) / n;
    breakdown.pct_b = 100.0 * static_cast<double>(report.losses) / n;
    return breakdown;
}

BatchSummary run_judging(const std::vector<PairwiseTask>& tasks, const JudgingContext& ctx,
                         const std::string& output_path) {
    if (ctx.templates == nullptr || ctx.backend == nullptr) {
        throw ConfigError("judging context is missing templates or backend");
    }
    std::unordered_map<std::string, size_t> index;
    std::vector<std::string> ids;
    ids.reserve(tasks.size());
    for (size_t i = 0; i < tasks.size(); ++i) {
        ids.push_back(tasks[i].instruction.id);
        index[tasks[i].instruction.id] = i;
    }

    BatchItemFn item_fn = [&](const std::string& id) -> BatchItemResult {
        const PairwiseTask& task = tasks[index.at(id)];
        BatchItemResult result;
        try {
            CompletionResponse response;
            JudgeOutcome outcome =
                judge_pair(task, *ctx.templates, *ctx.backend, ctx.params, &response);
            result.record = outcome.ok ? to_json(outcome.record) : to_json(outcome.failure);
            result.from_cache = response.from_cache;
        } catch (const BackendExhaustedError& e) {
            result.error = e.what();
        } catch (const ProtocolError& e) {
            result.error = e.what();
        }
        return result;
    };

    BatchOptions options;
    options.output_path = output_path;
    options.corpus_digest = ctx.corpus_digest;
    options.mode = ctx.mode;
    options.num_threads = ctx.num_threads;
    return run_batch(ids, item_fn, options);
}

std::pair<std::vector<JudgeRecord>, std::vector<JudgeFailure>> load_judgments(
    const std::string& path) {
    std::vector<JudgeRecord> records;
    std::vector<JudgeFailure> failures;
    size_t line_no = 0;
    for (const auto& entry : read_jsonl(path)) {
        ++line_no;
        std::string status = entry.value("status", std::string());
        if (status == "ok") {
            JudgeRecord record;
            from_json(entry, record);
            records.push_back(std::move(record));
        } else if (status == "parse_failure") {
            JudgeFailure failure;
            from_json(entry, failure);
            failures.push_back(std::move(failure));
        } else {
            throw RecordParseError(path, line_no,
                                   "judgment record has unknown status: '" + status + "'");
        }
    }
    return {std::move(records), std::move(failures)};
}

void enforce_parse_failure_cap(size_t n_judged, size_t parse_failures, double cap) {
    const size_t attempted = n_judged + parse_failures;
    if (attempted == 0) {
        return;
    }
    const double fraction =
        static_cast<double>(parse_failures) / static_cast<double>(attempted);
    if (fraction > cap) {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "judge parse failures exceed the cap: %zu of %zu (%.1f%% > %.0f%%)",
                      parse_failures, attempted, 100.0 * fraction, 100.0 * cap);
        throw ParseFailureCapError(buf);
    }
}

nlohmann::ordered_json render_report_json(const JudgeReportData& data) {
    ordered_json j;
    j["model_a"] = data.label_a;
    j["model_b"] = data.label_b;
    j["judge_model"] = data.judge_model;
    j["seed"] = data.seed;
    j["n_sampled"] = data.n_sampled;
    j["n_judged"] = data.agg.n_judged;
    j["parse_failures"] = data.agg.parse_failures;
    j["wins"] = data.agg.wins;
    j["ties"] = data.agg.ties;
    j["losses"] = data.agg.losses;
    j["pct_a_better"] = data.pref.pct_a;
    j["pct_tie"] = data.pref.pct_tie;
    j["pct_b_better"] = data.pref.pct_b;
    j["sum_score_a"] = data.agg.sum_score_a;
    j["sum_score_b"] = data.agg.sum_score_b;
    j["relative_score_pct"] = data.agg.relative_score_pct;
    j["avg_words_a"] = data.avg_words_a;
    j["avg_words_b"] = data.avg_words_b;
    return j;
}

std::string render_report_text(const JudgeReportData& data) {
    std::ostringstream out;
    char line[256];
    out << "Pairwise judgment: " << data.label_a << " vs " << data.label_b << "\n";
    out << "Judge model: " << data.judge_model << "  seed: " << data.seed << "\n";
    std::snprintf(line, sizeof(line), "Sampled: %zu  judged: %zu  parse failures: %zu\n",
                  data.n_sampled, data.agg.n_judged, data.agg.parse_failures);
    out << line << "\n";
    out << "Preference (share of judged pairs)\n";
    std::snprintf(line, sizeof(line), "  %-16s %6.1f%%  (%zu)\n",
                  (data.label_a + " better").c_str(), data.pref.pct_a, data.agg.wins);
    out << line;
    std::snprintf(line, sizeof(line), "  %-16s %6.1f%%  (%zu)\n", "tie", data.pref.pct_tie,
                  data.agg.ties);
    out << line;
    std::snprintf(line, sizeof(line), "  %-16s %6.1f%%  (%zu)\n",
                  (data.label_b + " better").c_str(), data.pref.pct_b, data.agg.losses);
    out << line << "\n";
    std::snprintf(line, sizeof(line), "Score sums: %s %.1f vs %s %.1f\n", data.label_a.c_str(),
                  data.agg.sum_score_a, data.label_b.c_str(), data.agg.sum_score_b);
    out << line;
    std::snprintf(line, sizeof(line), "Relative score: %.1f%% (%s = 100%%)\n",
                  data.agg.relative_score_pct, data.label_b.c_str());
    out << line << "\n";
    std::snprintf(line, sizeof(line), "Average words: %s %s, %s %s\n", data.label_a.c_str(),
                  format_avg(data.avg_words_a).c_str(), data.label_b.c_str(),
                  format_avg(data.avg_words_b).c_str());
    out << line;
    return out.str();
}

}  // namespace expertprompt
