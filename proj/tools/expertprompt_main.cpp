#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "expertprompt/backend.hpp"
#include "expertprompt/cached_backend.hpp"
#include "expertprompt/corpus.hpp"
#include "expertprompt/errors.hpp"
#include "expertprompt/evaluation.hpp"
#include "expertprompt/jsonl.hpp"
#include "expertprompt/pipeline.hpp"
#include "expertprompt/templates.hpp"
#include "expertprompt/word_stats.hpp"

namespace fs = std::filesystem;
using namespace expertprompt;

namespace {

struct CommonOpts {
    std::string corpus_path;
    std::string out_dir = "out";
    std::string templates_dir;
    std::string cache_dir;
    std::string backend_name = "mock";
    std::string endpoint = "https://api.openai.com/v1";
    std::string auth_env = "OPENAI_API_KEY";
    std::string model = "gpt-3.5-turbo";
    double temperature = 0.7;
    int max_tokens = 1024;
    uint64_t seed = 42;
    std::string exec = "serial";
    int threads = 4;
    int max_concurrency = 4;
    int retry_max = 3;
    int retry_base_delay_ms = 500;
    int requests_per_minute = 600;
    int request_timeout_ms = 60000;
    bool dry_run = false;
};

void add_output_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--out-dir", o.out_dir, "Directory for outputs and the run manifest")
        ->capture_default_str();
    cmd->add_option("--templates", o.templates_dir,
                    "Directory with <name>.txt prompt template overrides");
    cmd->add_option("--seed", o.seed, "Run seed recorded in the manifest")->capture_default_str();
    cmd->add_flag("--dry-run", o.dry_run,
                  "Render all prompts and write the manifest without backend calls");
}

void add_backend_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--backend", o.backend_name, "Backend: mock, mock-blind or http")
        ->capture_default_str();
    cmd->add_option("--endpoint", o.endpoint, "Chat-completion API base URL (http backend)")
        ->capture_default_str();
    cmd->add_option("--auth-env", o.auth_env, "Environment variable holding the API key")
        ->capture_default_str();
    cmd->add_option("--model", o.model, "Model requested for completions")
        ->capture_default_str();
    cmd->add_option("--temperature", o.temperature, "Sampling temperature")
        ->capture_default_str();
    cmd->add_option("--max-tokens", o.max_tokens, "Completion token budget")
        ->capture_default_str();
    cmd->add_option("--cache-dir", o.cache_dir,
                    "Completion cache directory (enables caching when set)");
    cmd->add_option("--exec", o.exec, "Batch execution mode: serial or parallel")
        ->capture_default_str();
    cmd->add_option("--threads", o.threads, "Worker threads for --exec parallel")
        ->capture_default_str();
    cmd->add_option("--max-concurrency", o.max_concurrency,
                    "Upper bound on in-flight backend requests")
        ->capture_default_str();
    cmd->add_option("--retry-max", o.retry_max, "Retries per request on transient failures")
        ->capture_default_str();
    cmd->add_option("--retry-base-delay-ms", o.retry_base_delay_ms,
                    "First backoff delay; doubles per retry")
        ->capture_default_str();
    cmd->add_option("--requests-per-minute", o.requests_per_minute, "Client-side rate limit")
        ->capture_default_str();
    cmd->add_option("--request-timeout-ms", o.request_timeout_ms, "Per-request network timeout")
        ->capture_default_str();
}

BackendConfig to_backend_config(const CommonOpts& o) {
    BackendConfig config;
    config.kind = backend_kind_from_string(o.backend_name);
    config.endpoint = o.endpoint;
    config.auth_env_var = o.auth_env;
    config.max_concurrency = o.max_concurrency;
    config.retry_max = o.retry_max;
    config.retry_base_delay_ms = o.retry_base_delay_ms;
    config.requests_per_minute = o.requests_per_minute;
    config.request_timeout_ms = o.request_timeout_ms;
    config.validate();
    return config;
}

/// Matches ChatBackend::descriptor() without constructing a backend, for
/// dry-run manifests.
std::string describe_backend(const BackendConfig& config) {
    if (config.kind != BackendKind::http_chat) {
        return to_string(config.kind);
    }
    std::string d = "http_chat " + config.endpoint;
    d += " retries=" + std::to_string(config.retry_max);
    d += " rpm=" + std::to_string(config.requests_per_minute);
    d += " concurrency=" + std::to_string(config.max_concurrency);
    return d;
}

std::unique_ptr<ChatBackend> build_backend(const CommonOpts& o) {
    BackendConfig config = to_backend_config(o);
    std::unique_ptr<ChatBackend> backend = make_backend(config);
    if (!o.cache_dir.empty()) {
        backend = std::make_unique<CachedBackend>(std::move(backend), config.kind, o.cache_dir);
    }
    return backend;
}

TemplateStore load_templates(const CommonOpts& o) {
    return o.templates_dir.empty() ? TemplateStore::defaults()
                                   : TemplateStore::load(o.templates_dir);
}

GenerationParams to_generation_params(const CommonOpts& o) {
    GenerationParams params;
    params.model = o.model;
    params.temperature = o.temperature;
    params.max_output_tokens = o.max_tokens;
    return params;
}

void write_manifest(const CommonOpts& o, const TemplateStore& store,
                    const std::string& backend_descriptor, const std::string& corpus_dig,
                    int k_exemplars) {
    RunManifest manifest;
    manifest.seed = o.seed;
    manifest.template_hashes = store.digests();
    manifest.backend_descriptor = backend_descriptor;
    manifest.k_exemplars = k_exemplars;
    manifest.corpus_digest = corpus_dig;
    manifest.created_at = now_iso8601();
    write_json_file(to_json(manifest), fs::path(o.out_dir) / "manifest.json");
}

void print_summary(const char* what, const BatchSummary& s, const ChatBackend* backend) {
    std::printf("%s: %zu total, %zu completed, %zu skipped, %zu failed, %zu cached\n", what,
                s.total, s.completed, s.skipped, s.failed, s.cached);
    if (backend != nullptr) {
        std::printf("backend calls: %llu\n",
                    static_cast<unsigned long long>(backend->calls()));
    }
}

ExecMode exec_mode(const CommonOpts& o) { return exec_mode_from_string(o.exec); }

std::vector<ExemplarPair> load_exemplars(const std::string& path, int k) {
    if (k < 1) {
        throw ConfigError("k must be at least 1");
    }
    std::vector<ExemplarPair> exemplars =
        path.empty() ? default_exemplars() : read_exemplars(path);
    if (exemplars.size() < static_cast<size_t>(k)) {
        throw ConfigError("need " + std::to_string(k) + " exemplars, file has " +
                          std::to_string(exemplars.size()));
    }
    exemplars.resize(static_cast<size_t>(k));
    return exemplars;
}

// ---------------------------------------------------------------------------
// synthesize

struct SynthesizeOpts {
    CommonOpts common;
    std::string exemplars_path;
    int k = 3;
    std::string output;
};

int do_synthesize(const SynthesizeOpts& opts) {
    const CommonOpts& o = opts.common;
    fs::create_directories(o.out_dir);
    TemplateStore store = load_templates(o);
    auto corpus = read_instruction_corpus(o.corpus_path);
    auto exemplars = load_exemplars(opts.exemplars_path, opts.k);
    const std::string digest = corpus_digest(o.corpus_path);
    const std::string output =
        opts.output.empty() ? (fs::path(o.out_dir) / "identities.jsonl").string() : opts.output;

    if (o.dry_run) {
        for (const auto& instruction : corpus) {
            render_identity_prompt(store, exemplars, instruction);
        }
        write_manifest(o, store, describe_backend(to_backend_config(o)), digest, opts.k);
        std::printf("dry run: rendered %zu identity prompts, no backend calls\n", corpus.size());
        return kExitOk;
    }

    auto backend = build_backend(o);
    PipelineContext ctx;
    ctx.templates = &store;
    ctx.backend = backend.get();
    ctx.params = to_generation_params(o);
    ctx.mode = exec_mode(o);
    ctx.num_threads = o.threads;
    ctx.corpus_digest = digest;

    BatchSummary summary = synthesize_identities(corpus, exemplars, ctx, output);
    write_manifest(o, store, backend->descriptor(), digest, opts.k);
    print_summary("identities", summary, backend.get());
    if (summary.failed > 0) {
        std::fprintf(stderr, "error: %zu instruction(s) still failing after retry; see %s\n",
                     summary.failed, (output + ".failures.jsonl").c_str());
        return kExitBackendExhausted;
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// generate

struct GenerateOpts {
    CommonOpts common;
    std::string strategy = "vanilla";
    std::string identities_path;
    std::string output;
};

int do_generate(const GenerateOpts& opts) {
    const CommonOpts& o = opts.common;
    fs::create_directories(o.out_dir);
    TemplateStore store = load_templates(o);
    Strategy strategy = strategy_from_string(opts.strategy);
    auto corpus = read_instruction_corpus(o.corpus_path);
    const std::string digest = corpus_digest(o.corpus_path);
    const std::string output =
        opts.output.empty()
            ? (fs::path(o.out_dir) / ("answers_" + to_string(strategy) + ".jsonl")).string()
            : opts.output;

    std::unordered_map<std::string, ExpertIdentity> identities;
    const std::unordered_map<std::string, ExpertIdentity>* identities_ptr = nullptr;
    if (strategy == Strategy::expert) {
        std::string path = opts.identities_path.empty()
                               ? (fs::path(o.out_dir) / "identities.jsonl").string()
                               : opts.identities_path;
        if (!fs::exists(path)) {
            throw ConfigError("expert generation needs an identities file; " + path +
                              " does not exist (run synthesize first or pass --identities)");
        }
        identities = read_identities(path);
        identities_ptr = &identities;
    }

    if (o.dry_run) {
        for (const auto& instruction : corpus) {
            switch (strategy) {
                case Strategy::expert: {
                    auto it = identities.find(instruction.id);
                    if (it == identities.end()) {
                        throw ValidationError("identities file is missing instruction id " +
                                              instruction.id);
                    }
                    render_expert_prompt(store, it->second, instruction);
                    break;
                }
                case Strategy::vanilla:
                    render_vanilla_prompt(store, instruction);
                    break;
                case Strategy::static_desc:
                    render_static_prompt(store, instruction);
                    break;
            }
        }
        write_manifest(o, store, describe_backend(to_backend_config(o)), digest, 0);
        std::printf("dry run: rendered %zu %s prompts, no backend calls\n", corpus.size(),
                    to_string(strategy).c_str());
        return kExitOk;
    }

    auto backend = build_backend(o);
    PipelineContext ctx;
    ctx.templates = &store;
    ctx.backend = backend.get();
    ctx.params = to_generation_params(o);
    ctx.mode = exec_mode(o);
    ctx.num_threads = o.threads;
    ctx.corpus_digest = digest;

    BatchSummary summary = generate_answers(corpus, strategy, identities_ptr, ctx, output);
    write_manifest(o, store, backend->descriptor(), digest, 0);
    print_summary("answers", summary, backend.get());
    if (summary.failed > 0) {
        std::fprintf(stderr, "error: %zu instruction(s) still failing after retry; see %s\n",
                     summary.failed, (output + ".failures.jsonl").c_str());
        return kExitBackendExhausted;
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// judge

struct JudgeOpts {
    CommonOpts common;
    std::string answers_a;
    std::string answers_b;
    std::string label_a;
    std::string label_b;
    size_t sample_n = 0;  // 0 = whole corpus
    double tie_epsilon = 0.0;
    std::string judge_model = "gpt-4";
    std::string swap_mode = "seeded";
    std::string judgments_output;
    std::string report_base;
};

SwapMode swap_mode_from_string(const std::string& name) {
    if (name == "seeded") {
        return SwapMode::seeded;
    }
    if (name == "always") {
        return SwapMode::force_true;
    }
    if (name == "never") {
        return SwapMode::force_false;
    }
    throw ConfigError("unknown swap mode: " + name + " (expected seeded, always or never)");
}

int do_judge(const JudgeOpts& opts) {
    const CommonOpts& o = opts.common;
    fs::create_directories(o.out_dir);
    TemplateStore store = load_templates(o);
    auto corpus = read_instruction_corpus(o.corpus_path);
    const std::string digest = corpus_digest(o.corpus_path);

    auto records_a = read_records<AnswerRecord>(opts.answers_a);
    auto records_b = read_records<AnswerRecord>(opts.answers_b);
    if (records_a.empty()) {
        throw ValidationError("answers file is empty: " + opts.answers_a);
    }
    if (records_b.empty()) {
        throw ValidationError("answers file is empty: " + opts.answers_b);
    }
    std::string label_a =
        opts.label_a.empty() ? to_string(records_a.front().strategy) : opts.label_a;
    std::string label_b =
        opts.label_b.empty() ? to_string(records_b.front().strategy) : opts.label_b;
    if (label_a == label_b) {
        label_a += "-a";
        label_b += "-b";
    }

    auto to_map = [](std::vector<AnswerRecord>& records, const std::string& path) {
        std::unordered_map<std::string, AnswerRecord> map;
        map.reserve(records.size());
        for (auto& record : records) {
            const std::string id = record.instruction_id;
            if (!map.emplace(id, std::move(record)).second) {
                throw ValidationError("duplicate instruction id in " + path + ": " + id);
            }
        }
        return map;
    };
    auto map_a = to_map(records_a, opts.answers_a);
    auto map_b = to_map(records_b, opts.answers_b);

    const size_t n = opts.sample_n == 0 ? corpus.size() : opts.sample_n;
    auto sample = sample_instances(corpus, n, o.seed);
    auto tasks = build_pairwise_tasks(sample, map_a, map_b, label_a, label_b,
                                      swap_mode_from_string(opts.swap_mode), o.seed);

    const std::string judgments_path =
        opts.judgments_output.empty() ? (fs::path(o.out_dir) / "judgments.jsonl").string()
                                      : opts.judgments_output;
    const std::string report_base =
        opts.report_base.empty() ? (fs::path(o.out_dir) / "report").string() : opts.report_base;

    if (o.dry_run) {
        for (const auto& task : tasks) {
            const std::string& first_text = task.swapped ? task.b.text : task.a.text;
            const std::string& second_text = task.swapped ? task.a.text : task.b.text;
            render_judge_prompt(store, task.instruction, first_text, second_text);
        }
        write_manifest(o, store, describe_backend(to_backend_config(o)), digest, 0);
        std::printf("dry run: rendered %zu judge prompts, no backend calls\n", tasks.size());
        return kExitOk;
    }

    auto backend = build_backend(o);
    JudgingContext ctx;
    ctx.templates = &store;
    ctx.backend = backend.get();
    ctx.params.model = opts.judge_model;
    ctx.params.temperature = 0.2;
    ctx.params.max_output_tokens = o.max_tokens;
    ctx.mode = exec_mode(o);
    ctx.num_threads = o.threads;
    ctx.corpus_digest = digest;

    BatchSummary summary = run_judging(tasks, ctx, judgments_path);
    write_manifest(o, store, backend->descriptor(), digest, 0);
    print_summary("judgments", summary, backend.get());

    auto [records, failures] = load_judgments(judgments_path);
    if (!records.empty()) {
        JudgeReportData data;
        data.label_a = label_a;
        data.label_b = label_b;
        data.judge_model = opts.judge_model;
        data.seed = o.seed;
        data.n_sampled = sample.size();
        data.agg = aggregate(records, opts.tie_epsilon, failures.size());
        data.pref = preference_breakdown(records, opts.tie_epsilon);
        std::vector<std::string> texts_a;
        std::vector<std::string> texts_b;
        texts_a.reserve(tasks.size());
        texts_b.reserve(tasks.size());
        for (const auto& task : tasks) {
            texts_a.push_back(task.a.text);
            texts_b.push_back(task.b.text);
        }
        data.avg_words_a = avg_word_count(texts_a);
        data.avg_words_b = avg_word_count(texts_b);

        write_json_file(render_report_json(data), report_base + ".json");
        const std::string text = render_report_text(data);
        write_text_file(text, report_base + ".txt");
        std::fputs(text.c_str(), stdout);
    } else {
        std::fprintf(stderr, "warning: no parseable judgments; report not written\n");
    }

    enforce_parse_failure_cap(records.size(), failures.size());
    if (summary.failed > 0) {
        std::fprintf(stderr, "error: %zu judgment(s) still failing after retry; see %s\n",
                     summary.failed, (judgments_path + ".failures.jsonl").c_str());
        return kExitBackendExhausted;
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// stats

struct StatsOpts {
    CommonOpts common;
    std::vector<std::string> answer_files;
    std::string output;
};

std::string stats_table(const StatsOpts& opts, ExecMode mode) {
    std::string table = "strategy      answers   avg words  file\n";
    for (const auto& path : opts.answer_files) {
        auto records = read_records<AnswerRecord>(path);
        if (records.empty()) {
            throw ValidationError("answers file is empty: " + path);
        }
        std::vector<std::string> texts;
        texts.reserve(records.size());
        for (const auto& record : records) {
            texts.push_back(record.clean_text);
        }
        const double avg = avg_word_count(texts, mode);
        char line[512];
        std::snprintf(line, sizeof(line), "%-12s %8zu  %9s  %s\n",
                      to_string(records.front().strategy).c_str(), records.size(),
                      format_avg(avg).c_str(), path.c_str());
        table += line;
    }
    return table;
}

int do_stats(const StatsOpts& opts) {
    const std::string table = stats_table(opts, exec_mode(opts.common));
    std::fputs(table.c_str(), stdout);
    if (!opts.output.empty()) {
        fs::path out(opts.output);
        if (!out.parent_path().empty()) {
            fs::create_directories(out.parent_path());
        }
        write_text_file(table, out);
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// export-training

struct ExportOpts {
    CommonOpts common;
    std::string answers_path;
    std::string output;
};

int do_export_training(const ExportOpts& opts) {
    const CommonOpts& o = opts.common;
    fs::create_directories(o.out_dir);
    auto corpus = read_instruction_corpus(o.corpus_path);
    auto answers = read_answers(opts.answers_path);
    const std::string output =
        opts.output.empty() ? (fs::path(o.out_dir) / "training_data.json").string() : opts.output;

    ordered_json out = ordered_json::array();
    size_t excluded = 0;
    for (const auto& instruction : corpus) {
        auto it = answers.find(instruction.id);
        if (it == answers.end() || trim(it->second.clean_text).empty()) {
            ++excluded;
            continue;
        }
        ordered_json pair;
        pair["id"] = instruction.id;
        pair["instruction"] = instruction.instruction;
        pair["input"] = instruction.input.value_or("");
        pair["output"] = it->second.clean_text;
        out.push_back(std::move(pair));
    }
    write_json_file(out, output);
    std::printf("exported %zu training pairs to %s (%zu excluded)\n", out.size(), output.c_str(),
                excluded);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// reproduce-paper

struct ReproduceOpts {
    CommonOpts common;
    std::string exemplars_path;
    int k = 3;
    size_t sample_n = 500;
};

int do_reproduce(const ReproduceOpts& opts) {
    const CommonOpts& o = opts.common;
    fs::create_directories(o.out_dir);

    SynthesizeOpts synth;
    synth.common = o;
    synth.exemplars_path = opts.exemplars_path;
    synth.k = opts.k;
    int rc = do_synthesize(synth);
    if (rc != kExitOk || o.dry_run) {
        if (o.dry_run && rc == kExitOk) {
            std::printf("dry run: later stages need synthesized identities; stopping here\n");
        }
        return rc;
    }

    const char* strategies[] = {"vanilla", "expert", "static_desc"};
    for (const char* strategy : strategies) {
        GenerateOpts gen;
        gen.common = o;
        gen.strategy = strategy;
        rc = do_generate(gen);
        if (rc != kExitOk) {
            return rc;
        }
    }

    StatsOpts stats;
    stats.common = o;
    for (const char* strategy : strategies) {
        stats.answer_files.push_back(
            (fs::path(o.out_dir) / ("answers_" + std::string(strategy) + ".jsonl")).string());
    }
    stats.output = (fs::path(o.out_dir) / "stats.txt").string();
    rc = do_stats(stats);
    if (rc != kExitOk) {
        return rc;
    }

    JudgeOpts judge;
    judge.common = o;
    judge.answers_a = (fs::path(o.out_dir) / "answers_expert.jsonl").string();
    judge.answers_b = (fs::path(o.out_dir) / "answers_vanilla.jsonl").string();
    judge.sample_n = std::min(opts.sample_n, read_instruction_corpus(o.corpus_path).size());
    return do_judge(judge);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ExpertPrompting pipeline: identity synthesis, answer generation and "
                 "pairwise evaluation"};
    app.require_subcommand(1);
    app.set_config("--config", "",
                   "Read option defaults from a TOML/INI file with one section per subcommand, "
                   "e.g. [judge] seed=7 (explicit flags win)");

    SynthesizeOpts synth;
    CLI::App* synth_cmd =
        app.add_subcommand("synthesize", "Synthesize one expert identity per instruction");
    synth_cmd->add_option("--corpus", synth.common.corpus_path, "Instruction corpus file")
        ->required();
    synth_cmd->add_option("--exemplars", synth.exemplars_path,
                          "Exemplar pairs file (JSONL); built-in pairs when omitted");
    synth_cmd->add_option("--k", synth.k, "Number of exemplar pairs in the prompt")
        ->capture_default_str();
    synth_cmd->add_option("--output", synth.output, "Identities output file");
    add_output_flags(synth_cmd, synth.common);
    add_backend_flags(synth_cmd, synth.common);

    GenerateOpts gen;
    CLI::App* gen_cmd = app.add_subcommand("generate", "Generate answers under one strategy");
    gen_cmd->add_option("--corpus", gen.common.corpus_path, "Instruction corpus file")
        ->required();
    gen_cmd->add_option("--strategy", gen.strategy, "vanilla, expert or static")->required();
    gen_cmd->add_option("--identities", gen.identities_path,
                        "Identities file (expert strategy; defaults to <out-dir>/identities.jsonl)");
    gen_cmd->add_option("--output", gen.output, "Answers output file");
    add_output_flags(gen_cmd, gen.common);
    add_backend_flags(gen_cmd, gen.common);

    JudgeOpts judge;
    CLI::App* judge_cmd =
        app.add_subcommand("judge", "Pairwise-judge two answer files over a sampled corpus");
    judge_cmd->add_option("--corpus", judge.common.corpus_path, "Instruction corpus file")
        ->required();
    judge_cmd->add_option("--a", judge.answers_a, "First answers file (the 'A' side)")
        ->required();
    judge_cmd->add_option("--b", judge.answers_b, "Second answers file (the 'B' side)")
        ->required();
    judge_cmd->add_option("--label-a", judge.label_a, "Report label for side A");
    judge_cmd->add_option("--label-b", judge.label_b, "Report label for side B");
    judge_cmd->add_option("--sample", judge.sample_n,
                          "Judge a seeded sample of this size (0 = whole corpus)")
        ->capture_default_str();
    judge_cmd->add_option("--tie-epsilon", judge.tie_epsilon,
                          "Score margin treated as a tie")
        ->capture_default_str();
    judge_cmd->add_option("--judge-model", judge.judge_model, "Model used for judging")
        ->capture_default_str();
    judge_cmd
        ->add_option("--swap-order", judge.swap_mode,
                     "Answer presentation order: seeded, always or never")
        ->capture_default_str();
    judge_cmd->add_option("--judgments", judge.judgments_output, "Judgments output file");
    judge_cmd->add_option("--report", judge.report_base,
                          "Report base path (writes <base>.json and <base>.txt)");
    add_output_flags(judge_cmd, judge.common);
    add_backend_flags(judge_cmd, judge.common);

    StatsOpts stats;
    CLI::App* stats_cmd =
        app.add_subcommand("stats", "Average answer length per answers file");
    stats_cmd->add_option("files", stats.answer_files, "Answer files")->required();
    stats_cmd->add_option("--output", stats.output, "Also write the table to this file");
    stats_cmd->add_option("--exec", stats.common.exec, "serial or parallel")
        ->capture_default_str();

    ExportOpts expt;
    CLI::App* export_cmd = app.add_subcommand(
        "export-training", "Export (instruction, input, output) training pairs");
    export_cmd->add_option("--corpus", expt.common.corpus_path, "Instruction corpus file")
        ->required();
    export_cmd->add_option("--answers", expt.answers_path, "Answers file to export")
        ->required();
    export_cmd->add_option("--output", expt.output, "Training pairs output file");
    export_cmd->add_option("--out-dir", expt.common.out_dir, "Directory for outputs")
        ->capture_default_str();

    ReproduceOpts repro;
    CLI::App* repro_cmd = app.add_subcommand(
        "reproduce-paper",
        "synthesize, generate all three strategies, stats, judge expert vs vanilla");
    repro_cmd->add_option("--corpus", repro.common.corpus_path, "Instruction corpus file")
        ->required();
    repro_cmd->add_option("--exemplars", repro.exemplars_path,
                          "Exemplar pairs file (JSONL); built-in pairs when omitted");
    repro_cmd->add_option("--k", repro.k, "Number of exemplar pairs in the prompt")
        ->capture_default_str();
    repro_cmd->add_option("--sample", repro.sample_n,
                          "Judging sample size (capped at the corpus size)")
        ->capture_default_str();
    add_output_flags(repro_cmd, repro.common);
    add_backend_flags(repro_cmd, repro.common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e);  // --help / --version
        }
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (synth_cmd->parsed()) {
            return do_synthesize(synth);
        }
        if (gen_cmd->parsed()) {
            return do_generate(gen);
        }
        if (judge_cmd->parsed()) {
            return do_judge(judge);
        }
        if (stats_cmd->parsed()) {
            return do_stats(stats);
        }
        if (export_cmd->parsed()) {
            return do_export_training(expt);
        }
        if (repro_cmd->parsed()) {
            return do_reproduce(repro);
        }
        std::fprintf(stderr, "error: no command given\n");
        return kExitConfig;
    } catch (const ParseFailureCapError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitParseFailureCap;
    } catch (const BackendExhaustedError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitBackendExhausted;
    } catch (const ProtocolError& e) {
        std::fprintf(stderr, "error: backend protocol violation: %s\n", e.what());
        return kExitBackendExhausted;
    } catch (const AuthError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIo;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitFailure;
    }
}
