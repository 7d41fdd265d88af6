// Acceptance gate: one check per shipped guarantee, each printed as a
// PASS/FAIL/SKIP line. Exits nonzero when any check fails.

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <sys/wait.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "expertprompt/backend.hpp"
#include "expertprompt/cached_backend.hpp"
#include "expertprompt/errors.hpp"
#include "expertprompt/evaluation.hpp"
#include "expertprompt/hash.hpp"
#include "expertprompt/jsonl.hpp"
#include "expertprompt/leak_filter.hpp"
#include "expertprompt/mock_backend.hpp"
#include "expertprompt/pipeline.hpp"
#include "expertprompt/rng.hpp"
#include "expertprompt/templates.hpp"
#include "expertprompt/types.hpp"
#include "expertprompt/word_stats.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace expertprompt;
using test_util::TempDir;

namespace {

struct Failure {
    std::string msg;
};

struct Skip {
    std::string msg;
};

void require(bool cond, const std::string& msg) {
    if (!cond) {
        throw Failure{msg};
    }
}

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return (v && *v) ? std::string(v) : fallback;
}

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') {
            out += "'\\''";
        } else {
            out += c;
        }
    }
    out += "'";
    return out;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string tail_of(const fs::path& path, size_t max_bytes = 800) {
    std::error_code ec;
    if (!fs::exists(path, ec)) {
        return "(no log)";
    }
    std::string text = slurp(path);
    if (text.size() > max_bytes) {
        text = "..." + text.substr(text.size() - max_bytes);
    }
    return text;
}

size_t count_occurrences(const std::string& hay, const std::string& needle) {
    size_t count = 0;
    size_t pos = 0;
    while ((pos = hay.find(needle, pos)) != std::string::npos) {
        ++count;
        pos += needle.size();
    }
    return count;
}

// ---------------------------------------------------------------------------
// 1. End-to-end determinism of the batch meta-command.

std::string canonical_file(const fs::path& path) {
    const std::string ext = path.extension().string();
    if (ext == ".jsonl") {
        return test_util::canonical_jsonl(path);
    }
    if (ext == ".json") {
        auto doc = ordered_json::parse(slurp(path));
        doc.erase("created_at");
        return doc.dump();
    }
    return slurp(path);
}

std::vector<std::string> relative_files(const fs::path& root) {
    std::vector<std::string> out;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (entry.is_regular_file()) {
            out.push_back(fs::relative(entry.path(), root).generic_string());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string run_reproduce() {
    std::string cli = env_or("EXPERTPROMPT_CLI", "");
    if (cli.empty()) {
        throw Skip{"EXPERTPROMPT_CLI not set"};
    }
    require(fs::exists(cli), "CLI binary not found at " + cli);
    cli = fs::absolute(cli).string();

    TempDir tmp("accept-repro");
    const auto corpus = test_util::make_corpus(100, " acceptance");
    ordered_json corpus_doc = ordered_json::array();
    for (const auto& ins : corpus) {
        corpus_doc.push_back(to_json(ins));
    }

    const fs::path dirs[2] = {tmp.path() / "first", tmp.path() / "second"};
    for (const auto& dir : dirs) {
        fs::create_directories(dir);
        std::ofstream out(dir / "corpus.json", std::ios::binary);
        out << corpus_doc.dump(2) << "\n";
    }

    auto run_in = [&](const fs::path& dir) {
        const std::string cmd = "cd " + shell_quote(dir.string()) + " && " + shell_quote(cli) +
                                " reproduce-paper --corpus corpus.json --backend mock --seed 7" +
                                " --out-dir out > log.txt 2>&1";
        int rc = std::system(cmd.c_str());
        if (rc != 0) {
            int code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
            throw Failure{"run in " + dir.filename().string() + " exited with " +
                          std::to_string(code) + "; log: " + tail_of(dir / "log.txt")};
        }
    };

    const auto t0 = std::chrono::steady_clock::now();
    run_in(dirs[0]);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    require(secs < 10.0, "run took " + std::to_string(secs) + "s, budget is 10s");
    run_in(dirs[1]);

    const auto files_a = relative_files(dirs[0] / "out");
    const auto files_b = relative_files(dirs[1] / "out");
    require(files_a == files_b, "the two runs produced different file sets");

    const std::vector<std::string> expected = {
        "answers_expert.jsonl", "answers_static_desc.jsonl", "answers_vanilla.jsonl",
        "identities.jsonl",     "judgments.jsonl",           "manifest.json",
        "report.json",          "report.txt",                "stats.txt"};
    for (const auto& name : expected) {
        require(std::find(files_a.begin(), files_a.end(), name) != files_a.end(),
                "missing output file " + name);
    }
    for (const auto& name : files_a) {
        require(name.find(".part") == std::string::npos, "leftover ledger file " + name);
        require(name.find(".failures.") == std::string::npos, "failure sidecar " + name);
        const std::string canon_a = canonical_file(dirs[0] / "out" / name);
        const std::string canon_b = canonical_file(dirs[1] / "out" / name);
        require(canon_a == canon_b, "output file differs between runs: " + name);
        require(!canon_a.empty(), "output file is empty: " + name);
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.1fs for 100 instructions, %zu files byte-identical",
                  secs, files_a.size());
    return buf;
}

// ---------------------------------------------------------------------------
// 2. Prompt structure goldens.

std::string check_prompt_structure() {
    const auto store = TemplateStore::defaults();
    const auto exemplars = default_exemplars();
    require(exemplars.size() == 3, "expected 3 built-in exemplars");

    Instruction target;
    target.id = "t1";
    target.instruction = "Describe how a refrigerator keeps food cold.";

    const auto identity = render_identity_prompt(store, exemplars, target);
    require(count_occurrences(identity.text, "[Instruction]: ") == 4,
            "identity prompt must hold 3 exemplar blocks plus the target");
    size_t cursor = 0;
    for (const auto& ex : exemplars) {
        const size_t ins_pos = identity.text.find("[Instruction]: " + ex.instruction, cursor);
        require(ins_pos != std::string::npos, "exemplar instruction missing or out of order");
        const size_t id_pos = identity.text.find(ex.identity, ins_pos);
        require(id_pos != std::string::npos, "exemplar identity missing after its instruction");
        cursor = id_pos + ex.identity.size();
    }
    const std::string tail =
        "[Instruction]: " + target.instruction + "\n" + kIdentitySlotMarker;
    require(identity.text.size() >= tail.size() &&
                identity.text.compare(identity.text.size() - tail.size(), tail.size(), tail) == 0,
            "identity prompt must end with the target instruction and an open identity slot");

    const auto fixed = render_static_prompt(store, target);
    const std::string prefix =
        "Imaging you are an expert in the regarding field, try to answer the following "
        "instruction as professional as possible.\n";
    require(fixed.text.rfind(prefix, 0) == 0,
            "static prompt must start with the fixed generic-expert sentence");
    require(fixed.text == prefix + target.instruction,
            "static prompt must be the fixed sentence plus the instruction");
    return "exemplar blocks ordered, static prefix verbatim";
}

// ---------------------------------------------------------------------------
// 3. Leak stripping: crafted corpus plus randomized properties.

std::string check_leak_stripping() {
    struct Case {
        std::string input;
        std::string expected;
    };
    const std::string physicist_body =
        "Atoms consist of three types of particles: protons, neutrons, and electrons.";
    const std::vector<Case> cases = {
        {"As a physicist specializing in atomic structure, I can give you a description of the "
         "structure of an atom. " +
             physicist_body,
         physicist_body},
        {"As an expert in marine biology, I am happy to help. Coral reefs host a quarter of "
         "marine species.",
         "Coral reefs host a quarter of marine species."},
        {"As a chef, I'll explain. Searing builds flavor through the Maillard reaction.",
         "Searing builds flavor through the Maillard reaction."},
        {"Being a seasoned litigator, I would argue the clause is void. The contract lacks "
         "consideration.",
         "The contract lacks consideration."},
        {"Speaking as an experienced economist, my view is that demand is elastic. Prices "
         "respond to substitutes.",
         "Prices respond to substitutes."},
        {"As a historian, I can say the treaty reshaped borders. It ended a decade of conflict.",
         "It ended a decade of conflict."},
        {"As a mathematician, I love this question. As an educator, I will keep it simple. A "
         "prime has exactly two divisors.",
         "A prime has exactly two divisors."},
        {"As a software engineer specializing in distributed systems, I should note consensus "
         "is subtle. Raft elects a single leader per term.",
         "Raft elects a single leader per term."},
        {"As a nutritionist, my advice is to favor variety. Whole grains provide fiber and B "
         "vitamins.",
         "Whole grains provide fiber and B vitamins."},
        {"As a veterinarian, I see this in clinics every week! Cats purr at frequencies near "
         "25 hertz.",
         "Cats purr at frequencies near 25 hertz."},
        {"Atoms are mostly empty space.", "Atoms are mostly empty space."},
        {"As a result, the reaction accelerates.", "As a result, the reaction accelerates."},
        {"The expert consensus is that sleep matters.",
         "The expert consensus is that sleep matters."},
        {"I think the answer is 42.", "I think the answer is 42."},
        {"As an apple ripens it sweetens; enzymes convert starch.",
         "As an apple ripens it sweetens; enzymes convert starch."},
        {"Without further ado: protons carry positive charge.",
         "Without further ado: protons carry positive charge."},
        {"", ""},
        {"short", "short"},
        {"Electrons occupy orbitals.\nProtons sit in the nucleus.",
         "Electrons occupy orbitals.\nProtons sit in the nucleus."},
        {"They said \"As a physicist, I concur.\" later on. More text follows.",
         "They said \"As a physicist, I concur.\" later on. More text follows."},
    };
    size_t stripped = 0;
    for (size_t i = 0; i < cases.size(); ++i) {
        const std::string got = strip_identity_leak(cases[i].input);
        require(got == cases[i].expected,
                "crafted case " + std::to_string(i + 1) + ": got \"" + got + "\"");
        if (got != cases[i].input) {
            ++stripped;
        }
    }
    require(stripped == 10, "exactly the 10 leaky cases must change");

    SeededRng rng(3003);
    const std::vector<std::string> leads = {
        "As a glassblower, I shape the gather while it glows. ",
        "As an archivist, my first step is always provenance. ",
        "Being a beekeeper, I watch the brood pattern closely. ",
        "Speaking as a referee, we apply the advantage rule here. ",
    };
    for (int i = 0; i < 1000; ++i) {
        std::string text = test_util::random_text(rng, true);
        if (rng.bounded(2) == 0) {
            text = leads[rng.bounded(leads.size())] + text;
        }
        const std::string once = strip_identity_leak(text);
        require(strip_identity_leak(once) == once, "stripping must be idempotent");
        require(once.size() <= text.size() &&
                    text.compare(text.size() - once.size(), once.size(), once) == 0,
                "stripped text must be a suffix of the input");
    }
    return "20 crafted cases exact, 1000 randomized inputs idempotent";
}

// ---------------------------------------------------------------------------
// 4. Judging protocol with the slot-blind offline judge.

std::unordered_map<std::string, AnswerRecord> answer_map(const std::vector<Instruction>& corpus,
                                                         const std::string& label,
                                                         const std::string& salt) {
    std::unordered_map<std::string, AnswerRecord> out;
    for (const auto& ins : corpus) {
        AnswerRecord rec;
        rec.instruction_id = ins.id;
        rec.raw_text = salt + " answer for " + ins.id + " from " + label + ".";
        rec.clean_text = rec.raw_text;
        rec.source_model = label;
        out[ins.id] = rec;
    }
    return out;
}

std::vector<JudgeRecord> judge_all(const std::vector<PairwiseTask>& tasks,
                                   const TemplateStore& store, ChatBackend& backend) {
    std::vector<JudgeRecord> records;
    for (const auto& task : tasks) {
        const auto outcome = judge_pair(task, store, backend, JudgeParams{});
        require(outcome.ok, "offline judge reply must parse");
        records.push_back(outcome.record);
    }
    return records;
}

std::string check_judging_protocol() {
    const auto store = TemplateStore::defaults();
    MockBackend judge(BackendKind::mock_blind);
    const auto corpus = test_util::make_corpus(40, " judging");

    const auto same = answer_map(corpus, "candidate", "shared");
    const auto self_tasks =
        build_pairwise_tasks(corpus, same, same, "candidate", "candidate", SwapMode::seeded, 7);
    const auto self_records = judge_all(self_tasks, store, judge);
    const auto self_agg = aggregate(self_records);
    require(self_agg.relative_score_pct == 100.0, "self-comparison relative score must be 100.0");
    require(self_agg.wins == 0 && self_agg.losses == 0,
            "self-comparison must produce zero wins and zero losses");
    require(self_agg.ties == corpus.size(), "self-comparison must tie on every instruction");

    const auto answers_a = answer_map(corpus, "first", "alpha");
    const auto answers_b = answer_map(corpus, "second", "beta");
    auto scores_of = [&](SwapMode mode) {
        const auto tasks =
            build_pairwise_tasks(corpus, answers_a, answers_b, "first", "second", mode, 7);
        std::map<std::string, std::pair<double, double>> scores;
        for (const auto& rec : judge_all(tasks, store, judge)) {
            scores[rec.instruction_id] = {rec.score_a, rec.score_b};
        }
        return scores;
    };
    const auto forward = scores_of(SwapMode::force_false);
    const auto reversed = scores_of(SwapMode::force_true);
    require(forward == reversed,
            "forcing every swap bit true vs false must leave all canonical scores identical");

    const auto big = test_util::make_corpus(10000, " swap");
    size_t swapped = 0;
    for (const auto& ins : big) {
        if (swap_bit(20260819, ins.id)) {
            ++swapped;
        }
    }
    require(swapped >= 4700 && swapped <= 5300,
            "swap frequency " + std::to_string(swapped) + "/10000 outside [0.47, 0.53]");
    char buf[96];
    std::snprintf(buf, sizeof(buf), "self-comparison 100.0, swap-invariant, %zu/10000 swapped",
                  swapped);
    return buf;
}

// ---------------------------------------------------------------------------
// 5. Aggregation arithmetic.

JudgeRecord fixture_record(const std::string& id, double a, double b) {
    JudgeRecord rec;
    rec.instruction_id = id;
    rec.model_a = "candidate";
    rec.model_b = "reference";
    rec.score_a = a;
    rec.score_b = b;
    rec.judge_model = "fixture";
    return rec;
}

std::string check_aggregation() {
    std::vector<JudgeRecord> records;
    size_t next = 0;
    auto add = [&](size_t n, double a, double b) {
        for (size_t i = 0; i < n; ++i) {
            records.push_back(fixture_record("f" + std::to_string(next++), a, b));
        }
    };
    add(97, 8.0, 6.0);
    add(57, 7.0, 7.0);
    add(46, 5.0, 9.0);
    const auto agg = aggregate(records);
    require(agg.n_judged == 200 && agg.wins == 97 && agg.ties == 57 && agg.losses == 46,
            "97/57/46 fixture miscounted");
    const auto pref = preference_breakdown(records);
    require(pref.pct_a == 48.5 && pref.pct_tie == 28.5 && pref.pct_b == 23.0,
            "97/57/46 of 200 must report 48.5/28.5/23.0 percent");

    SeededRng rng(55);
    for (int round = 0; round < 30; ++round) {
        std::vector<JudgeRecord> sample;
        const size_t n = 1 + rng.bounded(400);
        for (size_t i = 0; i < n; ++i) {
            sample.push_back(fixture_record("r" + std::to_string(i),
                                            double(1 + rng.bounded(10)),
                                            double(1 + rng.bounded(10))));
        }
        for (double eps : {0.0, 1.0}) {
            const auto a = aggregate(sample, eps);
            require(a.wins + a.ties + a.losses == a.n_judged,
                    "wins+ties+losses must equal n_judged");
        }
    }

    std::vector<JudgeRecord> ratio;
    for (size_t i = 0; i < 16; ++i) {
        ratio.push_back(fixture_record("s" + std::to_string(i), 5.0, 5.0));
    }
    for (size_t i = 16; i < 20; ++i) {
        ratio.push_back(fixture_record("s" + std::to_string(i), 4.0, 5.0));
    }
    const auto ratio_agg = aggregate(ratio);
    require(ratio_agg.sum_score_a == 96.0 && ratio_agg.sum_score_b == 100.0,
            "ratio fixture sums must be 96 and 100");
    require(ratio_agg.relative_score_pct == 96.0, "96/100 score sums must report 96.0%");
    return "48.5/28.5/23.0 fixture, conservation on 30 random fixtures, 96.0% ratio";
}

// ---------------------------------------------------------------------------
// 6. Word-count statistic against the independent oracle.

double table_average(const std::string& path) {
    const auto doc = ordered_json::parse(slurp(path));
    require(doc.is_array() && !doc.empty(), path + " must hold a non-empty JSON array");
    std::vector<std::string> texts;
    for (const auto& item : doc) {
        if (item.is_string()) {
            texts.push_back(item.get<std::string>());
            continue;
        }
        for (const char* field : {"output", "answer", "response"}) {
            if (item.contains(field) && item[field].is_string()) {
                texts.push_back(item[field].get<std::string>());
                break;
            }
        }
    }
    require(texts.size() == doc.size(), path + ": records without an output text field");
    return avg_word_count(texts);
}

std::string check_word_stats() {
    SeededRng rng(6006);
    std::vector<std::string> texts;
    double oracle_sum = 0.0;
    for (int i = 0; i < 1000; ++i) {
        texts.push_back(test_util::random_text(rng, true));
        const size_t expected = test_util::oracle_word_count(texts.back());
        require(count_words(texts.back()) == expected,
                "count_words disagrees with the oracle on input " + std::to_string(i));
        oracle_sum += double(expected);
    }
    const double avg = avg_word_count(texts);
    require(std::fabs(avg - oracle_sum / 1000.0) <= 1e-9,
            "avg_word_count must match the oracle mean to 1e-9");
    require(avg_word_count(texts, ExecMode::parallel) == avg,
            "parallel average must equal the serial reference");

    const struct {
        const char* env;
        double target;
    } tables[] = {{"EXPERTPROMPT_TABLE1_VANILLA", 108.44},
                  {"EXPERTPROMPT_TABLE1_STATIC", 108.67},
                  {"EXPERTPROMPT_TABLE1_EXPERT", 138.30}};
    bool all_set = true;
    for (const auto& t : tables) {
        if (env_or(t.env, "").empty()) {
            all_set = false;
        }
    }
    if (!all_set) {
        return "1000-string oracle match; distribution files not provided, arithmetic only";
    }
    for (const auto& t : tables) {
        const double got = table_average(env_or(t.env, ""));
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%s average %.2f outside %.2f +/- 3", t.env, got,
                      t.target);
        require(std::fabs(got - t.target) <= 3.0, buf);
    }
    return "1000-string oracle match; distribution averages within +/- 3 words";
}

// ---------------------------------------------------------------------------
// 7. Deterministic sampling without replacement.

std::string check_sampling() {
    const auto corpus = test_util::make_corpus(52002, " sampling");
    auto ids_of = [](const std::vector<Instruction>& sample) {
        std::vector<std::string> ids;
        ids.reserve(sample.size());
        for (const auto& ins : sample) {
            ids.push_back(ins.id);
        }
        return ids;
    };
    const auto first = ids_of(sample_instances(corpus, 500, 11));
    const auto again = ids_of(sample_instances(corpus, 500, 11));
    const auto other = ids_of(sample_instances(corpus, 500, 12));
    require(first.size() == 500, "sample must hold exactly 500 instructions");
    require(first == again, "sampling must be deterministic for a fixed seed");
    require(first != other, "different seeds must select different samples");
    const std::set<std::string> unique(first.begin(), first.end());
    require(unique.size() == 500, "sampling must be without replacement");
    for (size_t i = 1; i < first.size(); ++i) {
        require(first[i - 1] < first[i], "sample must preserve corpus order");
    }
    return "500 of 52002: stable per seed, disjoint drivers across seeds, no duplicates";
}

// ---------------------------------------------------------------------------
// 8. Backend robustness against a local stub server.

class StubServer {
  public:
    StubServer() {
        server.new_task_queue = [] { return new httplib::ThreadPool(8); };
        port_ = server.bind_to_any_port("127.0.0.1");
        require(port_ > 0, "stub server failed to bind");
        thread_ = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~StubServer() {
        server.stop();
        thread_.join();
    }
    std::string endpoint(const std::string& prefix) const {
        return "http://127.0.0.1:" + std::to_string(port_) + prefix;
    }

    httplib::Server server;

  private:
    int port_ = 0;
    std::thread thread_;
};

std::string chat_body(const std::string& content) {
    ordered_json doc = {
        {"id", "stub"},
        {"model", "stub-model"},
        {"choices",
         ordered_json::array(
             {{{"message", {{"role", "assistant"}, {"content", content}}},
               {"finish_reason", "stop"}}})},
    };
    return doc.dump();
}

BackendConfig stub_config(const std::string& endpoint) {
    BackendConfig cfg;
    cfg.kind = BackendKind::http_chat;
    cfg.endpoint = endpoint;
    cfg.auth_env_var = "";
    cfg.max_concurrency = 2;
    cfg.retry_max = 3;
    cfg.retry_base_delay_ms = 10;
    cfg.requests_per_minute = 100000;
    cfg.request_timeout_ms = 5000;
    return cfg;
}

CompletionRequest stub_request(const std::string& text) {
    CompletionRequest req;
    req.prompt.text = text;
    req.model = "stub-model";
    req.temperature = 0.2;
    req.max_output_tokens = 128;
    req.request_tag = "acceptance";
    return req;
}

std::string check_backend_robustness() {
    StubServer stub;

    std::atomic<int> in_flight{0};
    std::atomic<int> peak{0};
    std::atomic<int> slow_hits{0};
    stub.server.Post("/slow/chat/completions",
                     [&](const httplib::Request&, httplib::Response& res) {
                         const int now = in_flight.fetch_add(1) + 1;
                         int prev = peak.load();
                         while (now > prev && !peak.compare_exchange_weak(prev, now)) {
                         }
                         std::this_thread::sleep_for(std::chrono::milliseconds(40));
                         in_flight.fetch_sub(1);
                         slow_hits.fetch_add(1);
                         res.set_content(chat_body("slow reply"), "application/json");
                     });

    std::atomic<int> flaky_attempts{0};
    stub.server.Post("/flaky/chat/completions",
                     [&](const httplib::Request&, httplib::Response& res) {
                         if (flaky_attempts.fetch_add(1) < 2) {
                             res.status = 429;
                             res.set_content("slow down", "text/plain");
                             return;
                         }
                         res.set_content(chat_body("finally"), "application/json");
                     });

    std::atomic<int> cached_hits{0};
    stub.server.Post("/cached/chat/completions",
                     [&](const httplib::Request&, httplib::Response& res) {
                         cached_hits.fetch_add(1);
                         res.set_content(chat_body("stable reply"), "application/json");
                     });

    std::atomic<bool> healthy{false};
    std::atomic<int> sick_hits{0};
    stub.server.Post("/sick/chat/completions",
                     [&](const httplib::Request&, httplib::Response& res) {
                         sick_hits.fetch_add(1);
                         if (!healthy.load()) {
                             res.status = 500;
                             res.set_content("boom", "text/plain");
                             return;
                         }
                         res.set_content(chat_body("recovered"), "application/json");
                     });

    auto backend = make_backend(stub_config(stub.endpoint("/slow")));
    std::vector<std::thread> workers;
    std::atomic<int> ok{0};
    for (int i = 0; i < 6; ++i) {
        workers.emplace_back([&, i] {
            const auto resp = backend->complete(stub_request("probe " + std::to_string(i)));
            if (resp.finish_reason == FinishReason::complete) {
                ok.fetch_add(1);
            }
        });
    }
    for (auto& w : workers) {
        w.join();
    }
    require(ok.load() == 6 && slow_hits.load() == 6, "all six probe requests must complete");
    require(peak.load() <= 2, "observed " + std::to_string(peak.load()) +
                                  " requests in flight, max_concurrency is 2");
    require(peak.load() >= 1, "in-flight probe recorded nothing");

    auto flaky_backend = make_backend(stub_config(stub.endpoint("/flaky")));
    const auto flaky_resp = flaky_backend->complete(stub_request("retry me"));
    require(flaky_resp.finish_reason == FinishReason::complete && flaky_resp.text == "finally",
            "request must succeed after scripted 429s");
    require(flaky_attempts.load() == 3, "expected exactly 3 attempts, saw " +
                                            std::to_string(flaky_attempts.load()));

    TempDir cache_dir("accept-cache");
    const auto cached_req = stub_request("cache me");
    {
        CachedBackend warm(make_backend(stub_config(stub.endpoint("/cached"))),
                           BackendKind::http_chat, cache_dir.path());
        const auto miss = warm.complete(cached_req);
        require(miss.finish_reason == FinishReason::complete && !miss.from_cache,
                "first request must reach the stub");
    }
    require(cached_hits.load() == 1, "cold cache must forward exactly one request");
    {
        CachedBackend warm(make_backend(stub_config(stub.endpoint("/cached"))),
                           BackendKind::http_chat, cache_dir.path());
        const auto hit = warm.complete(cached_req);
        require(hit.finish_reason == FinishReason::complete && hit.from_cache &&
                    hit.text == "stable reply",
                "warm cache must replay the stored reply");
        require(warm.calls() == 0, "warm cache must make zero backend calls");
    }
    require(cached_hits.load() == 1, "warm cache must not reach the stub");

    auto sick_cfg = stub_config(stub.endpoint("/sick"));
    sick_cfg.retry_max = 0;
    CachedBackend sick(make_backend(sick_cfg), BackendKind::http_chat, cache_dir.path());
    const auto failed = sick.complete(stub_request("error path"));
    require(failed.finish_reason == FinishReason::error, "stubbed 500 must surface as an error");
    const auto after_error = sick.complete(stub_request("error path"));
    require(after_error.finish_reason == FinishReason::error &&
                sick_hits.load() == 2,
            "errors must not be cached: the second call must reach the stub again");
    healthy.store(true);
    const auto recovered = sick.complete(stub_request("error path"));
    require(recovered.finish_reason == FinishReason::complete && recovered.text == "recovered",
            "request must succeed once the stub recovers");
    const auto replay = sick.complete(stub_request("error path"));
    require(replay.from_cache && sick_hits.load() == 3,
            "the successful reply must be cached and replayed");
    return "concurrency capped at 2, 429 retries, warm cache silent, errors uncached";
}

// ---------------------------------------------------------------------------
// 9. Live smoke run, only with real credentials.

std::string check_live_smoke() {
    if (env_or("OPENAI_API_KEY", "").empty()) {
        throw Skip{"OPENAI_API_KEY not set"};
    }
    BackendConfig cfg;
    cfg.kind = BackendKind::http_chat;
    cfg.endpoint = env_or("EXPERTPROMPT_LIVE_ENDPOINT", "https://api.openai.com/v1");
    cfg.auth_env_var = "OPENAI_API_KEY";
    cfg.max_concurrency = 2;
    cfg.retry_max = 3;
    cfg.retry_base_delay_ms = 1000;
    cfg.requests_per_minute = 60;
    cfg.request_timeout_ms = 60000;
    auto backend = make_backend(cfg);
    const auto store = TemplateStore::defaults();

    std::vector<Instruction> corpus;
    const std::vector<std::string> prompts = {
        "Give two tips for keeping a small herb garden alive indoors.",
        "Explain the difference between RAM and disk storage in plain language.",
        "Suggest a warm-up routine for a 5k run.",
        "Summarize why the sky appears blue.",
        "Describe how to brew a cup of green tea without making it bitter.",
    };
    for (size_t i = 0; i < prompts.size(); ++i) {
        Instruction ins;
        char id[16];
        std::snprintf(id, sizeof(id), "%05zu", i);
        ins.id = id;
        ins.instruction = prompts[i];
        corpus.push_back(std::move(ins));
    }

    TempDir tmp("accept-live");
    PipelineContext ctx;
    ctx.templates = &store;
    ctx.backend = backend.get();
    ctx.params.model = env_or("EXPERTPROMPT_LIVE_MODEL", "gpt-3.5-turbo");
    ctx.params.max_output_tokens = 512;
    ctx.mode = ExecMode::serial;
    ctx.num_threads = 1;
    ctx.corpus_digest = "live-smoke";

    const auto ident_summary =
        synthesize_identities(corpus, default_exemplars(), ctx, tmp.file("identities.jsonl"));
    require(ident_summary.failed == 0, "identity synthesis reported failures");
    const auto identities = read_identities(tmp.file("identities.jsonl"));
    require(identities.size() == corpus.size(), "expected one identity per instruction");
    for (const auto& [id, identity] : identities) {
        require(!trim(identity.identity_text).empty(), "identity for " + id + " is empty");
    }

    const auto expert_summary = generate_answers(corpus, Strategy::expert, &identities, ctx,
                                                 tmp.file("answers_expert.jsonl"));
    const auto vanilla_summary = generate_answers(corpus, Strategy::vanilla, nullptr, ctx,
                                                  tmp.file("answers_vanilla.jsonl"));
    require(expert_summary.failed == 0 && vanilla_summary.failed == 0,
            "answer generation reported failures");
    const auto expert_answers = read_answers(tmp.file("answers_expert.jsonl"));
    const auto vanilla_answers = read_answers(tmp.file("answers_vanilla.jsonl"));
    require(expert_answers.size() == corpus.size() && vanilla_answers.size() == corpus.size(),
            "expected one answer per instruction per strategy");
    for (const auto& [id, rec] : expert_answers) {
        require(!trim(rec.clean_text).empty(), "expert answer for " + id + " is empty");
    }

    const auto tasks = build_pairwise_tasks(corpus, expert_answers, vanilla_answers, "expert",
                                            "vanilla", SwapMode::seeded, 7);
    JudgingContext jctx;
    jctx.templates = &store;
    jctx.backend = backend.get();
    jctx.params.model = env_or("EXPERTPROMPT_LIVE_JUDGE_MODEL", "gpt-4");
    jctx.mode = ExecMode::serial;
    jctx.num_threads = 1;
    jctx.corpus_digest = "live-smoke";
    const auto judge_summary = run_judging(tasks, jctx, tmp.file("judgments.jsonl"));
    require(judge_summary.failed == 0, "judging reported backend failures");
    const auto [records, failures] = load_judgments(tmp.file("judgments.jsonl"));
    require(failures.empty(), "live judge replies must parse with 0 failures");
    require(records.size() == corpus.size(), "expected one judgment per instruction");
    for (const auto& rec : records) {
        require(rec.score_a >= 1.0 && rec.score_a <= 10.0 && rec.score_b >= 1.0 &&
                    rec.score_b <= 10.0,
                "judge scores for " + rec.instruction_id + " out of range");
        require(rec.model_a == "expert" && rec.model_b == "vanilla",
                "judgment labels must stay in canonical orientation");
    }
    return "5 instructions through identities, answers and judging with 0 parse failures";
}

struct Criterion {
    const char* name;
    std::string (*run)();
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {"repeated mock runs produce byte-identical outputs", run_reproduce},
        {"identity prompt structure and static prompt prefix", check_prompt_structure},
        {"persona leak stripping", check_leak_stripping},
        {"slot-blind judging protocol", check_judging_protocol},
        {"aggregation arithmetic", check_aggregation},
        {"average word count vs independent oracle", check_word_stats},
        {"deterministic sampling without replacement", check_sampling},
        {"backend robustness against a stub server", check_backend_robustness},
        {"live API smoke run", check_live_smoke},
    };

    size_t passed = 0;
    size_t failed = 0;
    size_t skipped = 0;
    for (size_t i = 0; i < criteria.size(); ++i) {
        std::string status;
        std::string detail;
        try {
            detail = criteria[i].run();
            status = "PASS";
            ++passed;
        } catch (const Skip& s) {
            status = "SKIP";
            detail = s.msg;
            ++skipped;
        } catch (const Failure& f) {
            status = "FAIL";
            detail = f.msg;
            ++failed;
        } catch (const std::exception& e) {
            status = "FAIL";
            detail = e.what();
            ++failed;
        }
        std::printf("%s  %zu. %s%s%s\n", status.c_str(), i + 1, criteria[i].name,
                    detail.empty() ? "" : ": ", detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%zu passed, %zu failed, %zu skipped\n", passed, failed, skipped);
    return failed == 0 ? 0 : 1;
}
