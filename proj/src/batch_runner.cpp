#include "expertprompt/batch_runner.hpp"

#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <unordered_map>
#include <unordered_set>

#include <omp.h>

#include "expertprompt/errors.hpp"
#include "expertprompt/jsonl.hpp"

namespace expertprompt {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kLedgerVersion = 1;

ordered_json ledger_header(const std::string& corpus_digest) {
    ordered_json header;
    header["__ledger__"] = kLedgerVersion;
    header["corpus_digest"] = corpus_digest;
    return header;
}

/// Completed records from a previous interrupted run, keyed by id. A
/// truncated trailing line (killed mid-append) is dropped; corruption
/// anywhere else is an error.
std::unordered_map<std::string, ordered_json> read_ledger(const std::string& path,
                                                          const std::string& corpus_digest) {
    std::unordered_map<std::string, ordered_json> done;
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open progress ledger: " + path);
    }
    std::string line;
    size_t line_no = 0;
    bool header_seen = false;
    std::string pending;
    size_t pending_line = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        if (!pending.empty()) {
            ordered_json record = ordered_json::parse(pending, nullptr, false);
            if (record.is_discarded() || !record.contains("instruction_id")) {
                throw RecordParseError(path, pending_line, "corrupt ledger record");
            }
            const std::string id = record["instruction_id"].get<std::string>();
            done[id] = std::move(record);
        }
        if (!header_seen) {
            ordered_json header = ordered_json::parse(line, nullptr, false);
            if (header.is_discarded() || !header.contains("__ledger__")) {
                throw RecordParseError(path, line_no, "missing ledger header");
            }
            std::string digest = header.value("corpus_digest", std::string());
            if (digest != corpus_digest) {
                throw ValidationError("progress ledger " + path +
                                      " belongs to a different corpus; remove it to start over");
            }
            header_seen = true;
            pending.clear();
            continue;
        }
        pending = line;
        pending_line = line_no;
    }
    if (!pending.empty()) {
        ordered_json record = ordered_json::parse(pending, nullptr, false);
        if (!record.is_discarded() && record.contains("instruction_id")) {
            const std::string id = record["instruction_id"].get<std::string>();
            done[id] = std::move(record);
        }
        // else: partial final append from a kill, redo that item
    }
    return done;
}

class LedgerWriter {
  public:
    explicit LedgerWriter(const std::string& path) : path_(path) {
        out_.open(path, std::ios::binary | std::ios::app);
        if (!out_) {
            throw IoError("cannot open progress ledger for append: " + path);
        }
    }

    void append(const ordered_json& record) {
        std::lock_guard<std::mutex> lock(mutex_);
        out_ << record.dump() << '\n';
        out_.flush();
        if (!out_) {
            throw IoError("write to progress ledger failed: " + path_);
        }
    }

  private:
    std::string path_;
    std::ofstream out_;
    std::mutex mutex_;
};

struct ItemOutcome {
    bool done = false;
    bool from_cache = false;
    std::string error;
};

}  // namespace

BatchSummary run_batch(const std::vector<std::string>& ids, const BatchItemFn& item_fn,
                       const BatchOptions& options) {
    if (options.output_path.empty()) {
        throw ConfigError("batch output path is empty");
    }
    fs::path out_path(options.output_path);
    fs::path parent = out_path.parent_path();
    if (!parent.empty() && !fs::exists(parent)) {
        throw IoError("output directory does not exist: " + parent.string());
    }
    {
        std::unordered_set<std::string> seen;
        for (const auto& id : ids) {
            if (!seen.insert(id).second) {
                throw ValidationError("duplicate instruction id in batch: " + id);
            }
        }
    }

    const std::string ledger_path = options.output_path + ".part";
    const std::string failures_path = options.failures_path.empty()
                                          ? options.output_path + ".failures.jsonl"
                                          : options.failures_path;

    std::unordered_map<std::string, ordered_json> done;
    std::error_code size_ec;
    if (fs::exists(ledger_path) && fs::file_size(ledger_path, size_ec) > 0 && !size_ec) {
        done = read_ledger(ledger_path, options.corpus_digest);
        // Rewrite before appending: a kill mid-append leaves a partial final
        // line, and appending after it would glue two records together.
        std::string rebuilt = ledger_header(options.corpus_digest).dump() + "\n";
        for (const auto& id : ids) {
            auto it = done.find(id);
            if (it != done.end()) {
                rebuilt += it->second.dump() + "\n";
            }
        }
        write_text_file(rebuilt, ledger_path);
    } else {
        // Rename-in so the ledger never exists with a partial header.
        write_text_file(ledger_header(options.corpus_digest).dump() + "\n", ledger_path);
    }

    LedgerWriter ledger(ledger_path);

    BatchSummary summary;
    summary.total = ids.size();

    std::vector<size_t> todo;
    todo.reserve(ids.size());
    for (size_t i = 0; i < ids.size(); ++i) {
        if (done.count(ids[i]) != 0) {
            ++summary.skipped;
        } else {
            todo.push_back(i);
        }
    }

    std::vector<ItemOutcome> outcomes(ids.size());
    std::atomic<bool> abort{false};
    std::exception_ptr first_error = nullptr;
    std::mutex error_mutex;

    auto run_one = [&](size_t corpus_index) {
        if (abort.load(std::memory_order_relaxed)) {
            return;
        }
        const std::string& id = ids[corpus_index];
        ItemOutcome& outcome = outcomes[corpus_index];
        try {
            BatchItemResult result = item_fn(id);
            if (result.ok()) {
                result.record["instruction_id"] = id;
                ledger.append(result.record);
                outcome.done = true;
                outcome.from_cache = result.from_cache;
            } else {
                outcome.error = result.error;
            }
        } catch (...) {
            abort.store(true, std::memory_order_relaxed);
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) {
                first_error = std::current_exception();
            }
        }
    };

    if (options.mode == ExecMode::parallel) {
        const auto n = static_cast<int64_t>(todo.size());
        const int threads = options.num_threads > 0 ? options.num_threads : 1;
#pragma omp parallel for schedule(dynamic) num_threads(threads)
        for (int64_t i = 0; i < n; ++i) {
            run_one(todo[static_cast<size_t>(i)]);
        }
    } else {
        for (size_t index : todo) {
            if (abort.load(std::memory_order_relaxed)) {
                break;
            }
            run_one(index);
        }
    }

    if (first_error) {
        std::rethrow_exception(first_error);
    }

    if (options.retry_failed) {
        for (size_t index : todo) {
            if (!outcomes[index].done && !outcomes[index].error.empty()) {
                outcomes[index].error.clear();
                run_one(index);
            }
        }
        if (first_error) {
            std::rethrow_exception(first_error);
        }
    }

    std::vector<ordered_json> failures;
    for (size_t index : todo) {
        const ItemOutcome& outcome = outcomes[index];
        if (outcome.done) {
            ++summary.completed;
            if (outcome.from_cache) {
                ++summary.cached;
            }
        } else {
            ++summary.failed;
            ordered_json failure;
            failure["instruction_id"] = ids[index];
            failure["error"] = outcome.error.empty() ? std::string("unknown error") : outcome.error;
            failures.push_back(std::move(failure));
        }
    }

    // Re-read our own appends so resumed and fresh completions flow through
    // one path, then emit in corpus order.
    done = read_ledger(ledger_path, options.corpus_digest);
    std::vector<ordered_json> records;
    records.reserve(done.size());
    for (const auto& id : ids) {
        auto it = done.find(id);
        if (it != done.end()) {
            records.push_back(it->second);
        }
    }
    write_jsonl(records, options.output_path);

    if (failures.empty()) {
        std::error_code ec;
        fs::remove(failures_path, ec);
    } else {
        write_jsonl(failures, failures_path);
    }

    std::error_code ec;
    fs::remove(ledger_path, ec);
    return summary;
}

}  // namespace expertprompt
