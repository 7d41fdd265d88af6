#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "expertprompt/exec_mode.hpp"

namespace expertprompt {

/// Thrown by an item function to simulate an abrupt kill. The runner stops
/// scheduling work and rethrows, leaving the progress ledger on disk so the
/// next invocation resumes.
class BatchInterrupt : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Outcome of one item. A failure carries a non-empty `error` and a null
/// record; failures are retried once per invocation and then land in the
/// failures sidecar.
struct BatchItemResult {
    nlohmann::ordered_json record;
    bool from_cache = false;
    std::string error;

    bool ok() const { return error.empty(); }
};

using BatchItemFn = std::function<BatchItemResult(const std::string& instruction_id)>;

struct BatchSummary {
    size_t total = 0;
    size_t completed = 0;  /// newly completed by this invocation
    size_t skipped = 0;    /// already present in the ledger (resume)
    size_t failed = 0;     /// persistent failures after the retry pass
    size_t cached = 0;     /// completions served from the response cache
};

struct BatchOptions {
    std::string output_path;
    /// Sidecar for persistent failures; defaults to output_path + ".failures.jsonl".
    std::string failures_path;
    /// Stamped into the ledger header; a resume against a different corpus
    /// is rejected.
    std::string corpus_digest;
    ExecMode mode = ExecMode::serial;
    int num_threads = 4;
    bool retry_failed = true;
};

/// Runs `item_fn` once per id and writes one JSONL record per completed id to
/// `options.output_path`, in the order of `ids` regardless of completion
/// order. Progress is appended to `<output_path>.part` as items finish;
/// rerunning after an interruption skips ids already in the ledger. The final
/// file is written atomically and the ledger removed on success.
BatchSummary run_batch(const std::vector<std::string>& ids, const BatchItemFn& item_fn,
                       const BatchOptions& options);

}  // namespace expertprompt
