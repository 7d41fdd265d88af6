#pragma once

#include <filesystem>

#include "expertprompt/backend.hpp"

namespace expertprompt {

/// Content-addressed completion cache in front of any backend: one JSON file
/// per cache key in a run-independent directory. Hits return the stored text
/// byte-identically with zero backend calls; only finish_reason == complete
/// responses are ever stored, so failures are retried on the next run.
/// Concurrent writers are safe: entries land via write-then-rename.
class CachedBackend : public ChatBackend {
public:
    CachedBackend(std::unique_ptr<ChatBackend> inner, BackendKind kind,
                  std::filesystem::path cache_dir);

    CompletionResponse complete(const CompletionRequest& request) override;
    uint64_t calls() const override { return inner_->calls(); }
    std::string descriptor() const override { return inner_->descriptor(); }

    uint64_t hits() const { return hits_.load(); }
    uint64_t misses() const { return misses_.load(); }

private:
    std::unique_ptr<ChatBackend> inner_;
    BackendKind kind_;
    std::filesystem::path dir_;
    std::atomic<uint64_t> hits_{0};
    std::atomic<uint64_t> misses_{0};
};

}  // namespace expertprompt
