#pragma once

#include "expertprompt/backend.hpp"

namespace expertprompt {

/// Offline deterministic backend. The reply is a pure function of the
/// cache-key inputs (kind, model, temperature, max_output_tokens, prompt
/// text), so whole pipelines replay byte-for-byte.
///
/// The prompt text selects the reply shape:
///   - judge prompts (recognized by the Assistant 1/2 answer markers) get a
///     slot-blind judgment: each answer is scored 1-10 from a hash of
///     (question, answer text) alone, so presentation order never matters;
///   - identity-synthesis prompts (recognized by the open identity slot) get
///     a deterministic pseudo expert description;
///   - anything else gets a fixed-format pseudo answer embedding the key
///     hash prefix. Expert-conditioned prompts occasionally lead with a
///     persona sentence so leak stripping has real work in offline runs.
class MockBackend : public ChatBackend {
public:
    explicit MockBackend(BackendKind kind = BackendKind::mock);

    CompletionResponse complete(const CompletionRequest& request) override;
    uint64_t calls() const override { return calls_.load(); }
    std::string descriptor() const override;

private:
    BackendKind kind_;
    std::atomic<uint64_t> calls_{0};
};

/// Slot-blind mock judge score in [1, 10] for one (question, answer) pair.
/// Exposed so tests can predict judgments.
int mock_judge_score(const std::string& question, const std::string& answer);

}  // namespace expertprompt
