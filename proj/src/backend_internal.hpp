#pragma once

#include "expertprompt/backend.hpp"
#include "expertprompt/types.hpp"

namespace expertprompt::detail {

/// Canonical cache-key material: kind, model, decoding parameters, prompt.
std::string cache_payload(BackendKind kind, const CompletionRequest& request);

void validate_request(const CompletionRequest& request);

}  // namespace expertprompt::detail
