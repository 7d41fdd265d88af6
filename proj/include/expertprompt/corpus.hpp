#pragma once

#include <filesystem>
#include <vector>

#include "expertprompt/types.hpp"

namespace expertprompt {

/// Read an Alpaca-format instruction file: either a single JSON array of
/// objects or one JSON object per line. Recognized fields per record:
/// instruction (required), input (optional), id (optional), output (ignored).
/// Records lacking an id get id = zero-padded 5-digit record index.
/// Order is preserved; duplicate ids and empty instructions are rejected.
std::vector<Instruction> read_instruction_corpus(const std::filesystem::path& path);

/// SHA-256 over the corpus file's raw bytes.
std::string corpus_digest(const std::filesystem::path& path);

}  // namespace expertprompt
