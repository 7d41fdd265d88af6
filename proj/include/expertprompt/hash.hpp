#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace expertprompt {

/// SHA-256 of the input bytes, rendered as 64 lowercase hex characters.
std::string content_hash(std::string_view bytes);

/// First 8 digest bytes of content_hash(bytes), big-endian. Used wherever a
/// deterministic, platform-independent 64-bit value is derived from text
/// (mock completions, swap bits).
uint64_t content_hash_u64(std::string_view bytes);

/// SHA-256 of a file's raw bytes. Throws IoError if the file cannot be read.
std::string file_digest(const std::string& path);

}  // namespace expertprompt
