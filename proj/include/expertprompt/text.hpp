#pragma once

#include <cstdint>
#include <string_view>

namespace expertprompt {

/// Decode one UTF-8 codepoint starting at text[pos]. Advances pos past the
/// sequence. Malformed bytes decode as U+FFFD and advance by one byte, so
/// scanning always terminates.
uint32_t next_codepoint(std::string_view text, size_t& pos);

/// Unicode whitespace (White_Space property members that occur in practice:
/// ASCII controls, space, NEL, NBSP, ogham, general punctuation spaces,
/// line/paragraph separators, narrow NBSP, math space, ideographic space).
bool is_unicode_space(uint32_t cp);

}  // namespace expertprompt
