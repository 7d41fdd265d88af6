#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "expertprompt/exec_mode.hpp"

namespace expertprompt {

/// Number of words in `text`, where a word is a maximal run of
/// non-whitespace characters. Whitespace is the Unicode space set used by
/// trim(), so NBSP and ideographic spaces separate words too.
size_t count_words(const std::string& text);

/// Mean word count over `texts`. An empty list is a validation error. The
/// parallel variant reduces per-text counts with OpenMP and matches the
/// serial reference exactly (integer counts, one final division).
double avg_word_count(const std::vector<std::string>& texts, ExecMode mode = ExecMode::serial);

/// avg_word_count formatted to two decimals, e.g. "108.44".
std::string format_avg(double value);

}  // namespace expertprompt
