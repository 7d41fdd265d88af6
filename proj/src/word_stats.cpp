#include "expertprompt/word_stats.hpp"

#include <cstdint>
#include <cstdio>
#include <stdexcept>

#include <omp.h>

#include "expertprompt/errors.hpp"
#include "expertprompt/text.hpp"

namespace expertprompt {

std::string to_string(ExecMode mode) {
    switch (mode) {
        case ExecMode::serial:
            return "serial";
        case ExecMode::parallel:
            return "parallel";
    }
    throw std::logic_error("unknown exec mode");
}

ExecMode exec_mode_from_string(const std::string& name) {
    if (name == "serial") {
        return ExecMode::serial;
    }
    if (name == "parallel") {
        return ExecMode::parallel;
    }
    throw ConfigError("unknown exec mode: " + name);
}

size_t count_words(const std::string& text) {
    size_t words = 0;
    bool in_word = false;
    size_t pos = 0;
    while (pos < text.size()) {
        uint32_t cp = next_codepoint(text, pos);
        if (is_unicode_space(cp)) {
            in_word = false;
        } else if (!in_word) {
            in_word = true;
            ++words;
        }
    }
    return words;
}

double avg_word_count(const std::vector<std::string>& texts, ExecMode mode) {
    if (texts.empty()) {
        throw ValidationError("cannot average word counts over an empty answer list");
    }
    uint64_t total = 0;
    if (mode == ExecMode::parallel) {
        const auto n = static_cast<int64_t>(texts.size());
#pragma omp parallel for schedule(static) reduction(+ : total)
        for (int64_t i = 0; i < n; ++i) {
            total += count_words(texts[static_cast<size_t>(i)]);
        }
    } else {
        for (const auto& text : texts) {
            total += count_words(text);
        }
    }
    return static_cast<double>(total) / static_cast<double>(texts.size());
}

std::string format_avg(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", value);
    return buf;
}

}  // namespace expertprompt
