#include "expertprompt/leak_filter.hpp"

#include <algorithm>
#include <cctype>

#include "expertprompt/text.hpp"
#include "expertprompt/types.hpp"

namespace expertprompt {

namespace {

constexpr size_t kMaxStrippedSentences = 2;

std::string ascii_lower(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return out;
}

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

// Word-boundary token search on lowercase text. Apostrophe counts as a
// boundary, so "i" also matches inside "i'm"/"i'd".
bool contains_token(const std::string& lower, const std::string& token) {
    size_t pos = 0;
    while ((pos = lower.find(token, pos)) != std::string::npos) {
        bool left_ok = pos == 0 || !is_word_char(lower[pos - 1]);
        size_t after = pos + token.size();
        bool right_ok = after >= lower.size() || !is_word_char(lower[after]);
        if (left_ok && right_ok) {
            return true;
        }
        pos += 1;
    }
    return false;
}

// End of the sentence starting at `start`: one or more of . ! ? followed by
// whitespace or end of text. Returns npos when no complete sentence exists.
size_t sentence_end(const std::string& text, size_t start) {
    for (size_t i = start; i < text.size(); ++i) {
        char c = text[i];
        if (c != '.' && c != '!' && c != '?') {
            continue;
        }
        size_t j = i;
        while (j < text.size() && (text[j] == '.' || text[j] == '!' || text[j] == '?')) {
            ++j;
        }
        if (j >= text.size()) {
            return j;
        }
        size_t probe = j;
        if (is_unicode_space(next_codepoint(text, probe))) {
            return j;
        }
        i = j - 1;
    }
    return std::string::npos;
}

size_t skip_spaces(const std::string& text, size_t pos) {
    while (pos < text.size()) {
        size_t probe = pos;
        if (!is_unicode_space(next_codepoint(text, probe))) {
            break;
        }
        pos = probe;
    }
    return pos;
}

const std::vector<std::string>& first_person_tokens() {
    static const std::vector<std::string> tokens = {"i", "my", "me", "myself", "we", "our"};
    return tokens;
}

}  // namespace

LeakFilter::LeakFilter()
    : LeakFilter(std::vector<std::string>{"as a ", "as an ", "being a ", "being an ",
                                          "speaking as "}) {}

LeakFilter::LeakFilter(std::vector<std::string> openers) : openers_(std::move(openers)) {}

bool LeakFilter::matches_leak(const std::string& sentence) const {
    std::string lower = ascii_lower(trim(sentence));
    bool opener_found = false;
    for (const auto& opener : openers_) {
        if (lower.rfind(opener, 0) == 0) {
            opener_found = true;
            break;
        }
    }
    if (!opener_found || lower.find(',') == std::string::npos) {
        return false;
    }
    for (const auto& token : first_person_tokens()) {
        if (contains_token(lower, token)) {
            return true;
        }
    }
    return false;
}

std::string LeakFilter::strip(const std::string& raw) const {
    size_t pos = 0;
    for (size_t removed = 0; removed < kMaxStrippedSentences; ++removed) {
        size_t end = sentence_end(raw, pos);
        if (end == std::string::npos) {
            break;
        }
        if (!matches_leak(raw.substr(pos, end - pos))) {
            break;
        }
        pos = skip_spaces(raw, end);
    }
    return raw.substr(pos);
}

std::string strip_identity_leak(const std::string& raw) {
    static const LeakFilter filter;
    return filter.strip(raw);
}

}  // namespace expertprompt
