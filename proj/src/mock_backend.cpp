#include "expertprompt/mock_backend.hpp"

#include <array>
#include <cctype>
#include <sstream>

#include "backend_internal.hpp"
#include "expertprompt/errors.hpp"
#include "expertprompt/hash.hpp"

namespace expertprompt {

namespace {

// splitmix64; cheap deterministic stream from one seed.
struct WordStream {
    uint64_t state;

    uint64_t next() {
        state += 0x9e3779b97f4a7c15ULL;
        uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    uint64_t bounded(uint64_t m) { return next() % m; }
};

const std::array<const char*, 32> kWords = {
    "the",     "answer",   "depends",  "on",       "several",  "factors", "that",    "include",
    "careful", "analysis", "of",       "context",  "relevant", "details", "and",     "practical",
    "steps",   "which",    "can",      "be",       "applied",  "in",      "order",   "to",
    "reach",   "a",        "useful",   "result",   "while",    "keeping", "clarity", "first",
};

const std::array<const char*, 8> kProfessions = {
    "researcher", "engineer", "consultant", "educator",
    "analyst",    "writer",   "scientist",  "advisor",
};

const std::array<const char*, 3> kLeakOpeners = {
    "As an expert in this field, I can offer a clear answer here. ",
    "As a specialist with years of experience in this area, my response follows. ",
    "Being a professional who has worked on such problems, I will explain this carefully. ",
};

std::string pseudo_sentences(WordStream& rng, size_t n_words) {
    std::string out;
    size_t until_period = 6 + rng.bounded(6);
    bool sentence_start = true;
    for (size_t i = 0; i < n_words; ++i) {
        std::string word = kWords[rng.bounded(kWords.size())];
        if (sentence_start) {
            word[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
            sentence_start = false;
        } else {
            out += ' ';
        }
        out += word;
        if (--until_period == 0 || i + 1 == n_words) {
            out += '.';
            until_period = 6 + rng.bounded(6);
            sentence_start = true;
            if (i + 1 < n_words) {
                out += ' ';
            }
        }
    }
    return out;
}

std::string extract_between(const std::string& text, const std::string& begin,
                            const std::string& end) {
    size_t b = text.find(begin);
    if (b == std::string::npos) {
        return "";
    }
    b += begin.size();
    size_t e = text.find(end, b);
    if (e == std::string::npos) {
        return "";
    }
    return text.substr(b, e - b);
}

}  // namespace

int mock_judge_score(const std::string& question, const std::string& answer) {
    uint64_t h = content_hash_u64("judge-score|" + question + "\x1f" + answer);
    return 1 + static_cast<int>(h % 10);
}

MockBackend::MockBackend(BackendKind kind) : kind_(kind) {
    if (kind_ == BackendKind::http_chat) {
        throw ConfigError("MockBackend cannot serve http_chat");
    }
}

std::string MockBackend::descriptor() const {
    return to_string(kind_);
}

CompletionResponse MockBackend::complete(const CompletionRequest& request) {
    detail::validate_request(request);
    calls_.fetch_add(1);

    const std::string& user_text = request.prompt.text;
    std::string payload = detail::cache_payload(kind_, request);
    std::string hex_prefix = content_hash(payload).substr(0, 8);
    WordStream rng{content_hash_u64(payload + "|mock")};

    CompletionResponse resp;
    resp.model = request.model;
    resp.finish_reason = FinishReason::complete;

    std::string answer_1 = extract_between(user_text, std::string(kJudgeAnswerOneBegin) + "\n",
                                           std::string("\n") + kJudgeAnswerOneEnd);
    std::string answer_2 = extract_between(user_text, std::string(kJudgeAnswerTwoBegin) + "\n",
                                           std::string("\n") + kJudgeAnswerTwoEnd);

    if (!answer_1.empty() && !answer_2.empty()) {
        std::string question =
            trim(extract_between(user_text, std::string(kJudgeQuestionLabel) + "\n",
                                 std::string("\n") + kJudgeAnswerOneBegin));
        int s1 = mock_judge_score(question, answer_1);
        int s2 = mock_judge_score(question, answer_2);
        std::ostringstream out;
        out << s1 << " " << s2 << "\n"
            << "Each answer was rated independently of its position; the scores are a "
               "deterministic function of question and answer text.";
        resp.text = out.str();
        return resp;
    }

    if (user_text.find(kIdentitySlotMarker) != std::string::npos) {
        std::ostringstream out;
        out << "You are a seasoned " << kProfessions[rng.bounded(kProfessions.size())]
            << " (profile " << hex_prefix
            << ") who has spent many years on problems exactly like this one. "
            << pseudo_sentences(rng, 18 + rng.bounded(18));
        resp.text = out.str();
        return resp;
    }

    std::string body =
        "Mock answer " + hex_prefix + ". " + pseudo_sentences(rng, 20 + rng.bounded(40));
    if (user_text.find(kExpertAnswerMarker) != std::string::npos && rng.bounded(3) == 0) {
        body = kLeakOpeners[rng.bounded(kLeakOpeners.size())] + body;
    }
    resp.text = std::move(body);
    return resp;
}

}  // namespace expertprompt
