#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include <unistd.h>

#include "expertprompt/backend.hpp"
#include "expertprompt/clock.hpp"
#include "expertprompt/jsonl.hpp"
#include "expertprompt/rng.hpp"
#include "expertprompt/types.hpp"

namespace test_util {

/// Unique temp directory removed on destruction.
class TempDir {
  public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("expertprompt-test-" + tag + "-" + std::to_string(::getpid()) + "-" +
                 std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

  private:
    std::filesystem::path path_;
};

/// JSONL content with created_at removed, for byte-comparison of outputs.
inline std::string canonical_jsonl(const std::filesystem::path& path) {
    std::string out;
    for (auto record : expertprompt::read_jsonl(path)) {
        record.erase("created_at");
        out += record.dump();
        out += '\n';
    }
    return out;
}

/// Independent word-count oracle: its own byte-level UTF-8 decoder and its
/// own whitespace table, structured as boundary-transition counting rather
/// than run scanning.
inline size_t oracle_word_count(const std::string& text) {
    static const std::set<uint32_t> spaces = {
        0x09, 0x0A, 0x0B, 0x0C, 0x0D, 0x20, 0x85, 0xA0, 0x1680, 0x2000, 0x2001, 0x2002,
        0x2003, 0x2004, 0x2005, 0x2006, 0x2007, 0x2008, 0x2009, 0x200A, 0x2028, 0x2029,
        0x202F, 0x205F, 0x3000};
    std::vector<uint32_t> codepoints;
    size_t i = 0;
    while (i < text.size()) {
        unsigned char b = static_cast<unsigned char>(text[i]);
        uint32_t cp = 0;
        size_t len = 1;
        if (b < 0x80) {
            cp = b;
        } else if ((b >> 5) == 0x6) {
            cp = b & 0x1F;
            len = 2;
        } else if ((b >> 4) == 0xE) {
            cp = b & 0x0F;
            len = 3;
        } else if ((b >> 3) == 0x1E) {
            cp = b & 0x07;
            len = 4;
        } else {
            cp = 0xFFFD;
        }
        if (len > 1) {
            if (i + len > text.size()) {
                cp = 0xFFFD;
                len = 1;
            } else {
                bool valid = true;
                uint32_t acc = cp;
                for (size_t k = 1; k < len; ++k) {
                    unsigned char cont = static_cast<unsigned char>(text[i + k]);
                    if ((cont >> 6) != 0x2) {
                        valid = false;
                        break;
                    }
                    acc = (acc << 6) | (cont & 0x3F);
                }
                if (valid) {
                    cp = acc;
                } else {
                    cp = 0xFFFD;
                    len = 1;
                }
            }
        }
        codepoints.push_back(cp);
        i += len;
    }
    size_t words = 0;
    bool prev_space = true;
    for (uint32_t cp : codepoints) {
        bool space = spaces.count(cp) != 0;
        if (prev_space && !space) {
            ++words;
        }
        prev_space = space;
    }
    return words;
}

/// Backend whose reply is computed by a user-supplied function. Counts calls.
class ScriptedBackend : public expertprompt::ChatBackend {
  public:
    using Fn = std::function<expertprompt::CompletionResponse(
        const expertprompt::CompletionRequest&, uint64_t call_index)>;

    explicit ScriptedBackend(Fn fn) : fn_(std::move(fn)) {}

    /// Convenience: always reply with the same text.
    static ScriptedBackend fixed(const std::string& text) {
        return ScriptedBackend([text](const expertprompt::CompletionRequest& req, uint64_t) {
            expertprompt::CompletionResponse r;
            r.text = text;
            r.model = req.model;
            return r;
        });
    }

    expertprompt::CompletionResponse complete(
        const expertprompt::CompletionRequest& request) override {
        uint64_t index = calls_.fetch_add(1);
        return fn_(request, index);
    }
    uint64_t calls() const override { return calls_.load(); }
    std::string descriptor() const override { return "scripted"; }

  private:
    Fn fn_;
    std::atomic<uint64_t> calls_{0};
};

/// Manual clock: now() returns an internal instant that only sleep_for
/// advances. Records total sleep.
class FakeClock : public expertprompt::Clock {
  public:
    std::chrono::steady_clock::time_point now() override {
        std::lock_guard<std::mutex> lock(mu_);
        return now_;
    }
    void sleep_for(std::chrono::milliseconds d) override {
        std::lock_guard<std::mutex> lock(mu_);
        now_ += d;
        slept_ms_ += d.count();
    }
    long long slept_ms() const {
        std::lock_guard<std::mutex> lock(mu_);
        return slept_ms_;
    }

  private:
    mutable std::mutex mu_;
    std::chrono::steady_clock::time_point now_ = std::chrono::steady_clock::time_point{} +
                                                 std::chrono::hours(1);
    long long slept_ms_ = 0;
};

inline std::vector<expertprompt::Instruction> make_corpus(size_t n, const std::string& salt = "") {
    std::vector<expertprompt::Instruction> corpus;
    corpus.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        expertprompt::Instruction ins;
        char id[16];
        std::snprintf(id, sizeof(id), "%05zu", i);
        ins.id = id;
        ins.instruction =
            "Explain topic " + std::to_string(i) + salt + " with one concrete example.";
        if (i % 5 == 0) {
            ins.input = "Aim the answer at a newcomer to area " + std::to_string(i) + ".";
        }
        corpus.push_back(std::move(ins));
    }
    return corpus;
}

/// Random text built from words and a mixed whitespace alphabet, including
/// multi-byte Unicode spaces and occasional malformed bytes.
inline std::string random_text(expertprompt::SeededRng& rng, bool include_malformed = false) {
    static const std::vector<std::string> separators = {
        " ",   "  ",  "\t", "\n", "\r\n", "\xc2\xa0",      // NBSP
        "\xe2\x80\x89",                                     // thin space
        "\xe3\x80\x80",                                     // ideographic space
        "\xe2\x80\xa8",                                     // line separator
    };
    static const std::vector<std::string> words = {
        "alpha", "beta",  "gamma", "delta",   "epsilon", "zeta",
        "eta",   "theta", "iota",  "k\xc3\xa4se",         // non-ASCII letters
        "\xe6\xbc\xa2\xe5\xad\x97",                        // CJK word
        "x",     "42",    "a1b2",
    };
    std::string out;
    const size_t n_words = rng.bounded(40);
    if (rng.bounded(3) == 0) {
        out += separators[rng.bounded(separators.size())];
    }
    for (size_t w = 0; w < n_words; ++w) {
        out += words[rng.bounded(words.size())];
        if (include_malformed && rng.bounded(15) == 0) {
            out += static_cast<char>(0xC3);  // dangling lead byte
        }
        out += separators[rng.bounded(separators.size())];
    }
    if (rng.bounded(3) == 0 && !out.empty()) {
        out.pop_back();
    }
    return out;
}

}  // namespace test_util
