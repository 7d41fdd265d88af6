// Compares the serial reference implementations against the OpenMP variants
// on the two data-parallel stages (mock completion batches and the word-count
// kernel) and checks that both produce identical results.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "expertprompt/corpus.hpp"
#include "expertprompt/jsonl.hpp"
#include "expertprompt/mock_backend.hpp"
#include "expertprompt/pipeline.hpp"
#include "expertprompt/word_stats.hpp"

namespace fs = std::filesystem;
using namespace expertprompt;

namespace {

double ms_since(std::chrono::steady_clock::time_point start) {
    auto delta = std::chrono::steady_clock::now() - start;
    return std::chrono::duration<double, std::milli>(delta).count();
}

std::vector<Instruction> synthetic_corpus(size_t n) {
    std::vector<Instruction> corpus;
    corpus.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        Instruction ins;
        char id[16];
        std::snprintf(id, sizeof(id), "%05zu", i);
        ins.id = id;
        ins.instruction = "Explain topic number " + std::to_string(i) +
                          " to a newcomer, with one concrete example.";
        corpus.push_back(std::move(ins));
    }
    return corpus;
}

/// JSONL content with volatile fields removed, for output comparison.
std::string canonical_records(const fs::path& path) {
    std::string out;
    for (auto record : read_jsonl(path)) {
        record.erase("created_at");
        out += record.dump();
        out += '\n';
    }
    return out;
}

void bench_word_kernel() {
    const size_t n_texts = 200000;
    std::vector<std::string> texts;
    texts.reserve(n_texts);
    for (size_t i = 0; i < n_texts; ++i) {
        std::string text;
        const size_t words = 20 + i % 90;
        for (size_t w = 0; w < words; ++w) {
            text += "word" + std::to_string((i + w) % 1000);
            text += (w % 13 == 12) ? "\n" : " ";
        }
        texts.push_back(std::move(text));
    }

    auto t0 = std::chrono::steady_clock::now();
    double serial = avg_word_count(texts, ExecMode::serial);
    double serial_ms = ms_since(t0);

    t0 = std::chrono::steady_clock::now();
    double parallel = avg_word_count(texts, ExecMode::parallel);
    double parallel_ms = ms_since(t0);

    std::printf("word-count kernel over %zu texts\n", n_texts);
    std::printf("  serial   %8.1f ms   avg %s\n", serial_ms, format_avg(serial).c_str());
    std::printf("  parallel %8.1f ms   avg %s\n", parallel_ms, format_avg(parallel).c_str());
    if (serial == parallel) {
        std::printf("  results identical, speedup %.1fx\n\n", serial_ms / parallel_ms);
    } else {
        std::printf("  MISMATCH: %.12f vs %.12f\n\n", serial, parallel);
    }
}

void bench_mock_batch() {
    const size_t n_instructions = 400;
    auto corpus = synthetic_corpus(n_instructions);
    TemplateStore store = TemplateStore::defaults();
    MockBackend backend;

    fs::path dir = fs::temp_directory_path() /
                   ("expertprompt-bench-" + std::to_string(::getpid()));
    fs::create_directories(dir);

    PipelineContext ctx;
    ctx.templates = &store;
    ctx.backend = &backend;
    ctx.corpus_digest = "bench";

    ctx.mode = ExecMode::serial;
    auto t0 = std::chrono::steady_clock::now();
    generate_answers(corpus, Strategy::vanilla, nullptr, ctx, (dir / "serial.jsonl").string());
    double serial_ms = ms_since(t0);

    ctx.mode = ExecMode::parallel;
    ctx.num_threads = 8;
    t0 = std::chrono::steady_clock::now();
    generate_answers(corpus, Strategy::vanilla, nullptr, ctx, (dir / "parallel.jsonl").string());
    double parallel_ms = ms_since(t0);

    const bool identical =
        canonical_records(dir / "serial.jsonl") == canonical_records(dir / "parallel.jsonl");

    std::printf("mock answer batch over %zu instructions\n", n_instructions);
    std::printf("  serial   %8.1f ms\n", serial_ms);
    std::printf("  parallel %8.1f ms   (8 threads)\n", parallel_ms);
    if (identical) {
        std::printf("  outputs identical after timestamp strip, speedup %.1fx\n",
                    serial_ms / parallel_ms);
    } else {
        std::printf("  OUTPUT MISMATCH\n");
    }
    fs::remove_all(dir);
}

}  // namespace

int main() {
    bench_word_kernel();
    bench_mock_batch();
    return 0;
}
