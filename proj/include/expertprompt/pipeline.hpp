#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "expertprompt/backend.hpp"
#include "expertprompt/batch_runner.hpp"
#include "expertprompt/templates.hpp"
#include "expertprompt/types.hpp"

namespace expertprompt {

struct GenerationParams {
    std::string model = "gpt-3.5-turbo";
    double temperature = 0.7;
    int max_output_tokens = 1024;
};

/// Synthesizes an expert identity for `target` by few-shot prompting: the
/// exemplar pairs are prepended to the target instruction and the completion
/// (trimmed) becomes the identity text. Throws BackendExhaustedError when the
/// backend gives up, ProtocolError when it returns an empty identity.
ExpertIdentity synthesize_identity(const Instruction& target,
                                   const std::vector<ExemplarPair>& exemplars,
                                   const TemplateStore& store, ChatBackend& backend,
                                   const GenerationParams& params,
                                   CompletionResponse* response_out = nullptr);

/// Produces one answer record for `target` under `strategy`. `identity` must
/// be non-null exactly when strategy == expert; expert answers get the leak
/// filter applied to form clean_text, other strategies copy raw_text.
AnswerRecord generate_answer(const Instruction& target, Strategy strategy,
                             const ExpertIdentity* identity, const TemplateStore& store,
                             ChatBackend& backend, const GenerationParams& params,
                             CompletionResponse* response_out = nullptr);

struct PipelineContext {
    const TemplateStore* templates = nullptr;
    ChatBackend* backend = nullptr;
    GenerationParams params;
    ExecMode mode = ExecMode::serial;
    int num_threads = 4;
    std::string corpus_digest;
};

/// Batch identity synthesis over the corpus: one record per instruction,
/// resumable, with instructions sharing identical text synthesized once and
/// the result shared.
BatchSummary synthesize_identities(const std::vector<Instruction>& corpus,
                                   const std::vector<ExemplarPair>& exemplars,
                                   const PipelineContext& ctx, const std::string& output_path);

/// Batch answer generation for one strategy. `identities` is keyed by
/// instruction_id and must cover the whole corpus when strategy == expert;
/// it must be null otherwise.
BatchSummary generate_answers(const std::vector<Instruction>& corpus, Strategy strategy,
                              const std::unordered_map<std::string, ExpertIdentity>* identities,
                              const PipelineContext& ctx, const std::string& output_path);

/// The three built-in demonstration pairs for identity synthesis (health
/// advice, physics explanation, creative writing). assets/exemplars.jsonl
/// ships the same pairs.
std::vector<ExemplarPair> default_exemplars();

/// Loads exemplar pairs from a JSONL file of {instruction, identity}
/// objects. Empty files and empty fields are rejected.
std::vector<ExemplarPair> read_exemplars(const std::string& path);

/// Loads an identities file into an id-keyed map. Duplicate ids are rejected.
std::unordered_map<std::string, ExpertIdentity> read_identities(const std::string& path);

/// Loads an answers file into an id-keyed map. Duplicate ids are rejected;
/// records may carry extra fields (ignored).
std::unordered_map<std::string, AnswerRecord> read_answers(const std::string& path);

}  // namespace expertprompt
