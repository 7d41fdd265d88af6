#include "expertprompt/pipeline.hpp"

#include <future>
#include <mutex>
#include <sstream>

#include "expertprompt/errors.hpp"
#include "expertprompt/hash.hpp"
#include "expertprompt/jsonl.hpp"
#include "expertprompt/leak_filter.hpp"

namespace expertprompt {

namespace {

CompletionResponse run_completion(ChatBackend& backend, const RenderedPrompt& prompt,
                                  const GenerationParams& params, const std::string& tag) {
    CompletionRequest request;
    request.prompt = prompt;
    request.model = params.model;
    request.temperature = params.temperature;
    request.max_output_tokens = params.max_output_tokens;
    request.request_tag = tag;
    CompletionResponse response = backend.complete(request);
    if (response.finish_reason == FinishReason::error) {
        throw BackendExhaustedError(response.error.empty() ? "backend returned an error"
                                                           : response.error);
    }
    return response;
}

}  // namespace

ExpertIdentity synthesize_identity(const Instruction& target,
                                   const std::vector<ExemplarPair>& exemplars,
                                   const TemplateStore& store, ChatBackend& backend,
                                   const GenerationParams& params,
                                   CompletionResponse* response_out) {
    RenderedPrompt prompt = render_identity_prompt(store, exemplars, target);
    CompletionResponse response =
        run_completion(backend, prompt, params, "identity:" + target.id);
    std::string identity_text = trim(response.text);
    if (identity_text.empty()) {
        throw ProtocolError("backend returned an empty identity for instruction " + target.id,
                            response.text);
    }
    ExpertIdentity identity;
    identity.instruction_id = target.id;
    identity.identity_text = identity_text;
    identity.source_model = response.model;
    identity.prompt_hash = content_hash(prompt.prompt_text());
    if (response_out != nullptr) {
        *response_out = response;
    }
    return identity;
}

AnswerRecord generate_answer(const Instruction& target, Strategy strategy,
                             const ExpertIdentity* identity, const TemplateStore& store,
                             ChatBackend& backend, const GenerationParams& params,
                             CompletionResponse* response_out) {
    if (strategy == Strategy::expert && identity == nullptr) {
        throw ValidationError("expert strategy requires an identity for instruction " + target.id);
    }
    if (strategy != Strategy::expert && identity != nullptr) {
        throw ValidationError("strategy " + to_string(strategy) +
                              " must not be given an identity (instruction " + target.id + ")");
    }

    RenderedPrompt prompt;
    switch (strategy) {
        case Strategy::expert:
            prompt = render_expert_prompt(store, *identity, target);
            break;
        case Strategy::vanilla:
            prompt = render_vanilla_prompt(store, target);
            break;
        case Strategy::static_desc:
            prompt = render_static_prompt(store, target);
            break;
    }

    CompletionResponse response = run_completion(
        backend, prompt, params, to_string(strategy) + ":" + target.id);

    AnswerRecord record;
    record.instruction_id = target.id;
    record.strategy = strategy;
    record.raw_text = response.text;
    record.clean_text =
        strategy == Strategy::expert ? strip_identity_leak(response.text) : response.text;
    record.source_model = response.model;
    record.prompt_hash = content_hash(prompt.prompt_text());
    record.created_at = now_iso8601();
    if (response_out != nullptr) {
        *response_out = response;
    }
    return record;
}

namespace {

struct SharedIdentity {
    ExpertIdentity identity;
    bool from_cache = false;
};

/// One synthesis per unique instruction text, shared across duplicate
/// instructions even when they run concurrently. A failed owner clears its
/// slot so the retry pass can try again.
class IdentityMemo {
  public:
    SharedIdentity get_or_synthesize(const Instruction& target,
                                     const std::function<SharedIdentity()>& synthesize) {
        const std::string key = content_hash(target.composed_text());
        std::promise<SharedIdentity> promise;
        std::shared_future<SharedIdentity> future;
        bool owner = false;
        {
            std::lock_guard<std::mutex> lock(mutex_);
            auto it = slots_.find(key);
            if (it == slots_.end()) {
                future = promise.get_future().share();
                slots_[key] = future;
                owner = true;
            } else {
                future = it->second;
            }
        }
        if (owner) {
            try {
                SharedIdentity value = synthesize();
                promise.set_value(value);
            } catch (...) {
                {
                    std::lock_guard<std::mutex> lock(mutex_);
                    slots_.erase(key);
                }
                promise.set_exception(std::current_exception());
            }
        } else {
            SharedIdentity shared = future.get();
            shared.from_cache = true;
            return shared;
        }
        return future.get();
    }

  private:
    std::mutex mutex_;
    std::unordered_map<std::string, std::shared_future<SharedIdentity>> slots_;
};

const Instruction& instruction_by_id(
    const std::vector<Instruction>& corpus,
    const std::unordered_map<std::string, size_t>& index, const std::string& id) {
    auto it = index.find(id);
    if (it == index.end()) {
        throw ValidationError("unknown instruction id: " + id);
    }
    return corpus[it->second];
}

std::unordered_map<std::string, size_t> index_by_id(const std::vector<Instruction>& corpus) {
    std::unordered_map<std::string, size_t> index;
    index.reserve(corpus.size());
    for (size_t i = 0; i < corpus.size(); ++i) {
        index[corpus[i].id] = i;
    }
    return index;
}

void check_context(const PipelineContext& ctx) {
    if (ctx.templates == nullptr || ctx.backend == nullptr) {
        throw ConfigError("pipeline context is missing templates or backend");
    }
}

}  // namespace

BatchSummary synthesize_identities(const std::vector<Instruction>& corpus,
                                   const std::vector<ExemplarPair>& exemplars,
                                   const PipelineContext& ctx, const std::string& output_path) {
    check_context(ctx);
    if (exemplars.empty()) {
        throw ConfigError("identity synthesis requires at least one exemplar pair");
    }
    auto index = index_by_id(corpus);
    auto memo = std::make_shared<IdentityMemo>();

    std::vector<std::string> ids;
    ids.reserve(corpus.size());
    for (const auto& instruction : corpus) {
        ids.push_back(instruction.id);
    }

    BatchItemFn item_fn = [&, memo](const std::string& id) -> BatchItemResult {
        const Instruction& target = instruction_by_id(corpus, index, id);
        BatchItemResult result;
        try {
            SharedIdentity shared = memo->get_or_synthesize(target, [&]() {
                CompletionResponse response;
                SharedIdentity fresh;
                fresh.identity =
                    synthesize_identity(target, exemplars, *ctx.templates, *ctx.backend,
                                        ctx.params, &response);
                fresh.from_cache = response.from_cache;
                return fresh;
            });
            ExpertIdentity identity = shared.identity;
            identity.instruction_id = target.id;
            result.record = to_json(identity);
            result.from_cache = shared.from_cache;
        } catch (const BackendExhaustedError& e) {
            result.error = e.what();
        } catch (const ProtocolError& e) {
            result.error = e.what();
        }
        return result;
    };

    BatchOptions options;
    options.output_path = output_path;
    options.corpus_digest = ctx.corpus_digest;
    options.mode = ctx.mode;
    options.num_threads = ctx.num_threads;
    return run_batch(ids, item_fn, options);
}

BatchSummary generate_answers(const std::vector<Instruction>& corpus, Strategy strategy,
                              const std::unordered_map<std::string, ExpertIdentity>* identities,
                              const PipelineContext& ctx, const std::string& output_path) {
    check_context(ctx);
    if (strategy == Strategy::expert) {
        if (identities == nullptr) {
            throw ConfigError("expert generation requires an identities file");
        }
        std::vector<std::string> missing;
        for (const auto& instruction : corpus) {
            if (identities->count(instruction.id) == 0) {
                missing.push_back(instruction.id);
                if (missing.size() >= 5) {
                    break;
                }
            }
        }
        if (!missing.empty()) {
            std::ostringstream msg;
            msg << "identities file is missing " << (missing.size() >= 5 ? "at least " : "")
                << missing.size() << " instruction id(s):";
            for (const auto& id : missing) {
                msg << ' ' << id;
            }
            throw ValidationError(msg.str());
        }
    } else if (identities != nullptr) {
        throw ConfigError("strategy " + to_string(strategy) + " does not take identities");
    }

    auto index = index_by_id(corpus);
    std::vector<std::string> ids;
    ids.reserve(corpus.size());
    for (const auto& instruction : corpus) {
        ids.push_back(instruction.id);
    }

    BatchItemFn item_fn = [&](const std::string& id) -> BatchItemResult {
        const Instruction& target = instruction_by_id(corpus, index, id);
        BatchItemResult result;
        try {
            const ExpertIdentity* identity =
                strategy == Strategy::expert ? &identities->at(id) : nullptr;
            CompletionResponse response;
            AnswerRecord record = generate_answer(target, strategy, identity, *ctx.templates,
                                                  *ctx.backend, ctx.params, &response);
            result.record = to_json(record);
            result.from_cache = response.from_cache;
        } catch (const BackendExhaustedError& e) {
            result.error = e.what();
        } catch (const ProtocolError& e) {
            result.error = e.what();
        }
        return result;
    };

    BatchOptions options;
    options.output_path = output_path;
    options.corpus_digest = ctx.corpus_digest;
    options.mode = ctx.mode;
    options.num_threads = ctx.num_threads;
    return run_batch(ids, item_fn, options);
}

std::vector<ExemplarPair> default_exemplars() {
    return {
        {"Give me some health and diet tips for someone working at a desk all day.",
         "You are a certified nutritionist and occupational health consultant with over a "
         "decade of experience designing diet and wellness plans for office workers. You "
         "understand the metabolic effects of sedentary work and give practical, "
         "evidence-based advice that fits into a busy schedule."},
        {"Describe the structure of an atom.",
         "You are a physicist specializing in atomic structure, with years of experience "
         "teaching introductory physics at university level. You explain subatomic "
         "particles, electron shells and nuclear forces with precise yet accessible "
         "language, often using vivid analogies."},
        {"Write a short story about a lighthouse keeper who discovers a message in a bottle.",
         "You are an accomplished fiction writer and creative writing mentor who has "
         "published several collections of short stories. You craft atmospheric scenes, "
         "believable characters and satisfying narrative arcs, and you tailor tone and "
         "pacing to the prompt at hand."},
    };
}

std::vector<ExemplarPair> read_exemplars(const std::string& path) {
    auto pairs = read_records<ExemplarPair>(path);
    if (pairs.empty()) {
        throw ConfigError("exemplar file has no records: " + path);
    }
    for (size_t i = 0; i < pairs.size(); ++i) {
        if (trim(pairs[i].instruction).empty() || trim(pairs[i].identity).empty()) {
            throw ValidationError("exemplar " + std::to_string(i + 1) + " in " + path +
                                  " has an empty field");
        }
    }
    return pairs;
}

std::unordered_map<std::string, ExpertIdentity> read_identities(const std::string& path) {
    auto records = read_records<ExpertIdentity>(path);
    std::unordered_map<std::string, ExpertIdentity> by_id;
    by_id.reserve(records.size());
    for (auto& record : records) {
        const std::string id = record.instruction_id;
        if (!by_id.emplace(id, std::move(record)).second) {
            throw ValidationError("duplicate instruction id in identities file: " + id);
        }
    }
    return by_id;
}

std::unordered_map<std::string, AnswerRecord> read_answers(const std::string& path) {
    auto records = read_records<AnswerRecord>(path);
    std::unordered_map<std::string, AnswerRecord> by_id;
    by_id.reserve(records.size());
    for (auto& record : records) {
        const std::string id = record.instruction_id;
        if (!by_id.emplace(id, std::move(record)).second) {
            throw ValidationError("duplicate instruction id in answers file: " + id);
        }
    }
    return by_id;
}

}  // namespace expertprompt
