#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "expertprompt/types.hpp"

namespace expertprompt {

/// A prompt template asset. body holds {{placeholder}} markers; an optional
/// leading "@system " line in the asset becomes the chat system message.
/// digest covers the full asset bytes, so any edit changes it.
struct PromptTemplate {
    std::string name;
    std::string body;
    std::string system_text;
    std::string digest;
};

/// The rendered result. prompt_text() is what a backend hashes and sends.
struct RenderedPrompt {
    std::string text;
    std::string system_text;
    std::string template_digest;
    std::string variables_digest;

    /// System and user parts joined with a separator that cannot occur in
    /// either, so distinct (system, user) pairs never collide under hashing.
    std::string prompt_text() const;
};

/// Holds the five pipeline templates plus the exemplar block. Defaults are
/// compiled in; any of them can be replaced by a <name>.txt file in an
/// override directory.
class TemplateStore {
public:
    static const std::vector<std::string>& template_names();

    /// Compiled-in defaults.
    static TemplateStore defaults();

    /// Defaults overridden by any <name>.txt present under dir.
    static TemplateStore load(const std::filesystem::path& dir);

    const PromptTemplate& get(const std::string& name) const;

    /// name -> digest for the run manifest.
    std::map<std::string, std::string> digests() const;

private:
    std::map<std::string, PromptTemplate> templates_;
};

/// Raw default asset text for one template (exactly what assets/templates
/// ships). Throws ConfigError for unknown names.
std::string default_template_asset(const std::string& name);

/// Substitute {{name}} markers. Every placeholder in the body must be bound
/// and every supplied variable must have a slot; violations raise
/// TemplateError rather than rendering silently wrong prompts.
RenderedPrompt render_template(const PromptTemplate& tmpl,
                               const std::map<std::string, std::string>& vars);

/// Few-shot identity-synthesis prompt: k exemplar (instruction, identity)
/// blocks in list order, then the target instruction with the identity slot
/// left open for the model.
RenderedPrompt render_identity_prompt(const TemplateStore& store,
                                      const std::vector<ExemplarPair>& exemplars,
                                      const Instruction& target);

/// Identity-conditioned answer prompt: the expert description, then the
/// instruction. identity.instruction_id must match target.id.
RenderedPrompt render_expert_prompt(const TemplateStore& store, const ExpertIdentity& identity,
                                    const Instruction& target);

/// Bare instruction, no persona content.
RenderedPrompt render_vanilla_prompt(const TemplateStore& store, const Instruction& target);

/// Fixed generic-expert sentence, then the instruction on a new line.
RenderedPrompt render_static_prompt(const TemplateStore& store, const Instruction& target);

/// Pairwise judge prompt: question, two answers labeled Assistant 1 and
/// Assistant 2 in the given order, then scoring instructions that demand two
/// 1-10 scores on the first reply line.
RenderedPrompt render_judge_prompt(const TemplateStore& store, const Instruction& question,
                                   const std::string& answer_first,
                                   const std::string& answer_second);

// Structure markers shared with the deterministic mock backend, which
// dispatches purely on prompt text.
inline constexpr const char* kIdentitySlotMarker = "[Agent Description]:";
inline constexpr const char* kExpertAnswerMarker =
    "Answer the following instruction as the expert described above.";
inline constexpr const char* kJudgeAnswerOneBegin = "[The Start of Assistant 1's Answer]";
inline constexpr const char* kJudgeAnswerOneEnd = "[The End of Assistant 1's Answer]";
inline constexpr const char* kJudgeAnswerTwoBegin = "[The Start of Assistant 2's Answer]";
inline constexpr const char* kJudgeAnswerTwoEnd = "[The End of Assistant 2's Answer]";
inline constexpr const char* kJudgeQuestionLabel = "[Question]";

}  // namespace expertprompt
