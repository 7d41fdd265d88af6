#include "expertprompt/templates.hpp"

#include <set>

#include "expertprompt/errors.hpp"
#include "expertprompt/hash.hpp"
#include "expertprompt/jsonl.hpp"

namespace expertprompt {

namespace {

constexpr char kSystemPrefix[] = "@system ";

const char* kIdentitySynthesisAsset =
    "For each given instruction, write a description of the agent who is best suited to "
    "answer it. The description should state the agent's identity, profession, expertise, "
    "and relevant experience, and should be detailed and comprehensive enough that the "
    "agent can be pictured vividly. Respond with the description only.\n"
    "\n"
    "{{exemplars}}[Instruction]: {{instruction}}\n"
    "[Agent Description]:";

const char* kExemplarBlockAsset =
    "[Instruction]: {{instruction}}\n"
    "[Agent Description]: {{identity}}\n"
    "\n";

const char* kExpertAnswerAsset =
    "{{identity}}\n"
    "\n"
    "Answer the following instruction as the expert described above.\n"
    "\n"
    "{{instruction}}";

const char* kVanillaAnswerAsset = "{{instruction}}";

const char* kStaticAnswerAsset =
    "Imaging you are an expert in the regarding field, try to answer the following "
    "instruction as professional as possible.\n"
    "{{instruction}}";

const char* kPairwiseJudgeAsset =
    "@system You are a helpful and precise assistant for checking the quality of the answer.\n"
    "[Question]\n"
    "{{question}}\n"
    "\n"
    "[The Start of Assistant 1's Answer]\n"
    "{{answer_1}}\n"
    "[The End of Assistant 1's Answer]\n"
    "\n"
    "[The Start of Assistant 2's Answer]\n"
    "{{answer_2}}\n"
    "[The End of Assistant 2's Answer]\n"
    "\n"
    "We would like to request your feedback on the performance of two AI assistants in "
    "response to the user question displayed above.\n"
    "Please rate the helpfulness, relevance, accuracy, and level of detail of their "
    "responses. Each assistant receives an overall score on a scale of 1 to 10, where a "
    "higher score indicates better overall performance.\n"
    "Please output a single line containing only two values indicating the scores for "
    "Assistant 1 and Assistant 2 respectively, separated by a space. In the subsequent "
    "line, please provide a comprehensive explanation of your evaluation, avoiding any "
    "potential bias and ensuring that the order in which the responses were presented "
    "does not affect your judgment.";

PromptTemplate make_template(const std::string& name, const std::string& asset) {
    PromptTemplate t;
    t.name = name;
    t.digest = content_hash(asset);
    if (asset.rfind(kSystemPrefix, 0) == 0) {
        size_t eol = asset.find('\n');
        if (eol == std::string::npos) {
            eol = asset.size();
        }
        t.system_text = asset.substr(sizeof(kSystemPrefix) - 1, eol - (sizeof(kSystemPrefix) - 1));
        t.body = eol < asset.size() ? asset.substr(eol + 1) : "";
    } else {
        t.body = asset;
    }
    return t;
}

}  // namespace

std::string RenderedPrompt::prompt_text() const {
    if (system_text.empty()) {
        return text;
    }
    return system_text + "\x1e" + text;
}

const std::vector<std::string>& TemplateStore::template_names() {
    static const std::vector<std::string> names = {
        "identity_synthesis", "exemplar_block", "expert_answer",
        "vanilla_answer",     "static_answer",  "pairwise_judge",
    };
    return names;
}

std::string default_template_asset(const std::string& name) {
    if (name == "identity_synthesis") return kIdentitySynthesisAsset;
    if (name == "exemplar_block") return kExemplarBlockAsset;
    if (name == "expert_answer") return kExpertAnswerAsset;
    if (name == "vanilla_answer") return kVanillaAnswerAsset;
    if (name == "static_answer") return kStaticAnswerAsset;
    if (name == "pairwise_judge") return kPairwiseJudgeAsset;
    throw ConfigError("unknown template name: '" + name + "'");
}

TemplateStore TemplateStore::defaults() {
    TemplateStore store;
    for (const auto& name : template_names()) {
        store.templates_[name] = make_template(name, default_template_asset(name));
    }
    return store;
}

TemplateStore TemplateStore::load(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw ConfigError("template directory does not exist: " + dir.string());
    }
    TemplateStore store;
    for (const auto& name : template_names()) {
        std::filesystem::path file = dir / (name + ".txt");
        std::string asset = std::filesystem::exists(file) ? read_text_file(file)
                                                          : default_template_asset(name);
        store.templates_[name] = make_template(name, asset);
    }
    return store;
}

const PromptTemplate& TemplateStore::get(const std::string& name) const {
    auto it = templates_.find(name);
    if (it == templates_.end()) {
        throw ConfigError("unknown template name: '" + name + "'");
    }
    return it->second;
}

std::map<std::string, std::string> TemplateStore::digests() const {
    std::map<std::string, std::string> out;
    for (const auto& [name, tmpl] : templates_) {
        out[name] = tmpl.digest;
    }
    return out;
}

RenderedPrompt render_template(const PromptTemplate& tmpl,
                               const std::map<std::string, std::string>& vars) {
    std::string out;
    out.reserve(tmpl.body.size());
    std::set<std::string> used;

    size_t pos = 0;
    while (pos < tmpl.body.size()) {
        size_t open = tmpl.body.find("{{", pos);
        if (open == std::string::npos) {
            out.append(tmpl.body, pos, std::string::npos);
            break;
        }
        out.append(tmpl.body, pos, open - pos);
        size_t close = tmpl.body.find("}}", open + 2);
        if (close == std::string::npos) {
            throw TemplateError("unterminated placeholder in template '" + tmpl.name + "'");
        }
        std::string key = tmpl.body.substr(open + 2, close - open - 2);
        auto it = vars.find(key);
        if (it == vars.end()) {
            throw TemplateError("unbound placeholder '{{" + key + "}}' in template '" +
                                tmpl.name + "'");
        }
        // Substituted values are emitted verbatim and never re-scanned.
        out += it->second;
        used.insert(key);
        pos = close + 2;
    }

    for (const auto& [key, value] : vars) {
        (void)value;
        if (!used.count(key)) {
            throw TemplateError("variable '" + key + "' has no slot in template '" + tmpl.name +
                                "'");
        }
    }

    RenderedPrompt r;
    r.text = std::move(out);
    r.system_text = tmpl.system_text;
    r.template_digest = tmpl.digest;
    ordered_json var_doc;
    for (const auto& [key, value] : vars) {
        var_doc[key] = value;
    }
    r.variables_digest = content_hash(var_doc.dump());
    return r;
}

RenderedPrompt render_identity_prompt(const TemplateStore& store,
                                      const std::vector<ExemplarPair>& exemplars,
                                      const Instruction& target) {
    if (exemplars.empty()) {
        throw ConfigError("identity synthesis needs at least one exemplar pair");
    }
    std::string blocks;
    const PromptTemplate& block_tmpl = store.get("exemplar_block");
    for (const auto& pair : exemplars) {
        std::string instruction = trim(pair.instruction);
        std::string identity = trim(pair.identity);
        if (instruction.empty() || identity.empty()) {
            throw ValidationError("exemplar pair has an empty field");
        }
        blocks += render_template(block_tmpl,
                                  {{"instruction", instruction}, {"identity", identity}})
                      .text;
    }
    return render_template(store.get("identity_synthesis"),
                           {{"exemplars", blocks}, {"instruction", target.composed_text()}});
}

RenderedPrompt render_expert_prompt(const TemplateStore& store, const ExpertIdentity& identity,
                                    const Instruction& target) {
    if (identity.instruction_id != target.id) {
        throw ValidationError("identity for instruction '" + identity.instruction_id +
                              "' paired with instruction '" + target.id + "'");
    }
    std::string identity_text = trim(identity.identity_text);
    if (identity_text.empty()) {
        throw ValidationError("identity text for instruction '" + target.id + "' is empty");
    }
    return render_template(store.get("expert_answer"),
                           {{"identity", identity_text}, {"instruction", target.composed_text()}});
}

RenderedPrompt render_vanilla_prompt(const TemplateStore& store, const Instruction& target) {
    return render_template(store.get("vanilla_answer"), {{"instruction", target.composed_text()}});
}

RenderedPrompt render_static_prompt(const TemplateStore& store, const Instruction& target) {
    return render_template(store.get("static_answer"), {{"instruction", target.composed_text()}});
}

RenderedPrompt render_judge_prompt(const TemplateStore& store, const Instruction& question,
                                   const std::string& answer_first,
                                   const std::string& answer_second) {
    if (answer_first.empty() || answer_second.empty()) {
        throw ValidationError("judge prompt requires two non-empty answers (instruction '" +
                              question.id + "')");
    }
    return render_template(store.get("pairwise_judge"), {{"question", question.composed_text()},
                                                         {"answer_1", answer_first},
                                                         {"answer_2", answer_second}});
}

}  // namespace expertprompt
