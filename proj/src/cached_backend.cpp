#include "expertprompt/cached_backend.hpp"

#include <cstdio>

#include "expertprompt/errors.hpp"
#include "expertprompt/jsonl.hpp"

namespace expertprompt {

namespace fs = std::filesystem;

CachedBackend::CachedBackend(std::unique_ptr<ChatBackend> inner, BackendKind kind,
                             fs::path cache_dir)
    : inner_(std::move(inner)), kind_(kind), dir_(std::move(cache_dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) {
        throw IoError("cannot create cache directory: " + dir_.string());
    }
}

CompletionResponse CachedBackend::complete(const CompletionRequest& request) {
    std::string key = cache_key(kind_, request);
    fs::path entry = dir_ / (key + ".json");

    if (fs::exists(entry)) {
        try {
            auto doc = read_json_file(entry);
            CompletionResponse resp;
            resp.text = doc.at("text").get<std::string>();
            resp.model = doc.at("model").get<std::string>();
            resp.finish_reason = FinishReason::complete;
            resp.from_cache = true;
            hits_.fetch_add(1);
            return resp;
        } catch (const std::exception& e) {
            std::fprintf(stderr, "warning: corrupt cache entry %s (%s), refetching\n",
                         entry.string().c_str(), e.what());
        }
    }

    misses_.fetch_add(1);
    CompletionResponse resp = inner_->complete(request);
    if (resp.finish_reason == FinishReason::complete) {
        ordered_json doc;
        doc["key"] = key;
        doc["model"] = resp.model;
        doc["text"] = resp.text;
        write_json_file(doc, entry);
    }
    return resp;
}

}  // namespace expertprompt
