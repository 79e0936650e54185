#pragma once

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <json.hpp>

#include "codeclean/prompts.hpp"
#include "codeclean/util.hpp"

namespace codeclean {

struct ModelTransportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Content address of one model call. Attempt index participates so retries
// can differ on live backends while staying replayable from cache.
inline std::string model_call_key(const PromptSpec& prompt, int attempt_index) {
    char temp[32];
    std::snprintf(temp, sizeof(temp), "%.6g", prompt.temperature);
    std::string material = prompt.model_id;
    material += '\x1f';
    material += temp;
    material += '\x1f';
    material += std::to_string(attempt_index);
    material += '\x1f';
    material += prompt.system.value_or("");
    material += '\x1f';
    material += prompt.user;
    return sha256_hex(material);
}

class ModelClient {
  public:
    virtual ~ModelClient() = default;

    std::string complete(const PromptSpec& prompt, int attempt_index) {
        prompt.validate();
        ++issued_;
        return do_complete(prompt, attempt_index);
    }

    size_t completions_issued() const { return issued_.load(); }

  protected:
    virtual std::string do_complete(const PromptSpec& prompt, int attempt_index) = 0;

  private:
    std::atomic<size_t> issued_{0};
};

// Deterministic stand-in completion: echoes the program already inside the
// prompt, wrapping it into a main() entry point for modularization prompts
// and answering plan prompts with a fixed summary. Offline smoke runs pass
// every stage with it. The wrap is line-based and only safe for the simple
// straight-line fixture programs it is used with.
inline std::string echo_completion(const PromptSpec& prompt, int /*attempt_index*/) {
    if (prompt.user.find("Generate a summary") != std::string::npos)
        return "The program reads the input, computes the answer, and prints it.";
    std::string body = extract_code_block(prompt.user);
    bool modularize = prompt.user.find("entry function called") != std::string::npos ||
                      prompt.user.find("decompose the following function(s)") != std::string::npos;
    if (!modularize) return "```python\n" + body + "\n```\n";
    std::string wrapped = "def main():\n";
    for (const auto& line : split_lines(body))
        wrapped += line.empty() ? "\n" : "    " + line + "\n";
    wrapped += "\nif __name__ == '__main__':\n    main()\n";
    return "```python\n" + wrapped + "```\n";
}

// Scripted in-process backend; deterministic given (prompt, attempt_index).
class MockClient : public ModelClient {
  public:
    using Script = std::function<std::string(const PromptSpec&, int attempt_index)>;

    explicit MockClient(Script script) : script_(std::move(script)) {}

    static std::unique_ptr<MockClient> echo() {
        return std::make_unique<MockClient>(&echo_completion);
    }

  protected:
    std::string do_complete(const PromptSpec& prompt, int attempt_index) override {
        return script_(prompt, attempt_index);
    }

  private:
    Script script_;
};

// File-scripted backend: JSONL rules {"contains": str, "attempt": int?,
// "response": str}; the first rule whose substring matches the prompt (and
// whose attempt, when present, matches) wins.
class ScriptFileClient : public ModelClient {
  public:
    explicit ScriptFileClient(const std::filesystem::path& path) {
        detail::for_each_jsonl_line(path, [&](const std::string& line) {
            if (strip(line).empty()) return;
            json j = json::parse(line);
            Rule rule;
            rule.contains = j.value("contains", "");
            if (j.contains("attempt")) rule.attempt = j["attempt"].get<int>();
            rule.response = detail::require_field(j, "response").get<std::string>();
            rules_.push_back(std::move(rule));
        });
    }

  protected:
    std::string do_complete(const PromptSpec& prompt, int attempt_index) override {
        for (const auto& rule : rules_) {
            if (rule.attempt && *rule.attempt != attempt_index) continue;
            if (!rule.contains.empty() && prompt.user.find(rule.contains) == std::string::npos)
                continue;
            return rule.response;
        }
        throw ModelTransportError("script has no rule for this prompt/attempt");
    }

  private:
    struct Rule {
        std::string contains;
        std::optional<int> attempt;
        std::string response;
    };
    std::vector<Rule> rules_;
};

// On-disk response cache, one JSON file per call key. Concurrent readers are
// free; inserts go through a temp file + rename so a partial write is never
// visible.
class CallCache {
  public:
    explicit CallCache(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
    }

    std::optional<std::string> get(const std::string& key) const {
        auto path = dir_ / (key + ".json");
        if (!std::filesystem::exists(path)) return std::nullopt;
        json j = json::parse(read_file(path));
        return j.at("response").get<std::string>();
    }

    void put(const std::string& key, const PromptSpec& prompt, int attempt_index,
             const std::string& response) {
        json j;
        j["model_id"] = prompt.model_id;
        j["temperature"] = prompt.temperature;
        j["attempt_index"] = attempt_index;
        if (prompt.system) j["system"] = *prompt.system;
        j["user"] = prompt.user;
        j["response"] = response;
        std::lock_guard<std::mutex> lock(write_mutex_);
        atomic_write_file(dir_ / (key + ".json"), j.dump(2) + "\n");
    }

    const std::filesystem::path& dir() const { return dir_; }

  private:
    std::filesystem::path dir_;
    mutable std::mutex write_mutex_;
};

// Cache-through wrapper. With a backend it records every response; without
// one it replays fixtures and treats a miss as a transport error.
class CachingClient : public ModelClient {
  public:
    CachingClient(std::shared_ptr<CallCache> cache, std::unique_ptr<ModelClient> backend)
        : cache_(std::move(cache)), backend_(std::move(backend)) {}

    size_t cache_hits() const { return hits_.load(); }
    size_t cache_misses() const { return misses_.load(); }
    size_t backend_completions() const { return backend_ ? backend_->completions_issued() : 0; }

  protected:
    std::string do_complete(const PromptSpec& prompt, int attempt_index) override {
        std::string key = model_call_key(prompt, attempt_index);
        if (auto hit = cache_->get(key)) {
            ++hits_;
            return *hit;
        }
        ++misses_;
        if (!backend_) throw ModelTransportError("fixture cache miss: " + key);
        std::string response = backend_->complete(prompt, attempt_index);
        cache_->put(key, prompt, attempt_index, response);
        return response;
    }

  private:
    std::shared_ptr<CallCache> cache_;
    std::unique_ptr<ModelClient> backend_;
    std::atomic<size_t> hits_{0};
    std::atomic<size_t> misses_{0};
};

}  // namespace codeclean
