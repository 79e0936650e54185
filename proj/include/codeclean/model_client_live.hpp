#pragma once

// Live chat-completions backend. Kept out of model_client.hpp so only the
// CLI pays for the HTTP stack.

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "codeclean/model_client.hpp"

namespace codeclean {

class LiveClient : public ModelClient {
  public:
    explicit LiveClient(std::string base_url = "https://api.openai.com",
                        std::string path = "/v1/chat/completions")
        : base_url_(std::move(base_url)), path_(std::move(path)) {
        const char* key = std::getenv("MODEL_API_KEY");
        if (!key || !*key)
            throw ModelTransportError("MODEL_API_KEY is not set; required for the live backend");
        api_key_ = key;
    }

  protected:
    std::string do_complete(const PromptSpec& prompt, int /*attempt_index*/) override {
        json body;
        body["model"] = prompt.model_id;
        body["temperature"] = prompt.temperature;
        json messages = json::array();
        if (prompt.system) messages.push_back({{"role", "system"}, {"content", *prompt.system}});
        messages.push_back({{"role", "user"}, {"content", prompt.user}});
        body["messages"] = messages;

        httplib::Client client(base_url_);
        client.set_read_timeout(120, 0);
        httplib::Headers headers = {{"Authorization", "Bearer " + api_key_}};
        auto res = client.Post(path_, headers, body.dump(), "application/json");
        if (!res) throw ModelTransportError("model request failed: " + httplib::to_string(res.error()));
        if (res->status != 200)
            throw ModelTransportError("model request returned HTTP " + std::to_string(res->status) +
                                      ": " + res->body);
        json parsed = json::parse(res->body);
        return parsed.at("choices").at(0).at("message").at("content").get<std::string>();
    }

  private:
    std::string base_url_;
    std::string path_;
    std::string api_key_;
};

}  // namespace codeclean
