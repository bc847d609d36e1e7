#pragma once
// Generic HTTP chat-completion provider. Vendor bindings live behind this
// shell; it is not part of the offline test surface. Credentials are passed
// as environment variable names, never inline.

#include <cstdlib>
#include <string>

#include <httplib.h>

#include "multicod/gateway.hpp"

namespace multicod {

struct HttpProviderConfig {
    std::string base_url;             // e.g. "https://api.example.com"
    std::string path = "/v1/chat/completions";
    std::string model;
    std::string api_key_env;          // name of the env var holding the key
    int timeout_seconds = 120;
};

class HttpProvider : public Provider {
public:
    explicit HttpProvider(HttpProviderConfig config) : config_(std::move(config)) {}

    CompletionResponse complete(const CompletionRequest& request) override {
        httplib::Client client(config_.base_url);
        client.set_read_timeout(config_.timeout_seconds, 0);

        httplib::Headers headers;
        if (!config_.api_key_env.empty()) {
            const char* key = std::getenv(config_.api_key_env.c_str());
            if (key == nullptr) {
                throw GatewayError("credential env var not set: " + config_.api_key_env);
            }
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }

        json body = {
            {"model", config_.model},
            {"temperature", request.temperature},
            {"max_tokens", request.max_tokens},
            {"messages",
             json::array({json{{"role", "system"}, {"content", request.system_prompt}},
                          json{{"role", "user"}, {"content", request.user_prompt}}})},
        };

        const auto start = std::chrono::steady_clock::now();
        auto res = client.Post(config_.path, headers, body.dump(), "application/json");
        if (!res) throw GatewayError("transport error: " + httplib::to_string(res.error()));
        if (res->status != 200) {
            if (res->status == 429) throw GatewayError("provider returned 429");
            throw GatewayError("provider returned status " + std::to_string(res->status));
        }

        json reply = json::parse(res->body);
        CompletionResponse out;
        out.text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
        if (reply.contains("usage") && reply["usage"].contains("completion_tokens")) {
            out.output_tokens = reply["usage"]["completion_tokens"].get<std::int64_t>();
        }
        out.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        out.provider_id = "http:" + config_.model;
        return out;
    }

    std::string id() const override { return "http:" + config_.model; }

private:
    HttpProviderConfig config_;
};

}  // namespace multicod
