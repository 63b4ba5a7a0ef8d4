#pragma once

#include <cstdlib>
#include <memory>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "desksim/gateway.hpp"

namespace desksim {

// Adapter for OpenAI-style chat completion endpoints. One prompt becomes a
// single user message; the first choice's message content is the raw reply.
class HttpBackend : public Backend {
 public:
  struct Config {
    std::string base_url;                       // e.g. https://api.example.com
    std::string path = "/v1/chat/completions";  // endpoint path
    std::string model;                          // provider model name
    std::string api_key_env;                    // env var holding the bearer token
    int timeout_seconds = 60;
  };

  explicit HttpBackend(Config config) : config_(std::move(config)) {
    if (config_.base_url.empty()) throw ConfigError("http backend requires a base_url");
  }

  // Fails fast (no retry) when the configured credential is absent.
  std::string api_key() const {
    if (config_.api_key_env.empty()) return {};
    const char* value = std::getenv(config_.api_key_env.c_str());
    if (value == nullptr || *value == '\0')
      throw ConfigError("environment variable " + config_.api_key_env + " is not set");
    return value;
  }

  std::string complete(const std::string& prompt, const SamplingParams& sampling) override {
    nlohmann::json body = {
        {"model", config_.model},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
        {"temperature", sampling.temperature},
        {"max_tokens", sampling.max_output},
    };

    // httplib clients are not safe for concurrent use; a fresh client per
    // call keeps the backend shareable across worker threads.
    httplib::Client client(config_.base_url);
    client.set_connection_timeout(config_.timeout_seconds, 0);
    client.set_read_timeout(config_.timeout_seconds, 0);
    httplib::Headers headers;
    if (!config_.api_key_env.empty()) headers.emplace("Authorization", "Bearer " + api_key());

    auto res = client.Post(config_.path, headers, body.dump(), "application/json");
    if (!res) {
      throw TransientBackendError("request to " + config_.base_url + " failed: " +
                                  httplib::to_string(res.error()));
    }
    if (res->status == 429) throw RateLimited("429 from " + config_.base_url);
    if (res->status >= 500) {
      throw TransientBackendError("status " + std::to_string(res->status) + " from " + config_.base_url);
    }
    if (res->status != 200) {
      throw BackendUnavailable("status " + std::to_string(res->status) + " from " + config_.base_url +
                               ": " + res->body.substr(0, 200));
    }

    nlohmann::json payload;
    try {
      payload = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw BackendUnavailable(std::string("unparsable provider response: ") + e.what());
    }
    if (payload.contains("model") && payload["model"].is_string()) {
      reported_model_ = payload["model"].get<std::string>();
    }
    if (!payload.contains("choices") || !payload["choices"].is_array() || payload["choices"].empty()) {
      throw EmptyResponse("provider response has no choices");
    }
    const auto& message = payload["choices"][0]["message"];
    if (!message.contains("content") || message["content"].is_null()) {
      throw EmptyResponse("provider response has no message content");
    }
    return message["content"].get<std::string>();
  }

  std::string kind() const override { return "http"; }

  std::string model_id() const override {
    return reported_model_.empty() ? config_.model : reported_model_;
  }

  const Config& config() const { return config_; }

 private:
  Config config_;
  std::string reported_model_;
};

}  // namespace desksim
