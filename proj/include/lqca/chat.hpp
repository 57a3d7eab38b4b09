#pragma once

#include "lqca/http.hpp"

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace lqca::qa {

struct ChatMessage {
    std::string role; // "system" | "user" | "assistant"
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

struct LlmConfig {
    std::string endpoint = "https://api.openai.com/v1";
    std::string model = "gpt-4o-2024-08-06";
    std::size_t max_context_tokens = 128000;
    double temperature = 0.0; // greedy
    std::string api_key_env = "OPENAI_API_KEY";
    std::chrono::milliseconds timeout{120000};
    http::RetryPolicy retry;
    std::size_t parallelism = 1;
};

/// Anything that turns a message sequence into a reply.
class ChatModel {
public:
    virtual ~ChatModel() = default;
    virtual std::string complete(std::span<const ChatMessage> messages) = 0;
};

/// OpenAI-compatible `POST {endpoint}/chat/completions` client.
class HttpChatModel final : public ChatModel {
public:
    /// Validates the config and reads the API key; throws ConfigError before
    /// any request is made when the key variable is unset.
    explicit HttpChatModel(LlmConfig config);

    std::string complete(std::span<const ChatMessage> messages) override;

    static std::string request_body(const LlmConfig& config, std::span<const ChatMessage> messages);
    static std::string parse_reply(const std::string& body);

private:
    LlmConfig config_;
    http::Endpoint endpoint_;
    http::RequestOptions options_;
};

} // namespace lqca::qa
