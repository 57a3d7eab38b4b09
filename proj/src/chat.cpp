#include "lqca/chat.hpp"

#include "lqca/errors.hpp"

#include <json.hpp>

#include <cstdlib>

namespace lqca::qa {

using nlohmann::json;

HttpChatModel::HttpChatModel(LlmConfig config) : config_(std::move(config)) {
    if (config_.max_context_tokens < 1) {
        throw ConfigError("max context tokens must be at least 1");
    }
    if (config_.model.empty()) {
        throw ConfigError("no model name configured");
    }
    endpoint_ = http::Endpoint::parse(config_.endpoint);
    options_.timeout = config_.timeout;
    options_.retry = config_.retry;
    if (!config_.api_key_env.empty()) {
        const char* key = std::getenv(config_.api_key_env.c_str());
        if (key == nullptr || *key == '\0') {
            throw ConfigError("environment variable " + config_.api_key_env + " is not set");
        }
        options_.headers.emplace_back("Authorization", std::string("Bearer ") + key);
    }
}

std::string HttpChatModel::request_body(const LlmConfig& config, std::span<const ChatMessage> messages) {
    json msgs = json::array();
    for (const auto& m : messages) {
        msgs.push_back({{"role", m.role}, {"content", m.content}});
    }
    json body = {{"model", config.model}, {"messages", std::move(msgs)}, {"temperature", config.temperature}};
    return body.dump();
}

std::string HttpChatModel::parse_reply(const std::string& body) {
    json parsed = json::parse(body, nullptr, false);
    if (parsed.is_discarded()) {
        throw ParseError("chat completion response is not JSON");
    }
    const auto choices = parsed.find("choices");
    if (choices == parsed.end() || !choices->is_array() || choices->empty()) {
        throw ParseError("chat completion response has no choices");
    }
    const auto& first = (*choices)[0];
    if (!first.contains("message") || !first["message"].contains("content")) {
        throw ParseError("chat completion choice has no message content");
    }
    const auto& text = first["message"]["content"];
    return text.is_string() ? text.get<std::string>() : std::string();
}

std::string HttpChatModel::complete(std::span<const ChatMessage> messages) {
    return parse_reply(http::post_json(endpoint_, "/chat/completions", request_body(config_, messages), options_));
}

} // namespace lqca::qa
