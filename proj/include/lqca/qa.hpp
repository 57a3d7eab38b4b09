#pragma once

#include "lqca/chat.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lqca::qa {

enum class PromptMode { vanilla, cot };

struct PromptSpec {
    PromptMode mode = PromptMode::vanilla;
    std::string context;
    std::string question;
    std::vector<std::string> choices; // empty for open-ended questions
};

// Prompt wording. Bump the version whenever any of the strings change so that
// persisted results stay attributable.
inline constexpr std::string_view kTemplateVersion = "v1";
inline constexpr std::string_view kContextHeader = "Context:\n";
inline constexpr std::string_view kQuestionPrefix = "Question: ";
inline constexpr std::string_view kStepByStepCue = "Let's think step by step.";
inline constexpr std::string_view kOpenAnswerCue = "Answer:";
inline constexpr std::string_view kChoiceAnswerCue = "Answer with the letter only.";
inline constexpr std::string_view kEllipsis = "\xE2\x80\xA6"; // U+2026

/// Keeps the first ceil(max/2) and last floor(max/2) tokens, joined by a lone
/// ellipsis token. Text within max_tokens is returned unchanged. Requires
/// max_tokens >= 2.
std::string truncate_middle(std::string_view text, std::size_t max_tokens);

/// One user message: the context block, then the question block ending in
/// the answer cue (the k* constants above give the exact layout). Throws
/// std::invalid_argument on an empty question.
std::vector<ChatMessage> build_prompt(const PromptSpec& spec);

/// build_prompt() after middle-truncating the context so the whole prompt fits
/// in `max_tokens` (the context always keeps at least two tokens).
std::vector<ChatMessage> build_prompt_within(PromptSpec spec, std::size_t max_tokens);

/// Sends the prompt to the configured endpoint with greedy decoding.
std::string ask(std::span<const ChatMessage> prompt, const LlmConfig& config);

struct AskOutcome {
    std::optional<std::string> text;
    std::string error;
};

/// Runs prompts with at most `parallelism` requests in flight. Outcome i
/// belongs to prompt i; failures are captured, not thrown.
std::vector<AskOutcome> ask_batch(ChatModel& model, std::span<const std::vector<ChatMessage>> prompts,
                                  std::size_t parallelism);

} // namespace lqca::qa
