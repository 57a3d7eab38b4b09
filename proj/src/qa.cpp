#include "lqca/qa.hpp"

#include "lqca/text.hpp"

#include <algorithm>
#include <atomic>
#include <stdexcept>
#include <thread>

namespace lqca::qa {

std::string truncate_middle(std::string_view text, std::size_t max_tokens) {
    if (max_tokens < 2) {
        throw std::invalid_argument("middle truncation needs a budget of at least 2 tokens");
    }
    const auto tokens = text::tokenize(text);
    if (tokens.size() <= max_tokens) {
        return std::string(text);
    }
    const std::size_t head = (max_tokens + 1) / 2;
    const std::size_t tail = max_tokens / 2;
    std::string out(text.substr(0, tokens[head - 1].end));
    out.push_back(' ');
    out.append(kEllipsis);
    out.push_back(' ');
    out.append(text.substr(tokens[tokens.size() - tail].start));
    return out;
}

std::vector<ChatMessage> build_prompt(const PromptSpec& spec) {
    if (spec.question.empty()) {
        throw std::invalid_argument("prompt question must not be empty");
    }
    std::string body;
    body.append(kContextHeader);
    body.append(spec.context);
    body.append("\n\n");
    body.append(kQuestionPrefix);
    body.append(spec.question);
    body.push_back('\n');
    for (std::size_t i = 0; i < spec.choices.size(); ++i) {
        body.push_back(static_cast<char>('A' + i));
        body.append(". ");
        body.append(spec.choices[i]);
        body.push_back('\n');
    }
    if (spec.mode == PromptMode::cot) {
        body.append(kStepByStepCue);
        body.push_back('\n');
    }
    body.append(spec.choices.empty() ? kOpenAnswerCue : kChoiceAnswerCue);
    return {{"user", std::move(body)}};
}

std::vector<ChatMessage> build_prompt_within(PromptSpec spec, std::size_t max_tokens) {
    auto skeleton = spec;
    skeleton.context.clear();
    std::size_t overhead = 0;
    for (const auto& m : build_prompt(skeleton)) {
        overhead += text::count_tokens(m.content);
    }
    const std::size_t budget = max_tokens > overhead + 2 ? max_tokens - overhead : 2;
    spec.context = truncate_middle(spec.context, budget);
    return build_prompt(spec);
}

std::string ask(std::span<const ChatMessage> prompt, const LlmConfig& config) {
    HttpChatModel model(config);
    return model.complete(prompt);
}

std::vector<AskOutcome> ask_batch(ChatModel& model, std::span<const std::vector<ChatMessage>> prompts,
                                  std::size_t parallelism) {
    std::vector<AskOutcome> outcomes(prompts.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < prompts.size(); i = next++) {
            try {
                outcomes[i].text = model.complete(prompts[i]);
            } catch (const std::exception& e) {
                outcomes[i].error = e.what();
            }
        }
    };
    const std::size_t workers = std::clamp<std::size_t>(parallelism, 1, std::max<std::size_t>(1, prompts.size()));
    std::vector<std::thread> threads;
    for (std::size_t w = 1; w < workers; ++w) {
        threads.emplace_back(worker);
    }
    worker();
    for (auto& t : threads) {
        t.join();
    }
    return outcomes;
}

} // namespace lqca::qa
