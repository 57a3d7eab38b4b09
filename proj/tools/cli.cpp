#include "cli.hpp"

#include "settings.hpp"

#include "lqca/errors.hpp"
#include "lqca/eval.hpp"
#include "lqca/pipeline.hpp"
#include "lqca/qa.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>

namespace lqca::cli {
namespace {

// Flag values; unset ones leave the config-file or default value alone.
struct Flags {
    std::optional<std::string> config;
    std::optional<std::size_t> max_chunk_tokens;
    std::optional<double> threshold;
    std::optional<std::string> chunk_mode;
    std::optional<std::string> resolver;
    std::optional<std::string> resolver_endpoint;
    std::optional<std::string> tagger;
    std::optional<std::string> tagger_endpoint;
    std::optional<std::size_t> parallelism;

    std::optional<std::string> endpoint;
    std::optional<std::string> model;
    std::optional<std::size_t> max_context_tokens;
    std::optional<std::string> api_key_env;
    std::optional<int> retries;
    std::optional<std::string> mode;
    std::optional<std::string> adapter;
};

void add_pipeline_flags(CLI::App& cmd, Flags& f) {
    cmd.add_option("--config", f.config, "INI config file ([pipeline], [llm], [run])");
    cmd.add_option("--max-chunk-tokens", f.max_chunk_tokens, "Chunk token budget (default 512)");
    cmd.add_option("--threshold,--k", f.threshold, "Edge threshold on mention distance (default 0.9)");
    cmd.add_option("--chunk-mode", f.chunk_mode, "sliding | non_overlap");
    cmd.add_option("--resolver", f.resolver, "builtin | wire | llm");
    cmd.add_option("--resolver-endpoint", f.resolver_endpoint, "Base URL of the /resolve service");
    cmd.add_option("--tagger", f.tagger, "builtin | wire");
    cmd.add_option("--tagger-endpoint", f.tagger_endpoint, "Base URL of the /tag service");
    cmd.add_option("--parallelism", f.parallelism, "Concurrent resolver calls");
}

void add_llm_flags(CLI::App& cmd, Flags& f) {
    cmd.add_option("--endpoint", f.endpoint, "OpenAI-compatible base URL, e.g. http://localhost:8000/v1");
    cmd.add_option("--model", f.model, "Model name");
    cmd.add_option("--max-context-tokens", f.max_context_tokens, "Prompt budget before middle truncation");
    cmd.add_option("--api-key-env", f.api_key_env, "Environment variable holding the API key (empty: none)");
    cmd.add_option("--retries", f.retries, "Retries on 429/5xx/connection errors");
    cmd.add_option("--mode,--prompt-mode", f.mode, "lqca | vanilla | cot");
}

Settings resolve_settings(const Flags& f) {
    Settings s;
    if (f.config) {
        s = load_settings_file(*f.config, s);
    }
    auto& p = s.pipeline;
    if (f.max_chunk_tokens) p.chunk.max_tokens = *f.max_chunk_tokens;
    if (f.threshold) p.threshold = *f.threshold;
    if (f.chunk_mode) p.chunk.mode = parse_chunk_mode(*f.chunk_mode);
    if (f.resolver) p.resolver = parse_resolver(*f.resolver);
    if (f.resolver_endpoint) p.resolver_endpoint = *f.resolver_endpoint;
    if (f.tagger) p.tagger = parse_tagger(*f.tagger);
    if (f.tagger_endpoint) p.tagger_endpoint = *f.tagger_endpoint;
    if (f.parallelism) p.parallelism = *f.parallelism;
    if (f.endpoint) s.llm.endpoint = *f.endpoint;
    if (f.model) s.llm.model = *f.model;
    if (f.max_context_tokens) s.llm.max_context_tokens = *f.max_context_tokens;
    if (f.api_key_env) s.llm.api_key_env = *f.api_key_env;
    if (f.retries) s.llm.retry.max_retries = *f.retries;
    if (f.mode) s.mode = parse_run_mode(*f.mode);
    if (f.adapter) s.adapter = parse_adapter(*f.adapter);
    p.validate();
    if (s.llm.max_context_tokens < 2) {
        throw ConfigError("max context tokens must be at least 2");
    }
    return s;
}

std::string read_input(const std::string& path, std::istream& in) {
    if (path.empty() || path == "-") {
        return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    }
    std::ifstream file(path, std::ios::binary);
    if (!file) {
        throw ConfigError("cannot read input " + path);
    }
    return {std::istreambuf_iterator<char>(file), std::istreambuf_iterator<char>()};
}

void write_output(const std::string& path, const std::string& data, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << data;
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) {
        throw ConfigError("cannot write " + path);
    }
    file << data;
}

std::shared_ptr<qa::ChatModel> chat_for_resolver(const Settings& s) {
    if (s.pipeline.resolver != resolver::BackendKind::llm) {
        return nullptr;
    }
    return std::make_shared<qa::HttpChatModel>(s.llm);
}

} // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Coreference-resolved rewriting and QA over long documents", "lqca"};
    app.require_subcommand(1);
    Flags flags;
    std::string input;
    std::string output;
    std::string sidecar;
    std::string question;
    std::vector<std::string> choices;
    std::string dataset;
    std::string run_id;

    auto* rewrite = app.add_subcommand("rewrite", "Replace mentions with their cluster representative");
    rewrite->add_option("input", input, "Input document (default: stdin)");
    rewrite->add_option("--out", output, "Output file (default: stdout)");
    rewrite->add_option("--sidecar", sidecar, "Write edits and offset map as JSON");
    add_pipeline_flags(*rewrite, flags);
    add_llm_flags(*rewrite, flags); // used by --resolver llm

    auto* inspect = app.add_subcommand("inspect", "Dump chunks, mentions, distances, graph and clusters as JSON");
    inspect->add_option("input", input, "Input document (default: stdin)");
    inspect->add_option("--out", output, "Output file (default: stdout)");
    add_pipeline_flags(*inspect, flags);
    add_llm_flags(*inspect, flags);

    auto* ask = app.add_subcommand("qa", "Answer a question over a (rewritten) document");
    ask->add_option("input", input, "Input document (default: stdin)");
    ask->add_option("--question,-q", question, "Question text")->required();
    ask->add_option("--choice", choices, "Answer choice; repeat for A, B, C ...");
    ask->add_option("--out", output, "Output file (default: stdout)");
    add_pipeline_flags(*ask, flags);
    add_llm_flags(*ask, flags);

    auto* evaluate = app.add_subcommand("eval", "Run a benchmark file and report metrics");
    evaluate->add_option("--dataset", dataset, "JSON-lines dataset")->required();
    evaluate->add_option("--adapter", flags.adapter, "longbench | leval | loogle | generic");
    evaluate->add_option("--out", output, "Directory for records.jsonl and report.json");
    evaluate->add_option("--run-id", run_id, "Run identifier used for resuming (default: the mode)");
    add_pipeline_flags(*evaluate, flags);
    add_llm_flags(*evaluate, flags);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitConfig;
    }

    auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
    auto logger = std::make_shared<spdlog::logger>("lqca", sink);
    logger->set_pattern("%l: %v");
    auto previous = spdlog::default_logger();
    spdlog::set_default_logger(logger);
    struct Restore {
        std::shared_ptr<spdlog::logger> logger;
        ~Restore() { spdlog::set_default_logger(logger); }
    } restore{previous};

    try {
        const Settings settings = resolve_settings(flags);

        if (rewrite->parsed() || inspect->parsed()) {
            const auto text = read_input(input, in);
            auto backend = make_resolver(settings.pipeline, chat_for_resolver(settings));
            auto tagger = make_tagger(settings.pipeline);
            if (inspect->parsed()) {
                const auto result = analyze(text, settings.pipeline, *backend, *tagger);
                write_output(output, inspect_json(result) + "\n", out);
                return kExitOk;
            }
            const auto result = rewrite_document(text, settings.pipeline, *backend, *tagger);
            write_output(output, result.rewrite.text, out);
            if (!sidecar.empty()) {
                write_output(sidecar, rewrite_sidecar_json(result) + "\n", out);
            }
            return kExitOk;
        }

        if (ask->parsed()) {
            // Constructing the client checks the endpoint and API key up front.
            auto chat = std::make_shared<qa::HttpChatModel>(settings.llm);
            auto text = read_input(input, in);
            if (settings.mode == eval::RunMode::lqca) {
                auto backend = make_resolver(settings.pipeline, chat);
                auto tagger = make_tagger(settings.pipeline);
                text = rewrite_document(text, settings.pipeline, *backend, *tagger).rewrite.text;
            }
            qa::PromptSpec spec;
            spec.mode = settings.mode == eval::RunMode::cot ? qa::PromptMode::cot : qa::PromptMode::vanilla;
            spec.context = std::move(text);
            spec.question = question;
            spec.choices = choices;
            const auto prompt = qa::build_prompt_within(std::move(spec), settings.llm.max_context_tokens);
            write_output(output, chat->complete(prompt) + "\n", out);
            return kExitOk;
        }

        if (evaluate->parsed()) {
            auto chat = std::make_shared<qa::HttpChatModel>(settings.llm);
            const auto data = eval::load_dataset(dataset, settings.adapter);
            auto backend = make_resolver(settings.pipeline, chat);
            auto tagger = make_tagger(settings.pipeline);

            eval::BenchmarkOptions options;
            options.mode = settings.mode;
            options.pipeline = settings.pipeline;
            options.max_context_tokens = settings.llm.max_context_tokens;
            options.parallelism = settings.llm.parallelism;
            options.run_id = run_id.empty() ? std::string(eval::to_string(settings.mode)) : run_id;
            if (!output.empty()) {
                options.results_path = std::filesystem::path(output) / "records.jsonl";
            }
            const auto report = eval::run_benchmark(data.records, options, *chat, *backend, *tagger);
            if (!output.empty()) {
                write_output((std::filesystem::path(output) / "report.json").string(), eval::report_json(report) + "\n",
                             out);
            }
            out << eval::report_table(report);
            return kExitOk;
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitFailure;
}

} // namespace lqca::cli
