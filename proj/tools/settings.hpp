#pragma once

#include "lqca/chat.hpp"
#include "lqca/eval.hpp"
#include "lqca/pipeline.hpp"

#include <filesystem>
#include <string_view>

namespace lqca::cli {

/// Everything a command can be configured with. Command-line flags win over
/// the config file, which wins over the defaults.
struct Settings {
    PipelineConfig pipeline;
    qa::LlmConfig llm;
    eval::RunMode mode = eval::RunMode::lqca;
    eval::Adapter adapter = eval::Adapter::generic;
};

/// Overlays a sectioned INI file onto `base`.
/// Unknown sections or keys and unparsable values throw ConfigError.
Settings load_settings_file(const std::filesystem::path& path, Settings base = {});

segmenter::ChunkMode parse_chunk_mode(std::string_view s);
resolver::BackendKind parse_resolver(std::string_view s);
TaggerKind parse_tagger(std::string_view s);
eval::RunMode parse_run_mode(std::string_view s);
eval::Adapter parse_adapter(std::string_view s);

} // namespace lqca::cli
