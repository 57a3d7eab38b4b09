#include "settings.hpp"

#include "lqca/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <string>

namespace lqca::cli {

namespace pt = boost::property_tree;

namespace {

template <typename T>
T value_of(const pt::ptree& node, const std::string& where) {
    try {
        return node.get_value<T>();
    } catch (const pt::ptree_bad_data&) {
        throw ConfigError("bad value '" + node.data() + "' for " + where);
    }
}

} // namespace

segmenter::ChunkMode parse_chunk_mode(std::string_view s) {
    if (s == "sliding") {
        return segmenter::ChunkMode::sliding;
    }
    if (s == "non_overlap" || s == "non-overlap") {
        return segmenter::ChunkMode::non_overlap;
    }
    throw ConfigError("unknown chunk mode '" + std::string(s) + "' (expected sliding or non_overlap)");
}

resolver::BackendKind parse_resolver(std::string_view s) {
    if (s == "builtin") {
        return resolver::BackendKind::builtin;
    }
    if (s == "wire") {
        return resolver::BackendKind::wire;
    }
    if (s == "llm") {
        return resolver::BackendKind::llm;
    }
    throw ConfigError("unknown resolver '" + std::string(s) + "' (expected builtin, wire or llm)");
}

TaggerKind parse_tagger(std::string_view s) {
    if (s == "builtin") {
        return TaggerKind::builtin;
    }
    if (s == "wire") {
        return TaggerKind::wire;
    }
    throw ConfigError("unknown tagger '" + std::string(s) + "' (expected builtin or wire)");
}

eval::RunMode parse_run_mode(std::string_view s) {
    if (s == "lqca") {
        return eval::RunMode::lqca;
    }
    if (s == "vanilla") {
        return eval::RunMode::vanilla;
    }
    if (s == "cot") {
        return eval::RunMode::cot;
    }
    throw ConfigError("unknown mode '" + std::string(s) + "' (expected lqca, vanilla or cot)");
}

eval::Adapter parse_adapter(std::string_view s) {
    if (s == "generic") {
        return eval::Adapter::generic;
    }
    if (s == "longbench") {
        return eval::Adapter::longbench;
    }
    if (s == "leval") {
        return eval::Adapter::leval;
    }
    if (s == "loogle") {
        return eval::Adapter::loogle;
    }
    throw ConfigError("unknown adapter '" + std::string(s) + "' (expected longbench, leval, loogle or generic)");
}

Settings load_settings_file(const std::filesystem::path& path, Settings base) {
    pt::ptree tree;
    try {
        pt::ini_parser::read_ini(path.string(), tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("cannot read config " + path.string() + ": " + e.message());
    }

    Settings s = std::move(base);
    for (const auto& [section, entries] : tree) {
        for (const auto& [key, node] : entries) {
            const std::string where = section + "." + key;
            const std::string text = node.data();
            if (section == "pipeline") {
                if (key == "max_chunk_tokens") {
                    s.pipeline.chunk.max_tokens = value_of<std::size_t>(node, where);
                } else if (key == "threshold") {
                    s.pipeline.threshold = value_of<double>(node, where);
                } else if (key == "chunk_mode") {
                    s.pipeline.chunk.mode = parse_chunk_mode(text);
                } else if (key == "resolver") {
                    s.pipeline.resolver = parse_resolver(text);
                } else if (key == "resolver_endpoint") {
                    s.pipeline.resolver_endpoint = text;
                } else if (key == "tagger") {
                    s.pipeline.tagger = parse_tagger(text);
                } else if (key == "tagger_endpoint") {
                    s.pipeline.tagger_endpoint = text;
                } else if (key == "parallelism") {
                    s.pipeline.parallelism = value_of<std::size_t>(node, where);
                } else if (key == "wire_timeout_ms") {
                    s.pipeline.wire_timeout = std::chrono::milliseconds(value_of<long long>(node, where));
                } else if (key == "wire_retries") {
                    s.pipeline.wire_retries = value_of<int>(node, where);
                } else {
                    throw ConfigError("unknown config key " + where);
                }
            } else if (section == "llm") {
                if (key == "endpoint") {
                    s.llm.endpoint = text;
                } else if (key == "model") {
                    s.llm.model = text;
                } else if (key == "max_context_tokens") {
                    s.llm.max_context_tokens = value_of<std::size_t>(node, where);
                } else if (key == "temperature") {
                    s.llm.temperature = value_of<double>(node, where);
                } else if (key == "api_key_env") {
                    s.llm.api_key_env = text;
                } else if (key == "timeout_ms") {
                    s.llm.timeout = std::chrono::milliseconds(value_of<long long>(node, where));
                } else if (key == "retries") {
                    s.llm.retry.max_retries = value_of<int>(node, where);
                } else if (key == "backoff_ms") {
                    s.llm.retry.initial_backoff = std::chrono::milliseconds(value_of<long long>(node, where));
                } else if (key == "parallelism") {
                    s.llm.parallelism = value_of<std::size_t>(node, where);
                } else {
                    throw ConfigError("unknown config key " + where);
                }
            } else if (section == "run") {
                if (key == "mode") {
                    s.mode = parse_run_mode(text);
                } else if (key == "adapter") {
                    s.adapter = parse_adapter(text);
                } else {
                    throw ConfigError("unknown config key " + where);
                }
            } else {
                throw ConfigError("unknown config section [" + section + "]");
            }
        }
    }
    return s;
}

} // namespace lqca::cli
