#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace lqca {

enum class ErrorKind { config, transport, integrity, parse };

/// Base for failures that the CLI maps onto distinct exit codes.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

class TransportError : public Error {
public:
    explicit TransportError(const std::string& what, std::optional<std::size_t> chunk = std::nullopt)
        : Error(ErrorKind::transport, chunk ? "chunk " + std::to_string(*chunk) + ": " + what : what),
          chunk_index_(chunk) {}

    std::optional<std::size_t> chunk_index() const noexcept { return chunk_index_; }

private:
    std::optional<std::size_t> chunk_index_;
};

class IntegrityError : public Error {
public:
    explicit IntegrityError(const std::string& what) : Error(ErrorKind::integrity, what) {}
};

class ParseError : public Error {
public:
    explicit ParseError(const std::string& what) : Error(ErrorKind::parse, what) {}
};

// Process exit codes used by the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitTransport = 3;
inline constexpr int kExitIntegrity = 4;

inline int exit_code_for(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::config:
        return kExitConfig;
    case ErrorKind::transport:
        return kExitTransport;
    case ErrorKind::integrity:
        return kExitIntegrity;
    case ErrorKind::parse:
        return kExitFailure;
    }
    return kExitFailure;
}

} // namespace lqca
