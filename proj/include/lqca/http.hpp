#pragma once

#include <chrono>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

// Minimal JSON-over-HTTP POST with retry, shared by the resolver, tagger and
// chat-completion clients.
namespace lqca::http {

struct Endpoint {
    std::string scheme_host_port; // "http://127.0.0.1:8080"
    std::string base_path;        // "" or "/v1", never with a trailing slash

    /// Throws ConfigError for anything that is not http(s)://host[:port][/path].
    static Endpoint parse(std::string_view url);

    std::string url(std::string_view path) const { return scheme_host_port + base_path + std::string(path); }
};

struct RetryPolicy {
    int max_retries = 2;
    std::chrono::milliseconds initial_backoff{500};
    double backoff_multiplier = 2.0;
};

struct RequestOptions {
    std::chrono::milliseconds timeout{30000};
    RetryPolicy retry;
    std::vector<std::pair<std::string, std::string>> headers;
};

/// True for statuses worth retrying: 408, 429 and 5xx.
bool is_retryable_status(int status) noexcept;

/// POSTs `body` to base_path + `path` and returns the 2xx response body.
/// Connection failures and retryable statuses are retried per the policy;
/// anything else, or exhausted retries, throws TransportError carrying the
/// status and response body.
std::string post_json(const Endpoint& endpoint, std::string_view path, const std::string& body,
                      const RequestOptions& options);

} // namespace lqca::http
