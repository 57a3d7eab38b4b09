#include "lqca/http.hpp"

#include "lqca/errors.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <regex>
#include <thread>

namespace lqca::http {

Endpoint Endpoint::parse(std::string_view url) {
    static const std::regex pattern(R"(^(https?://[^/\s]+)(/[^\s]*)?$)");
    std::match_results<std::string_view::const_iterator> m;
    if (!std::regex_match(url.begin(), url.end(), m, pattern)) {
        throw ConfigError("invalid endpoint URL '" + std::string(url) + "'");
    }
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (url.substr(0, 5) == "https") {
        throw ConfigError("https endpoints need a build with OpenSSL support");
    }
#endif
    Endpoint ep;
    ep.scheme_host_port = m[1].str();
    ep.base_path = m[2].matched ? m[2].str() : std::string();
    while (!ep.base_path.empty() && ep.base_path.back() == '/') {
        ep.base_path.pop_back();
    }
    return ep;
}

bool is_retryable_status(int status) noexcept { return status == 408 || status == 429 || status >= 500; }

std::string post_json(const Endpoint& endpoint, std::string_view path, const std::string& body,
                      const RequestOptions& options) {
    httplib::Client client(endpoint.scheme_host_port);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(options.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    httplib::Headers headers;
    for (const auto& [key, value] : options.headers) {
        headers.emplace(key, value);
    }
    const std::string target = endpoint.base_path + std::string(path);

    auto backoff = options.retry.initial_backoff;
    std::string last_error;
    for (int attempt = 0; attempt <= options.retry.max_retries; ++attempt) {
        if (attempt > 0) {
            spdlog::warn("retrying POST {} (attempt {}): {}", endpoint.url(path), attempt + 1, last_error);
            std::this_thread::sleep_for(backoff);
            backoff = std::chrono::milliseconds(
                static_cast<long long>(static_cast<double>(backoff.count()) * options.retry.backoff_multiplier));
        }
        auto res = client.Post(target, headers, body, "application/json");
        if (!res) {
            last_error = "request failed: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 200 && res->status < 300) {
            return res->body;
        }
        last_error = "HTTP " + std::to_string(res->status) + ": " + res->body;
        if (!is_retryable_status(res->status)) {
            throw TransportError("POST " + endpoint.url(path) + " failed with " + last_error);
        }
    }
    throw TransportError("POST " + endpoint.url(path) + " gave up after " +
                         std::to_string(options.retry.max_retries + 1) + " attempts; last error: " + last_error);
}

} // namespace lqca::http
