#include "hyrag/http.hpp"

#include <chrono>
#include <regex>
#include <thread>

#include <httplib.h>

namespace hyrag::http {

namespace {

struct ParsedUrl {
    std::string scheme_host_port;  // e.g. "http://localhost:8080"
    std::string prefix;            // e.g. "/v1"
};

ParsedUrl parse_base(const std::string& base_url) {
    static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)", std::regex::icase);
    std::smatch m;
    if (!std::regex_match(base_url, m, re)) {
        return {base_url, ""};
    }
    std::string prefix = m[2].matched ? m[2].str() : "";
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {m[1].str(), prefix};
}

} // namespace

Response post_json(const std::string& base_url, const std::string& path,
                   const std::string& bearer_token, const std::string& body,
                   int timeout_sec) {
    ParsedUrl url = parse_base(base_url);
    httplib::Client client(url.scheme_host_port);
    client.set_connection_timeout(timeout_sec, 0);
    client.set_read_timeout(timeout_sec, 0);
    httplib::Headers headers;
    if (!bearer_token.empty()) {
        headers.emplace("Authorization", "Bearer " + bearer_token);
    }
    auto res = client.Post(url.prefix + path, headers, body, "application/json");
    if (!res) {
        return {0, "", httplib::to_string(res.error())};
    }
    return {res->status, res->body, ""};
}

Response post_json_with_retry(const std::string& base_url, const std::string& path,
                              const std::string& bearer_token, const std::string& body,
                              const RetryPolicy& policy, int timeout_sec) {
    Response last;
    int backoff = policy.backoff_ms;
    for (int attempt = 0; attempt < policy.attempts; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
            backoff *= 2;
        }
        last = post_json(base_url, path, bearer_token, body, timeout_sec);
        bool retryable = last.status == 0 || last.status >= 500;
        if (!retryable) return last;
    }
    return last;
}

} // namespace hyrag::http
