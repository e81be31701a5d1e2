#pragma once
// Thin wrapper around cpp-httplib for the OpenAI-compatible providers.
// Retries are bounded: transport failures and 5xx responses back off
// exponentially; 4xx responses fail immediately.

#include <string>

namespace hyrag::http {

struct Response {
    int status = 0;       // 0 = transport failure
    std::string body;
    std::string error;    // transport error description when status == 0
};

struct RetryPolicy {
    int attempts = 3;
    int backoff_ms = 500;  // doubles per retry
};

// base_url: "http(s)://host[:port][/prefix]". path is appended to the prefix.
Response post_json(const std::string& base_url, const std::string& path,
                   const std::string& bearer_token, const std::string& body,
                   int timeout_sec = 60);

Response post_json_with_retry(const std::string& base_url, const std::string& path,
                              const std::string& bearer_token, const std::string& body,
                              const RetryPolicy& policy, int timeout_sec = 60);

} // namespace hyrag::http
