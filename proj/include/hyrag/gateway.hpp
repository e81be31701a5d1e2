#pragma once
// Uniform completion interface over pluggable providers, with a
// content-addressed response cache. A warm cache makes every pipeline run
// replayable: zero provider calls, byte-identical outputs.

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "hyrag/errors.hpp"
#include "hyrag/http.hpp"

namespace hyrag {

// Pipeline stage names; requests must carry one of these tags.
inline const std::vector<std::string>& stage_registry() {
    static const std::vector<std::string> stages = {
        "triplet-extract", "entity-describe", "community-report",
        "query-entities",  "classify",        "answer",
        "judge"};
    return stages;
}
bool is_known_stage(const std::string& tag);

struct CompletionRequest {
    std::string model;
    std::string prompt;            // fully rendered
    double temperature = 0.0;      // pipeline default: deterministic decoding
    uint32_t max_output_tokens = 512;
    std::string tag;               // stage name from the registry
};

enum class ProviderKind { remote, mock };

struct CompletionResponse {
    std::string text;
    bool cached = false;
    ProviderKind provider = ProviderKind::mock;
    uint32_t latency_ms = 0;
};

// Stable 256-bit digest over the request identity fields. Byte layout:
// for each of model, temperature (shortest round-trip decimal), max tokens
// (decimal), prompt — in that order — append "<byte length>:<bytes>;", then
// SHA-256 the concatenation. 64 hex characters.
std::string cache_key(const std::string& model, const std::string& prompt,
                      double temperature, uint32_t max_output_tokens);

class CompletionProvider {
public:
    virtual ~CompletionProvider() = default;
    virtual std::string complete(const CompletionRequest& req) = 0;
    virtual ProviderKind kind() const = 0;
};

// Deterministic offline provider. Resolution order per request:
//   1. the first fixture whose tag matches and whose `match` substring
//      occurs in the prompt;
//   2. the per-stage fallback template (a pure function of the prompt);
//   3. mock miss error — never silent empty text.
struct MockFixture {
    std::string tag;
    std::string match;     // substring of the prompt; empty matches everything
    std::string response;
};

enum class MockJudgeMode {
    slot_one,  // always answers "Model 1" (a maximally position-biased judge)
    content,   // winner chosen by answer content only, order-insensitive
};

class MockProvider : public CompletionProvider {
public:
    MockProvider() = default;
    explicit MockProvider(std::vector<MockFixture> fixtures) : fixtures_(std::move(fixtures)) {}

    void add_fixture(MockFixture f) { fixtures_.push_back(std::move(f)); }
    void set_judge_mode(MockJudgeMode mode) { judge_mode_ = mode; }

    std::string complete(const CompletionRequest& req) override;
    ProviderKind kind() const override { return ProviderKind::mock; }

    static std::vector<MockFixture> load_fixture_file(const std::string& path);

private:
    std::string stage_fallback(const CompletionRequest& req) const;

    std::vector<MockFixture> fixtures_;
    MockJudgeMode judge_mode_ = MockJudgeMode::content;
};

// OpenAI-compatible chat-completions provider. Base URL and key come from
// HYG_LLM_BASE / HYG_LLM_KEY unless set explicitly.
class RemoteProvider : public CompletionProvider {
public:
    RemoteProvider();
    RemoteProvider(std::string base_url, std::string api_key)
        : base_url_(std::move(base_url)), api_key_(std::move(api_key)) {}

    void set_retry_policy(http::RetryPolicy policy) { policy_ = policy; }

    std::string complete(const CompletionRequest& req) override;
    ProviderKind kind() const override { return ProviderKind::remote; }

private:
    std::string base_url_;
    std::string api_key_;
    http::RetryPolicy policy_;
};

struct GatewayStats {
    std::atomic<uint64_t> provider_calls{0};
    std::atomic<uint64_t> cache_hits{0};
};

class Gateway {
public:
    // cache_dir empty disables the on-disk cache (tests mostly run warm-less).
    Gateway(std::shared_ptr<CompletionProvider> provider, std::filesystem::path cache_dir = {},
            uint32_t max_inflight = 4);

    CompletionResponse complete(const CompletionRequest& req);

    const GatewayStats& stats() const { return stats_; }
    ProviderKind provider_kind() const { return provider_->kind(); }

private:
    std::optional<std::string> cache_lookup(const std::string& key) const;
    void cache_store(const std::string& key, const CompletionRequest& req,
                     const std::string& text) const;

    std::shared_ptr<CompletionProvider> provider_;
    std::filesystem::path cache_dir_;
    uint32_t max_inflight_;
    std::mutex inflight_mutex_;
    std::condition_variable inflight_cv_;
    uint32_t inflight_ = 0;
    GatewayStats stats_;
};

} // namespace hyrag
