#include "hyrag/gateway.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <ctime>

#include <json.hpp>

#include "hyrag/jsonl.hpp"
#include "hyrag/sha256.hpp"
#include "hyrag/text.hpp"

namespace hyrag {

using json = nlohmann::json;

bool is_known_stage(const std::string& tag) {
    const auto& reg = stage_registry();
    return std::find(reg.begin(), reg.end(), tag) != reg.end();
}

std::string cache_key(const std::string& model, const std::string& prompt,
                      double temperature, uint32_t max_output_tokens) {
    char tbuf[64];
    auto [tend, terr] = std::to_chars(tbuf, tbuf + sizeof(tbuf), temperature);
    std::string temp_str(tbuf, tend);
    std::string max_str = std::to_string(max_output_tokens);

    Sha256 h;
    auto field = [&h](const std::string& value) {
        std::string framed = std::to_string(value.size()) + ":";
        h.update(framed);
        h.update(value);
        h.update(";");
    };
    field(model);
    field(temp_str);
    field(max_str);
    field(prompt);
    return h.hex_digest();
}

// ---------------------------------------------------------------------------
// Mock provider
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> prompt_lines(const std::string& prompt) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : prompt) {
        if (c == '\n') {
            lines.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    lines.push_back(cur);
    return lines;
}

std::string line_after_marker(const std::string& prompt, const std::string& marker) {
    auto lines = prompt_lines(prompt);
    for (size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].rfind(marker, 0) == 0) {
            std::string rest = std::string(text::trim(lines[i].substr(marker.size())));
            if (!rest.empty()) return rest;
            for (size_t j = i + 1; j < lines.size(); ++j) {
                std::string t = std::string(text::trim(lines[j]));
                if (!t.empty()) return t;
            }
            return "";
        }
    }
    return "";
}

// Maximal runs of capitalized words, e.g. "Marie Curie studied" -> ["Marie Curie"].
std::vector<std::string> capitalized_runs(const std::string& s) {
    auto words = text::split_ws(s);
    std::vector<std::string> runs;
    std::string cur;
    size_t cur_len = 0;
    auto flush = [&] {
        if (!cur.empty()) runs.push_back(cur);
        cur.clear();
        cur_len = 0;
    };
    for (const auto& w : words) {
        // strip punctuation off the edges before testing the first letter
        size_t b = 0, e = w.size();
        while (b < e && text::is_punct(static_cast<unsigned char>(w[b]))) ++b;
        while (e > b && text::is_punct(static_cast<unsigned char>(w[e - 1]))) --e;
        std::string core = w.substr(b, e - b);
        if (text::starts_with_upper(core)) {
            if (!cur.empty()) cur += ' ';
            cur += core;
            ++cur_len;
        } else {
            flush();
        }
    }
    flush();
    return runs;
}

std::string extract_block(const std::string& prompt, const std::string& begin_marker,
                          const std::string& end_marker) {
    size_t b = prompt.find(begin_marker);
    if (b == std::string::npos) return "";
    b += begin_marker.size();
    size_t e = prompt.find(end_marker, b);
    if (e == std::string::npos) e = prompt.size();
    return std::string(text::trim(std::string_view(prompt).substr(b, e - b)));
}

} // namespace

std::string MockProvider::complete(const CompletionRequest& req) {
    for (const auto& f : fixtures_) {
        if (f.tag != req.tag) continue;
        if (f.match.empty() || req.prompt.find(f.match) != std::string::npos) {
            return f.response;
        }
    }
    return stage_fallback(req);
}

std::string MockProvider::stage_fallback(const CompletionRequest& req) const {
    const std::string& prompt = req.prompt;
    if (req.tag == "triplet-extract") {
        size_t at = prompt.find("Passage:");
        std::string body = at == std::string::npos ? prompt : prompt.substr(at + 8);
        auto runs = capitalized_runs(body);
        std::string out;
        int emitted = 0;
        for (size_t i = 0; i + 1 < runs.size() && emitted < 15; ++i, ++emitted) {
            out += "(" + runs[i] + " | related to | " + runs[i + 1] + ")\n";
        }
        return out;
    }
    if (req.tag == "query-entities") {
        std::string query = line_after_marker(prompt, "Query:");
        auto words = text::split_ws(query);
        auto runs = capitalized_runs(query);
        std::string out;
        for (const auto& r : runs) {
            // a lone sentence-initial capital is almost never an entity
            if (!words.empty() && r == words.front() && r.find(' ') == std::string::npos) continue;
            out += r + "\n";
        }
        return out;
    }
    if (req.tag == "entity-describe") {
        std::string canonical = line_after_marker(prompt, "Entity:");
        auto lines = prompt_lines(prompt);
        int mentions = 0;
        std::string first;
        for (const auto& l : lines) {
            if (l.rfind("- ", 0) == 0) {
                if (first.empty()) first = l.substr(2);
                ++mentions;
            }
        }
        return canonical + ": " + first + ". Mentioned in " + std::to_string(mentions) +
               " relations.";
    }
    if (req.tag == "community-report") {
        std::string entities = line_after_marker(prompt, "Entities:");
        if (!entities.empty()) return "This community covers " + entities + ".";
        std::string child = line_after_marker(prompt, "Child reports:");
        if (!child.empty()) return "Overview across sub-communities: " + child;
        throw mock_miss_error(req.tag, "report prompt without Entities/Child reports section");
    }
    if (req.tag == "classify") {
        std::string query = text::to_lower(line_after_marker(prompt, "Query:"));
        static const char* reasoning_cues[] = {"compare", "difference", "relationship",
                                               "how ",    "why ",       " and "};
        for (const char* cue : reasoning_cues) {
            if (query.find(cue) != std::string::npos) return "Reasoning-Based";
        }
        return "Fact-Based";
    }
    if (req.tag == "answer") {
        auto lines = prompt_lines(prompt);
        for (size_t i = 0; i < lines.size(); ++i) {
            if (lines[i].rfind("[1]", 0) == 0) {
                for (size_t j = i + 1; j < lines.size(); ++j) {
                    std::string t = std::string(text::trim(lines[j]));
                    if (!t.empty()) return t;
                }
            }
        }
        return "insufficient information";
    }
    if (req.tag == "judge") {
        if (judge_mode_ == MockJudgeMode::slot_one) return "Model 1";
        std::string a1 = extract_block(prompt, "The Answer of Model 1:", "The Answer of Model 2:");
        std::string a2 = extract_block(prompt, "The Answer of Model 2:", "Evaluation Criteria");
        if (a1.empty() && a2.empty()) {
            throw mock_miss_error(req.tag, "judge prompt without answer sections");
        }
        // winner keyed on content only, so slot order cannot matter
        std::string h1 = sha256_hex(a1), h2 = sha256_hex(a2);
        if (h1 == h2) return "tie";
        return h1 < h2 ? "Model 1" : "Model 2";
    }
    throw mock_miss_error(req.tag, "no fixture matches and no stage template registered");
}

std::vector<MockFixture> MockProvider::load_fixture_file(const std::string& path) {
    std::vector<MockFixture> fixtures;
    for (const auto& rec : jsonl::read_file(path)) {
        MockFixture f;
        f.tag = rec.at("tag").get<std::string>();
        f.match = rec.value("match", "");
        f.response = rec.at("response").get<std::string>();
        fixtures.push_back(std::move(f));
    }
    return fixtures;
}

// ---------------------------------------------------------------------------
// Remote provider
// ---------------------------------------------------------------------------

namespace {
std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : fallback;
}
} // namespace

RemoteProvider::RemoteProvider()
    : base_url_(env_or("HYG_LLM_BASE", "")), api_key_(env_or("HYG_LLM_KEY", "")) {}

std::string RemoteProvider::complete(const CompletionRequest& req) {
    if (base_url_.empty()) {
        throw provider_error(req.tag, "remote provider has no base URL (set HYG_LLM_BASE)");
    }
    json body = {
        {"model", req.model},
        {"messages", json::array({json{{"role", "user"}, {"content", req.prompt}}})},
        {"temperature", req.temperature},
        {"max_tokens", req.max_output_tokens},
    };
    auto res =
        http::post_json_with_retry(base_url_, "/chat/completions", api_key_, body.dump(), policy_);
    if (res.status == 0) {
        throw provider_error(req.tag, "transport failure: " + res.error);
    }
    if (res.status != 200) {
        throw provider_error(req.tag, "HTTP " + std::to_string(res.status) + ": " + res.body);
    }
    try {
        json parsed = json::parse(res.body);
        return parsed.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw provider_error(req.tag, std::string("malformed completion response: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Gateway
// ---------------------------------------------------------------------------

Gateway::Gateway(std::shared_ptr<CompletionProvider> provider, std::filesystem::path cache_dir,
                 uint32_t max_inflight)
    : provider_(std::move(provider)), cache_dir_(std::move(cache_dir)),
      max_inflight_(max_inflight == 0 ? 1 : max_inflight) {
    if (!cache_dir_.empty()) std::filesystem::create_directories(cache_dir_);
}

std::optional<std::string> Gateway::cache_lookup(const std::string& key) const {
    if (cache_dir_.empty()) return std::nullopt;
    auto path = cache_dir_ / (key + ".json");
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) return std::nullopt;
    json entry = json::parse(jsonl::read_text_file(path));
    return entry.at("response").get<std::string>();
}

void Gateway::cache_store(const std::string& key, const CompletionRequest& req,
                          const std::string& text) const {
    if (cache_dir_.empty()) return;
    std::time_t now = std::time(nullptr);
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    json entry = {
        {"key", key},
        {"request",
         {{"model", req.model},
          {"prompt", req.prompt},
          {"temperature", req.temperature},
          {"max_output_tokens", req.max_output_tokens},
          {"tag", req.tag}}},
        {"response", text},
        {"created_at", stamp},
    };
    jsonl::write_file_atomic(cache_dir_ / (key + ".json"), entry.dump() + "\n");
}

CompletionResponse Gateway::complete(const CompletionRequest& req) {
    if (req.prompt.empty()) throw config_error("completion request with empty prompt");
    if (!is_known_stage(req.tag)) {
        throw config_error("unknown pipeline stage tag '" + req.tag + "'");
    }

    std::string key = cache_key(req.model, req.prompt, req.temperature, req.max_output_tokens);
    if (auto hit = cache_lookup(key)) {
        stats_.cache_hits.fetch_add(1);
        return {*hit, true, provider_->kind(), 0};
    }

    {
        std::unique_lock lock(inflight_mutex_);
        inflight_cv_.wait(lock, [this] { return inflight_ < max_inflight_; });
        ++inflight_;
    }
    std::string response_text;
    auto t0 = std::chrono::steady_clock::now();
    try {
        response_text = provider_->complete(req);
    } catch (...) {
        std::lock_guard lock(inflight_mutex_);
        --inflight_;
        inflight_cv_.notify_one();
        throw;
    }
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
    {
        std::lock_guard lock(inflight_mutex_);
        --inflight_;
        inflight_cv_.notify_one();
    }
    stats_.provider_calls.fetch_add(1);
    cache_store(key, req, response_text);
    return {response_text, false, provider_->kind(), static_cast<uint32_t>(elapsed)};
}

} // namespace hyrag
