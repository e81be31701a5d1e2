#include "hyrag/config.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>

#include "hyrag/errors.hpp"
#include "hyrag/jsonl.hpp"
#include "hyrag/text.hpp"

namespace hyrag {

namespace {

uint64_t parse_uint(const std::string& key, const std::string& value) {
    uint64_t out = 0;
    auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || p != value.data() + value.size()) {
        throw config_error("config key '" + key + "' expects a non-negative integer, got '" +
                           value + "'");
    }
    return out;
}

double parse_real(const std::string& key, const std::string& value) {
    try {
        size_t used = 0;
        double out = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return out;
    } catch (const std::exception&) {
        throw config_error("config key '" + key + "' expects a number, got '" + value + "'");
    }
}

} // namespace

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("config not found: " + path);

    RunConfig cfg;
    std::map<std::string, std::function<void(const std::string&, const std::string&)>> setters;
    auto set_string = [](std::string& field) {
        return [&field](const std::string&, const std::string& v) { field = v; };
    };
    auto set_u32 = [](uint32_t& field) {
        return [&field](const std::string& k, const std::string& v) {
            field = static_cast<uint32_t>(parse_uint(k, v));
        };
    };
    setters["corpus"] = set_string(cfg.corpus);
    setters["dataset"] = set_string(cfg.dataset);
    setters["index_dir"] = set_string(cfg.index_dir);
    setters["out_dir"] = set_string(cfg.out_dir);
    setters["cache_dir"] = set_string(cfg.cache_dir);
    setters["template_dir"] = set_string(cfg.template_dir);
    setters["template_version"] = set_string(cfg.template_version);
    setters["mock_fixtures"] = set_string(cfg.mock_fixtures);
    setters["mode"] = [&cfg](const std::string&, const std::string& v) {
        if (v == "shared") cfg.mode = CorpusMode::shared;
        else if (v == "per-document") cfg.mode = CorpusMode::per_document;
        else throw config_error("mode must be 'shared' or 'per-document', got '" + v + "'");
    };
    setters["provider"] = set_string(cfg.provider);
    setters["model"] = set_string(cfg.model);
    setters["embed_provider"] = set_string(cfg.embed_provider);
    setters["embed_dims"] = set_u32(cfg.embed_dims);
    setters["llm_base"] = set_string(cfg.llm_base);
    setters["llm_key"] = set_string(cfg.llm_key);
    setters["embed_base"] = set_string(cfg.embed_base);
    setters["embed_key"] = set_string(cfg.embed_key);
    setters["embed_model"] = set_string(cfg.embed_model);
    setters["mock_judge_mode"] = set_string(cfg.mock_judge_mode);
    setters["max_inflight"] = set_u32(cfg.max_inflight);
    setters["temperature"] = [&cfg](const std::string& k, const std::string& v) {
        cfg.temperature = parse_real(k, v);
    };
    setters["max_output_tokens"] = set_u32(cfg.max_output_tokens);
    setters["classify_max_tokens"] = set_u32(cfg.classify_max_tokens);
    setters["prompt_token_budget"] = set_u32(cfg.prompt_token_budget);
    setters["chunk_max_tokens"] = set_u32(cfg.chunk_max_tokens);
    setters["chunk_overlap"] = set_u32(cfg.chunk_overlap);
    setters["max_triplets_per_chunk"] = set_u32(cfg.max_triplets_per_chunk);
    setters["describe_mention_threshold"] = set_u32(cfg.describe_mention_threshold);
    setters["max_levels"] = set_u32(cfg.max_levels);
    setters["rag_k"] = set_u32(cfg.rag_k);
    setters["kg_depth"] = set_u32(cfg.kg_depth);
    setters["kg_budget"] = set_u32(cfg.kg_budget);
    setters["local_budget"] = set_u32(cfg.local_budget);
    setters["global_k_reports"] = set_u32(cfg.global_k_reports);
    setters["integration_budget"] = set_u32(cfg.integration_budget);
    setters["seed"] = [&cfg](const std::string& k, const std::string& v) {
        cfg.seed = parse_uint(k, v);
    };

    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string trimmed = std::string(text::trim(line));
        if (trimmed.empty() || trimmed[0] == '#') continue;
        size_t eq = trimmed.find('=');
        if (eq == std::string::npos) {
            throw config_error(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
        }
        std::string key = std::string(text::trim(trimmed.substr(0, eq)));
        std::string value = std::string(text::trim(trimmed.substr(eq + 1)));
        auto it = setters.find(key);
        if (it == setters.end()) {
            throw config_error(path + ":" + std::to_string(lineno) + ": unknown config key '" +
                               key + "'");
        }
        it->second(key, value);
    }

    cfg.apply_env_overrides();
    cfg.resolve_defaults();
    return cfg;
}

void RunConfig::apply_env_overrides() {
    auto env = [](const char* name) -> const char* { return std::getenv(name); };
    if (const char* v = env("HYG_LLM_BASE")) llm_base = v;
    if (const char* v = env("HYG_LLM_KEY")) llm_key = v;
    if (const char* v = env("HYG_EMBED_BASE")) embed_base = v;
    if (const char* v = env("HYG_EMBED_KEY")) embed_key = v;
    if (const char* v = env("HYG_EMBED_MODEL")) embed_model = v;
}

void RunConfig::resolve_defaults() {
    if (out_dir.empty()) out_dir = index_dir + "/eval";
    if (cache_dir.empty()) cache_dir = index_dir + "/cache";
    if (provider != "mock" && provider != "remote") {
        throw config_error("provider must be 'mock' or 'remote', got '" + provider + "'");
    }
    if (embed_provider != "mock" && embed_provider != "remote") {
        throw config_error("embed_provider must be 'mock' or 'remote', got '" + embed_provider +
                           "'");
    }
    if (mock_judge_mode != "content" && mock_judge_mode != "slot1") {
        throw config_error("mock_judge_mode must be 'content' or 'slot1', got '" +
                           mock_judge_mode + "'");
    }
    if (chunk_max_tokens == 0) throw config_error("chunk_max_tokens must be positive");
    if (chunk_overlap >= chunk_max_tokens) {
        throw config_error("chunk_overlap must be smaller than chunk_max_tokens");
    }
    if (max_levels == 0) throw config_error("max_levels must be positive");
    if (rag_k == 0 || global_k_reports == 0) throw config_error("k values must be positive");
}

std::string RunConfig::echo() const {
    auto redact = [](const std::string& secret) -> std::string {
        return secret.empty() ? "" : "****";
    };
    std::map<std::string, std::string> kv = {
        {"cache_dir", cache_dir},
        {"chunk_max_tokens", std::to_string(chunk_max_tokens)},
        {"chunk_overlap", std::to_string(chunk_overlap)},
        {"classify_max_tokens", std::to_string(classify_max_tokens)},
        {"corpus", corpus},
        {"dataset", dataset},
        {"describe_mention_threshold", std::to_string(describe_mention_threshold)},
        {"embed_base", embed_base},
        {"embed_dims", std::to_string(embed_dims)},
        {"embed_key", redact(embed_key)},
        {"embed_model", embed_model},
        {"embed_provider", embed_provider},
        {"global_k_reports", std::to_string(global_k_reports)},
        {"index_dir", index_dir},
        {"integration_budget", std::to_string(integration_budget)},
        {"kg_budget", std::to_string(kg_budget)},
        {"kg_depth", std::to_string(kg_depth)},
        {"llm_base", llm_base},
        {"llm_key", redact(llm_key)},
        {"local_budget", std::to_string(local_budget)},
        {"max_inflight", std::to_string(max_inflight)},
        {"max_levels", std::to_string(max_levels)},
        {"max_output_tokens", std::to_string(max_output_tokens)},
        {"max_triplets_per_chunk", std::to_string(max_triplets_per_chunk)},
        {"mock_fixtures", mock_fixtures},
        {"mock_judge_mode", mock_judge_mode},
        {"mode", mode == CorpusMode::shared ? "shared" : "per-document"},
        {"model", model},
        {"out_dir", out_dir},
        {"prompt_token_budget", std::to_string(prompt_token_budget)},
        {"provider", provider},
        {"rag_k", std::to_string(rag_k)},
        {"seed", std::to_string(seed)},
        {"template_dir", template_dir},
        {"template_version", template_version},
        {"temperature", std::to_string(temperature)},
    };
    std::string out;
    for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
    return out;
}

void RunConfig::write_echo(const std::string& dir) const {
    std::filesystem::create_directories(dir);
    jsonl::write_file_atomic(std::filesystem::path(dir) / "run_config.echo", echo());
}

} // namespace hyrag
