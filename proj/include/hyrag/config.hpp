#pragma once
// Flat key = value run configuration. Every key has a documented default,
// unknown keys are rejected, and every run writes the fully resolved config
// (defaults applied, secrets redacted) next to its outputs so experiments
// stay auditable. Environment variables override provider credentials only:
// HYG_LLM_BASE, HYG_LLM_KEY, HYG_EMBED_BASE, HYG_EMBED_KEY, HYG_EMBED_MODEL.

#include <cstdint>
#include <string>

#include "hyrag/corpus.hpp"

namespace hyrag {

struct RunConfig {
    // paths
    std::string corpus;
    std::string dataset;
    std::string index_dir = "index";
    std::string out_dir;        // default: <index_dir>/eval
    std::string cache_dir;      // default: <index_dir>/cache
    std::string template_dir = "templates";
    std::string template_version = "v1";
    std::string mock_fixtures;  // optional fixture file for the mock provider

    // scoping
    CorpusMode mode = CorpusMode::shared;

    // providers
    std::string provider = "mock";        // mock | remote
    std::string model = "mock-llm";
    std::string embed_provider = "mock";  // mock | remote
    uint32_t embed_dims = 64;
    std::string llm_base;
    std::string llm_key;
    std::string embed_base;
    std::string embed_key;
    std::string embed_model = "text-embedding-ada-002";
    std::string mock_judge_mode = "content";  // content | slot1
    uint32_t max_inflight = 4;

    // generation
    double temperature = 0.0;
    uint32_t max_output_tokens = 512;
    uint32_t classify_max_tokens = 64;
    uint32_t prompt_token_budget = 3000;

    // chunking
    uint32_t chunk_max_tokens = 256;
    uint32_t chunk_overlap = 0;

    // graph construction
    uint32_t max_triplets_per_chunk = 15;
    uint32_t describe_mention_threshold = 2;
    uint32_t max_levels = 3;

    // retrieval
    uint32_t rag_k = 10;
    uint32_t kg_depth = 2;
    uint32_t kg_budget = 30;
    uint32_t local_budget = 30;
    uint32_t global_k_reports = 5;
    uint32_t integration_budget = 40;

    uint64_t seed = 0;

    static RunConfig load(const std::string& path);
    void apply_env_overrides();
    void resolve_defaults();  // fills out_dir / cache_dir from index_dir

    // sorted "key = value" lines with secrets redacted
    std::string echo() const;
    void write_echo(const std::string& dir) const;
};

} // namespace hyrag
