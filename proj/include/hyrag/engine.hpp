#pragma once
// Orchestration: builds and loads index directories, runs evaluation loops,
// the dual-order judge, and batch routing. This is the layer the CLI binds.
//
// Index layout (one directory per corpus + mode pair):
//   shared mode        <index_dir>/{chunks,vectors,entities,triplets,communities}.jsonl
//   per-document mode  <index_dir>/docs/<doc-id>/... (one sub-index per document)
// A .lock file guards against concurrent writers; the response cache lives
// under the configured cache_dir, so reruns replay without provider calls.

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hyrag/config.hpp"
#include "hyrag/dataset.hpp"
#include "hyrag/eval.hpp"
#include "hyrag/hybrid.hpp"
#include "hyrag/retrieval.hpp"

namespace hyrag {

std::string sanitize_for_path(const std::string& id);

struct PipelineArtifacts {
    CorpusIndex corpus;
    VectorIndex vectors;
    KnowledgeGraph graph;
    CommunityHierarchy hierarchy;
};

struct BuildCounters {
    size_t documents = 0;
    size_t chunks = 0;
    size_t vectors = 0;
    size_t entities = 0;
    size_t triplets = 0;
    size_t communities = 0;
    uint64_t provider_calls = 0;
    uint64_t cache_hits = 0;
};

struct EvalFailure {
    std::string query_id;
    std::string strategy;
    std::string error;
};

struct EvalOutcome {
    nlohmann::json report;
    std::vector<EvalFailure> failures;
};

class Engine {
public:
    explicit Engine(RunConfig config);

    // chunk -> embed -> graph -> communities -> reports; idempotent over a
    // warm cache; writes the five artifact files plus the config echo
    BuildCounters build_index();

    GeneratedAnswer ask(const std::string& query, Strategy strategy,
                        const std::string& scope_doc = "", const std::string& trace_path = "");

    EvalOutcome run_eval(const std::vector<Strategy>& strategies,
                         const std::string& trace_path = "");

    std::vector<JudgeVerdict> run_judge(const std::string& predictions_a,
                                        const std::string& predictions_b);

    std::vector<RouteDecision> run_route();

    const RunConfig& config() const { return config_; }
    Gateway& gateway() { return *gateway_; }

private:
    struct Bundle {
        PipelineArtifacts artifacts;
        std::unique_ptr<Retriever> retriever;
        std::unique_ptr<HybridPipeline> hybrid;
    };

    PipelineArtifacts build_one(const std::vector<Document>& docs, CorpusMode mode);
    void save_artifacts(const PipelineArtifacts& artifacts, const std::filesystem::path& dir);
    PipelineArtifacts load_artifacts(const std::filesystem::path& dir) const;
    std::filesystem::path scope_dir(const std::string& scope) const;
    Bundle& bundle_for_scope(const std::string& scope);
    HybridOptions hybrid_options() const;

    RunConfig config_;
    std::shared_ptr<Gateway> gateway_;
    std::shared_ptr<Embedder> embedder_;
    PromptLibrary prompts_;
    std::map<std::string, std::unique_ptr<Bundle>> bundles_;
};

// Exclusive index-directory lock (created on construction, removed on
// destruction). A pre-existing lock file fails fast.
class IndexLock {
public:
    explicit IndexLock(const std::filesystem::path& dir);
    ~IndexLock();
    IndexLock(const IndexLock&) = delete;
    IndexLock& operator=(const IndexLock&) = delete;

private:
    std::filesystem::path lock_path_;
};

// Renders the per-type metric table the eval command prints.
std::string render_report_table(const nlohmann::json& report);

} // namespace hyrag
