#pragma once
// The five retrieval strategies behind one interface: dense RAG over chunk
// vectors, KG traversal in triplets / triplets+text modes, and community
// local / global search. Results are ranked ContextItems; strategies without
// embedding scores use synthetic rank scores 1/(rank+1) so every result
// shares one shape.

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "hyrag/community.hpp"
#include "hyrag/corpus.hpp"
#include "hyrag/embed.hpp"
#include "hyrag/gateway.hpp"
#include "hyrag/kg.hpp"
#include "hyrag/templates.hpp"

namespace hyrag {

enum class Strategy {
    rag,
    kg_triplets,
    kg_triplets_text,
    community_local,
    community_global,
    selection,
    integration,
};

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);
std::vector<std::string> strategy_names();

enum class ContextKind { chunk, triplet, entity_desc, report };

std::string to_string(ContextKind kind);

// provenance ids are chunk ids, entity canonicals, community ids, or
// "t<index>" references into the canonical triplet order
struct ContextItem {
    ContextKind kind = ContextKind::chunk;
    std::string text;
    double score = 0.0;
    std::vector<std::string> provenance;
};

struct RetrievalDiagnostics {
    int matched_entities = 0;
    int hops_expanded = 0;
    int truncations = 0;
    bool entity_fallback_used = false;
    bool empty_source = false;     // integration: one delegate came back empty
    std::string route_klass;       // selection only
    std::string route_raw_label;   // selection only
};

struct RetrievalResult {
    Strategy strategy = Strategy::rag;
    std::string query_id;
    std::vector<ContextItem> items;  // non-increasing scores
    RetrievalDiagnostics diagnostics;
};

enum class KgMode { triplets, triplets_text };

struct RetrievalOptions {
    std::string model;
    uint32_t max_output_tokens = 256;
    size_t rag_k = 10;
    size_t kg_depth = 2;
    size_t kg_budget_items = 30;
    size_t local_budget_items = 30;
    size_t global_k_reports = 5;
};

struct RetrieverCounters {
    std::atomic<uint64_t> rag{0};
    std::atomic<uint64_t> kg{0};
    std::atomic<uint64_t> local{0};
    std::atomic<uint64_t> global{0};
};

// Read-only over immutable indexes; safe for concurrent queries. Components
// may be absent (nullptr) — strategies needing a missing one raise
// index_not_built_error.
class Retriever {
public:
    Retriever(const CorpusIndex* corpus, const VectorIndex* vectors,
              const KnowledgeGraph* graph, const CommunityHierarchy* hierarchy,
              std::shared_ptr<Embedder> embedder, Gateway* gateway,
              const PromptLibrary* prompts, RetrievalOptions options);

    // scope_doc non-empty restricts retrieval to that document's chunks
    RetrievalResult rag_retrieve(const std::string& query_id, const std::string& query,
                                 const std::string& scope_doc = "") const;

    // LLM entity extraction with a capitalized-phrase heuristic fallback
    std::vector<std::string> query_entities(const std::string& query,
                                            bool* fallback_used = nullptr) const;

    RetrievalResult kg_retrieve(const std::string& query_id, const std::string& query,
                                KgMode mode) const;

    RetrievalResult community_local(const std::string& query_id, const std::string& query) const;

    RetrievalResult community_global(const std::string& query_id,
                                     const std::string& query) const;

    RetrievalResult retrieve(Strategy strategy, const std::string& query_id,
                             const std::string& query, const std::string& scope_doc = "") const;

    const RetrieverCounters& counters() const { return counters_; }
    const RetrievalOptions& options() const { return options_; }

private:
    std::vector<std::string> match_entities(const std::vector<std::string>& names) const;

    const CorpusIndex* corpus_;
    const VectorIndex* vectors_;
    const KnowledgeGraph* graph_;
    const CommunityHierarchy* hierarchy_;
    std::shared_ptr<Embedder> embedder_;
    Gateway* gateway_;
    const PromptLibrary* prompts_;
    RetrievalOptions options_;
    std::map<std::string, const Chunk*> chunk_by_id_;
    mutable RetrieverCounters counters_;
};

// Capitalized-phrase heuristic used when LLM entity extraction yields
// nothing: maximal runs of capitalized words, ignoring a lone sentence-
// initial capital; results are normalized canonicals.
std::vector<std::string> heuristic_query_entities(const std::string& query);

// trace record helper shared by the CLI --trace option
nlohmann::json retrieval_trace_record(const RetrievalResult& result);

} // namespace hyrag
