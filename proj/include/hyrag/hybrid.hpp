#pragma once
// The two hybrid strategies plus final answer generation.
//
// Selection classifies each query as fact-based or reasoning-based and
// routes it to dense RAG or community local search respectively; the route
// decision is total (an unparseable classifier label falls back to fact).
// Integration runs both retrievers, concatenates RAG items before graph
// items, deduplicates identical (kind, provenance) pairs, and truncates
// alternately from each source's tail when over budget.

#include <cstdint>
#include <string>

#include "hyrag/retrieval.hpp"

namespace hyrag {

enum class QueryClass { fact, reasoning };

inline std::string to_string(QueryClass k) {
    return k == QueryClass::fact ? "fact" : "reasoning";
}

struct RouteDecision {
    std::string query_id;
    QueryClass klass = QueryClass::fact;
    Strategy target = Strategy::rag;  // fact <-> rag, reasoning <-> community_local
    std::string raw_label;            // verbatim classifier output
    bool fallback_used = false;
};

struct GeneratedAnswer {
    std::string query_id;
    Strategy strategy = Strategy::rag;
    std::string text;                // verbatim generator output
    uint32_t context_items_used = 0;
    uint32_t prompt_tokens_est = 0;
};

struct HybridOptions {
    std::string model;
    uint32_t classify_max_tokens = 64;
    uint32_t answer_max_tokens = 512;
    size_t integration_budget_items = 40;
    uint32_t prompt_token_budget = 3000;
};

class HybridPipeline {
public:
    HybridPipeline(const Retriever* retriever, Gateway* gateway, const PromptLibrary* prompts,
                   HybridOptions options)
        : retriever_(retriever), gateway_(gateway), prompts_(prompts),
          options_(std::move(options)) {}

    // Renders the classification prompt and parses the first occurrence of
    // "fact" or "reasoning" (case-insensitive) from the response.
    RouteDecision classify_query(const std::string& query_id, const std::string& query) const;

    RetrievalResult select_retrieve(const std::string& query_id, const std::string& query,
                                    const std::string& scope_doc = "") const;

    RetrievalResult integrate_retrieve(const std::string& query_id, const std::string& query,
                                       const std::string& scope_doc = "") const;

    // Fixed template: instruction, numbered context items with kind labels,
    // then the question. Items are dropped lowest-score-first once the
    // rendered context exceeds token_budget.
    std::string assemble_prompt(const std::string& query, const RetrievalResult& result,
                                uint32_t token_budget, uint32_t* items_used = nullptr) const;

    GeneratedAnswer answer(const std::string& query_id, const std::string& query,
                           Strategy strategy, const std::string& scope_doc = "") const;

    // retrieve -> assemble -> complete, split so callers can reuse the
    // retrieval result (e.g. for trace files) without retrieving twice
    RetrievalResult retrieve_any(Strategy strategy, const std::string& query_id,
                                 const std::string& query, const std::string& scope_doc) const;
    GeneratedAnswer generate(const std::string& query_id, const std::string& query,
                             const RetrievalResult& result) const;

private:
    const Retriever* retriever_;
    Gateway* gateway_;
    const PromptLibrary* prompts_;
    HybridOptions options_;
};

} // namespace hyrag
