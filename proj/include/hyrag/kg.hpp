#pragma once
// Knowledge-graph construction from chunks via LLM triplet extraction.
// Extraction output follows a strict one-per-line "(head | relation | tail)"
// grammar; malformed lines are skipped and counted, never fatal. Entities
// merge by normalized canonical form and triplets deduplicate with unioned
// chunk provenance, so rebuilding from a warm cache reproduces the graph
// byte for byte.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "hyrag/corpus.hpp"
#include "hyrag/dataset.hpp"
#include "hyrag/gateway.hpp"
#include "hyrag/templates.hpp"

namespace hyrag {

struct Entity {
    std::string id;  // equal to the canonical form
    std::string canonical;
    std::set<std::string> surface_forms;
    std::string description;
};

struct TripletDraft {
    std::string head_surface;
    std::string relation;
    std::string tail_surface;
    std::string chunk_id;
};

struct Triplet {
    std::string head;  // entity id
    std::string relation;
    std::string tail;  // entity id
    std::set<std::string> source_chunk_ids;
};

struct KnowledgeGraph {
    std::map<std::string, Entity> entities;                  // id -> entity
    std::vector<Triplet> triplets;                           // sorted (head, relation, tail)
    std::map<std::string, std::vector<size_t>> adjacency;    // entity id -> triplet indexes

    // build diagnostics
    uint64_t parse_failures = 0;   // chunks whose extraction yielded nothing usable
    uint64_t malformed_lines = 0;  // individual lines that failed the grammar
    uint64_t dropped_drafts = 0;   // drafts whose endpoint normalized to ""

    bool empty() const { return entities.empty(); }
    const std::vector<size_t>& incident(const std::string& entity_id) const;
};

// trim, collapse internal whitespace, case-fold, strip one leading article
std::string normalize_entity(std::string_view surface);

// "<head> — <relation> — <tail>", the byte-exact rendering retrieval uses
std::string render_triplet(const Triplet& t);

struct ExtractStats {
    uint64_t malformed_lines = 0;
    bool fully_unparseable = false;
};

// Parses one LLM extraction response against the grammar. Exposed separately
// from the gateway call so the parser is testable on raw strings.
std::vector<TripletDraft> parse_triplet_lines(const std::string& response,
                                              const std::string& chunk_id,
                                              size_t max_triplets, ExtractStats& stats);

struct KgBuildOptions {
    std::string model;
    uint32_t max_output_tokens = 512;
    size_t max_triplets_per_chunk = 15;
    // entities mentioned in more drafts than this get one LLM description call
    size_t describe_mention_threshold = 2;
};

std::vector<TripletDraft> extract_triplets(const Chunk& chunk, Gateway& gateway,
                                           const PromptLibrary& prompts,
                                           const KgBuildOptions& options, ExtractStats& stats);

KnowledgeGraph build_graph(const CorpusIndex& corpus, Gateway& gateway,
                           const PromptLibrary& prompts, const KgBuildOptions& options);

// Fraction of gold answer strings whose normalization equals an entity
// canonical or appears in one as a whole-word phrase. No golds -> nullopt.
std::optional<double> answer_entity_coverage(const KnowledgeGraph& graph,
                                             const std::vector<QueryRecord>& queries);

// (covered, total) gold-string counts backing the coverage fraction; lets
// callers aggregate across per-document graphs.
std::pair<size_t, size_t> answer_entity_coverage_counts(const KnowledgeGraph& graph,
                                                        const std::vector<QueryRecord>& queries);

void save_graph(const KnowledgeGraph& graph, const std::string& entities_path,
                const std::string& triplets_path);
KnowledgeGraph load_graph(const std::string& entities_path, const std::string& triplets_path);

} // namespace hyrag
