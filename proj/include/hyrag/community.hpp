#pragma once
// Hierarchical community structure over the knowledge graph.
//
// Level 0 comes from seeded modularity-maximizing local moves over the
// triplet multigraph (Louvain-style); each further level re-clusters the
// aggregated quotient graph. Community ids are assigned canonically from
// sorted member lists, so the same seed and graph always produce an
// identical hierarchy. Reports are LLM-written: leaf reports summarize
// members and intra-community triplets, parent reports summarize child
// reports, singletons reuse the entity description without an LLM call.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "hyrag/gateway.hpp"
#include "hyrag/kg.hpp"
#include "hyrag/templates.hpp"

namespace hyrag {

struct Community {
    std::string id;
    uint32_t level = 0;  // 0 = finest
    std::set<std::string> members;  // entity ids
    std::string parent;             // empty at the top level
    std::set<std::string> children; // empty at level 0
    std::string report;
};

struct CommunityHierarchy {
    uint32_t levels = 0;  // 0 means empty graph (flagged)
    int top_level = -1;
    std::map<std::string, Community> communities;
    std::map<std::string, std::string> entity_to_level0;
    uint64_t report_failures = 0;

    std::vector<const Community*> at_level(uint32_t level) const;
    const Community* find(const std::string& id) const;
};

// Newman modularity of a disjoint covering partition over the undirected
// triplet multigraph (parallel triplets add weight). Edgeless graphs score 0.
double modularity(const KnowledgeGraph& graph,
                  const std::vector<std::vector<std::string>>& blocks);

CommunityHierarchy detect_communities(const KnowledgeGraph& graph, uint32_t max_levels = 3,
                                      uint64_t seed = 0);

struct ReportOptions {
    std::string model;
    uint32_t max_output_tokens = 512;
};

void generate_reports(CommunityHierarchy& hierarchy, const KnowledgeGraph& graph,
                      Gateway& gateway, const PromptLibrary& prompts,
                      const ReportOptions& options);

void save_hierarchy(const CommunityHierarchy& hierarchy, const std::string& path);
CommunityHierarchy load_hierarchy(const std::string& path);

} // namespace hyrag
