#include "hyrag/community.hpp"

#include <algorithm>
#include <queue>

#include "hyrag/jsonl.hpp"

namespace hyrag {

std::vector<const Community*> CommunityHierarchy::at_level(uint32_t level) const {
    std::vector<const Community*> out;
    for (const auto& [id, c] : communities) {
        if (c.level == level) out.push_back(&c);
    }
    return out;
}

const Community* CommunityHierarchy::find(const std::string& id) const {
    auto it = communities.find(id);
    return it == communities.end() ? nullptr : &it->second;
}

// ---------------------------------------------------------------------------
// Weighted multigraph + modularity
// ---------------------------------------------------------------------------

namespace {

struct WeightedGraph {
    size_t n = 0;
    std::vector<std::map<size_t, double>> adj;  // neighbor -> weight, no self entries
    std::vector<double> self_loop;              // self-loop weight per node
    std::vector<double> degree;                 // sum of incident weights, self counts twice
    double total_weight = 0.0;                  // m: each edge once, self-loops once

    void init(size_t nodes) {
        n = nodes;
        adj.assign(n, {});
        self_loop.assign(n, 0.0);
        degree.assign(n, 0.0);
        total_weight = 0.0;
    }
    void add_edge(size_t u, size_t v, double w) {
        if (u == v) {
            self_loop[u] += w;
            degree[u] += 2 * w;
        } else {
            adj[u][v] += w;
            adj[v][u] += w;
            degree[u] += w;
            degree[v] += w;
        }
        total_weight += w;
    }
};

WeightedGraph graph_from_triplets(const KnowledgeGraph& graph,
                                  std::vector<std::string>& node_ids) {
    node_ids.clear();
    node_ids.reserve(graph.entities.size());
    for (const auto& [id, e] : graph.entities) node_ids.push_back(id);
    std::map<std::string, size_t> index;
    for (size_t i = 0; i < node_ids.size(); ++i) index[node_ids[i]] = i;

    WeightedGraph g;
    g.init(node_ids.size());
    for (const auto& t : graph.triplets) {
        g.add_edge(index.at(t.head), index.at(t.tail), 1.0);
    }
    return g;
}

double partition_modularity(const WeightedGraph& g, const std::vector<size_t>& comm) {
    if (g.total_weight == 0.0) return 0.0;
    size_t blocks = 0;
    for (size_t c : comm) blocks = std::max(blocks, c + 1);
    std::vector<double> internal(blocks, 0.0), total(blocks, 0.0);
    for (size_t u = 0; u < g.n; ++u) {
        total[comm[u]] += g.degree[u];
        internal[comm[u]] += 2 * g.self_loop[u];
        for (const auto& [v, w] : g.adj[u]) {
            if (comm[v] == comm[u]) internal[comm[u]] += w;  // counts both directions
        }
    }
    double two_m = 2 * g.total_weight;
    double q = 0.0;
    for (size_t c = 0; c < blocks; ++c) {
        q += internal[c] / two_m - (total[c] / two_m) * (total[c] / two_m);
    }
    return q;
}

// Deterministic PRNG + shuffle: std::shuffle's output is implementation
// defined, and hierarchies must match across platforms byte for byte.
struct SplitMix64 {
    uint64_t state;
    explicit SplitMix64(uint64_t seed) : state(seed) {}
    uint64_t next() {
        state += 0x9e3779b97f4a7c15ULL;
        uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
};

void deterministic_shuffle(std::vector<size_t>& v, SplitMix64& rng) {
    for (size_t i = v.size(); i > 1; --i) {
        size_t j = static_cast<size_t>(rng.next() % i);
        std::swap(v[i - 1], v[j]);
    }
}

// One Louvain phase: greedy local moves until no strictly-improving move
// exists. Returns the community assignment, renumbered densely in order of
// first appearance over ascending node index.
std::vector<size_t> local_moves(const WeightedGraph& g, uint64_t seed) {
    std::vector<size_t> comm(g.n);
    for (size_t i = 0; i < g.n; ++i) comm[i] = i;
    if (g.total_weight == 0.0 || g.n == 0) return comm;

    std::vector<double> tot(g.n, 0.0);  // sum of degrees per community
    for (size_t i = 0; i < g.n; ++i) tot[i] = g.degree[i];
    double two_m = 2 * g.total_weight;

    std::vector<size_t> order(g.n);
    for (size_t i = 0; i < g.n; ++i) order[i] = i;
    SplitMix64 rng(seed);
    deterministic_shuffle(order, rng);

    bool moved = true;
    while (moved) {
        moved = false;
        for (size_t node : order) {
            size_t old_comm = comm[node];
            // weights from node to each adjacent community
            std::map<size_t, double> links;
            for (const auto& [v, w] : g.adj[node]) links[comm[v]] += w;

            tot[old_comm] -= g.degree[node];
            double base_gain =
                links.count(old_comm) ? links[old_comm] - tot[old_comm] * g.degree[node] / two_m
                                      : -tot[old_comm] * g.degree[node] / two_m;
            size_t best_comm = old_comm;
            double best_gain = base_gain;
            for (const auto& [c, w] : links) {  // std::map: ascending, deterministic
                if (c == old_comm) continue;
                double gain = w - tot[c] * g.degree[node] / two_m;
                if (gain > best_gain + 1e-12) {
                    best_gain = gain;
                    best_comm = c;
                }
            }
            tot[best_comm] += g.degree[node];
            if (best_comm != old_comm) {
                comm[node] = best_comm;
                moved = true;
            }
        }
    }

    // dense renumbering by first appearance
    std::map<size_t, size_t> renumber;
    for (size_t i = 0; i < g.n; ++i) {
        if (!renumber.count(comm[i])) {
            size_t next_id = renumber.size();
            renumber[comm[i]] = next_id;
        }
    }
    for (size_t i = 0; i < g.n; ++i) comm[i] = renumber[comm[i]];
    return comm;
}

WeightedGraph aggregate(const WeightedGraph& g, const std::vector<size_t>& comm) {
    size_t blocks = 0;
    for (size_t c : comm) blocks = std::max(blocks, c + 1);
    WeightedGraph out;
    out.init(blocks);
    for (size_t u = 0; u < g.n; ++u) {
        if (g.self_loop[u] > 0) out.add_edge(comm[u], comm[u], g.self_loop[u]);
        for (const auto& [v, w] : g.adj[u]) {
            if (u < v) out.add_edge(comm[u], comm[v], w);
        }
    }
    return out;
}

size_t count_components(const WeightedGraph& g) {
    std::vector<bool> seen(g.n, false);
    size_t components = 0;
    for (size_t start = 0; start < g.n; ++start) {
        if (seen[start]) continue;
        ++components;
        std::queue<size_t> frontier;
        frontier.push(start);
        seen[start] = true;
        while (!frontier.empty()) {
            size_t u = frontier.front();
            frontier.pop();
            for (const auto& [v, w] : g.adj[u]) {
                if (!seen[v]) {
                    seen[v] = true;
                    frontier.push(v);
                }
            }
        }
    }
    return components;
}

} // namespace

double modularity(const KnowledgeGraph& graph,
                  const std::vector<std::vector<std::string>>& blocks) {
    std::vector<std::string> node_ids;
    WeightedGraph g = graph_from_triplets(graph, node_ids);
    std::map<std::string, size_t> index;
    for (size_t i = 0; i < node_ids.size(); ++i) index[node_ids[i]] = i;

    std::vector<size_t> comm(g.n, SIZE_MAX);
    for (size_t b = 0; b < blocks.size(); ++b) {
        for (const auto& id : blocks[b]) {
            auto it = index.find(id);
            if (it == index.end()) throw domain_error("partition references unknown entity " + id);
            if (comm[it->second] != SIZE_MAX) {
                throw domain_error("partition assigns entity " + id + " twice");
            }
            comm[it->second] = b;
        }
    }
    for (size_t i = 0; i < g.n; ++i) {
        if (comm[i] == SIZE_MAX) {
            throw domain_error("partition does not cover entity " + node_ids[i]);
        }
    }
    return partition_modularity(g, comm);
}

CommunityHierarchy detect_communities(const KnowledgeGraph& graph, uint32_t max_levels,
                                      uint64_t seed) {
    CommunityHierarchy hierarchy;
    if (graph.empty()) return hierarchy;  // 0 levels, flagged by construction

    std::vector<std::string> node_ids;
    WeightedGraph base = graph_from_triplets(graph, node_ids);
    size_t base_components = count_components(base);

    // entity assignment per recorded level
    std::vector<std::vector<size_t>> level_assignment;
    std::vector<size_t> entity_comm(base.n);
    for (size_t i = 0; i < base.n; ++i) entity_comm[i] = i;

    auto block_count = [](const std::vector<size_t>& comm) {
        size_t blocks = 0;
        for (size_t c : comm) blocks = std::max(blocks, c + 1);
        return blocks;
    };

    WeightedGraph current = base;
    for (uint32_t level = 0; level < max_levels; ++level) {
        std::vector<size_t> comm = local_moves(current, seed + level);
        size_t blocks = block_count(comm);

        if (level > 0 && blocks == current.n) break;  // pass merged nothing

        // compose down to entities
        for (size_t i = 0; i < base.n; ++i) entity_comm[i] = comm[entity_comm[i]];
        WeightedGraph next = aggregate(current, comm);

        if (level == 0) {
            // Single-node moves can stall below the one-block baseline;
            // community-level merges cannot. Fold quotient merges into the
            // finest level until it dominates both trivial partitions.
            while (partition_modularity(base, entity_comm) < -1e-15) {
                std::vector<size_t> repair = local_moves(next, seed + 1000);
                if (block_count(repair) == next.n) break;
                for (size_t i = 0; i < base.n; ++i) entity_comm[i] = repair[entity_comm[i]];
                next = aggregate(next, repair);
            }
            blocks = block_count(entity_comm);
        }

        level_assignment.push_back(entity_comm);
        if (blocks == base_components) break;  // one community per connected component
        current = std::move(next);
    }

    // materialize communities with canonical ids
    hierarchy.levels = static_cast<uint32_t>(level_assignment.size());
    hierarchy.top_level = static_cast<int>(hierarchy.levels) - 1;
    std::vector<std::map<size_t, std::string>> block_to_id(hierarchy.levels);
    for (uint32_t level = 0; level < hierarchy.levels; ++level) {
        std::map<size_t, std::set<std::string>> groups;
        for (size_t i = 0; i < base.n; ++i) {
            groups[level_assignment[level][i]].insert(node_ids[i]);
        }
        // canonical order: sort groups by their sorted member list
        std::vector<std::pair<std::set<std::string>, size_t>> ordered;
        for (const auto& [block, members] : groups) ordered.push_back({members, block});
        std::sort(ordered.begin(), ordered.end());
        for (size_t idx = 0; idx < ordered.size(); ++idx) {
            Community c;
            c.id = "c" + std::to_string(level) + "-" + std::to_string(idx);
            c.level = level;
            c.members = ordered[idx].first;
            block_to_id[level][ordered[idx].second] = c.id;
            hierarchy.communities[c.id] = std::move(c);
        }
    }

    // parent/child links between consecutive levels
    for (uint32_t level = 0; level + 1 < hierarchy.levels; ++level) {
        for (size_t i = 0; i < base.n; ++i) {
            const std::string& child_id = block_to_id[level].at(level_assignment[level][i]);
            const std::string& parent_id =
                block_to_id[level + 1].at(level_assignment[level + 1][i]);
            hierarchy.communities[child_id].parent = parent_id;
            hierarchy.communities[parent_id].children.insert(child_id);
        }
    }
    for (size_t i = 0; i < base.n; ++i) {
        hierarchy.entity_to_level0[node_ids[i]] = block_to_id[0].at(level_assignment[0][i]);
    }
    return hierarchy;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

namespace {

std::string join(const std::set<std::string>& items, const std::string& sep) {
    std::string out;
    for (const auto& s : items) {
        if (!out.empty()) out += sep;
        out += s;
    }
    return out;
}

} // namespace

void generate_reports(CommunityHierarchy& hierarchy, const KnowledgeGraph& graph,
                      Gateway& gateway, const PromptLibrary& prompts,
                      const ReportOptions& options) {
    // deterministic order: by (level, id); map key "c<level>-<idx>" sorts
    // lexicographically within a level, so walk levels explicitly
    for (uint32_t level = 0; level < hierarchy.levels; ++level) {
        for (auto& [id, community] : hierarchy.communities) {
            if (community.level != level) continue;

            if (community.members.size() == 1) {
                const auto& entity_id = *community.members.begin();
                auto it = graph.entities.find(entity_id);
                community.report = it == graph.entities.end() ? "" : it->second.description;
                continue;
            }

            CompletionRequest req;
            req.model = options.model;
            req.tag = "community-report";
            req.max_output_tokens = options.max_output_tokens;
            if (level == 0) {
                std::string details;
                for (const auto& member : community.members) {
                    auto it = graph.entities.find(member);
                    if (it != graph.entities.end() && !it->second.description.empty()) {
                        details += "- " + member + ": " + it->second.description + "\n";
                    }
                }
                for (size_t ti = 0; ti < graph.triplets.size(); ++ti) {
                    const auto& t = graph.triplets[ti];
                    if (community.members.count(t.head) && community.members.count(t.tail)) {
                        details += "- " + render_triplet(t) + "\n";
                    }
                }
                req.prompt = prompts.render(
                    "report_leaf",
                    {{"entities", join(community.members, ", ")}, {"details", details}});
            } else {
                std::string child_reports;
                for (const auto& child_id : community.children) {
                    const Community* child = hierarchy.find(child_id);
                    child_reports += "Report of " + child_id + ":\n" +
                                     (child ? child->report : "") + "\n\n";
                }
                req.prompt = prompts.render("report_parent", {{"child_reports", child_reports}});
            }

            try {
                std::string report = gateway.complete(req).text;
                community.report = report.empty() ? "[report unavailable]" : report;
                if (report.empty()) ++hierarchy.report_failures;
            } catch (const provider_error&) {
                community.report = "[report unavailable]";
                ++hierarchy.report_failures;
            }
        }
    }
}

void save_hierarchy(const CommunityHierarchy& hierarchy, const std::string& path) {
    std::vector<const Community*> sorted;
    for (const auto& [id, c] : hierarchy.communities) sorted.push_back(&c);
    std::sort(sorted.begin(), sorted.end(), [](const Community* a, const Community* b) {
        return a->level != b->level ? a->level < b->level : a->id < b->id;
    });
    std::vector<jsonl::json> records;
    for (const Community* c : sorted) {
        records.push_back({{"id", c->id},
                           {"level", c->level},
                           {"members", c->members},
                           {"parent", c->parent},
                           {"children", c->children},
                           {"report", c->report}});
    }
    jsonl::write_file(path, records);
}

CommunityHierarchy load_hierarchy(const std::string& path) {
    CommunityHierarchy hierarchy;
    uint32_t max_level = 0;
    bool any = false;
    for (const auto& rec : jsonl::read_file(path)) {
        Community c;
        c.id = rec.at("id").get<std::string>();
        c.level = rec.at("level").get<uint32_t>();
        for (const auto& m : rec.at("members")) c.members.insert(m.get<std::string>());
        c.parent = rec.value("parent", "");
        for (const auto& ch : rec.at("children")) c.children.insert(ch.get<std::string>());
        c.report = rec.value("report", "");
        max_level = std::max(max_level, c.level);
        any = true;
        if (c.level == 0) {
            for (const auto& m : c.members) hierarchy.entity_to_level0[m] = c.id;
        }
        hierarchy.communities[c.id] = std::move(c);
    }
    hierarchy.levels = any ? max_level + 1 : 0;
    hierarchy.top_level = any ? static_cast<int>(max_level) : -1;
    return hierarchy;
}

} // namespace hyrag
