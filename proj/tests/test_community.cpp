#include <doctest.h>

#include <filesystem>
#include <random>

#include "hyrag/community.hpp"
#include "oracles.hpp"

using namespace hyrag;
namespace fs = std::filesystem;

namespace {

// entities named e0..e<n-1>, one triplet per listed edge
KnowledgeGraph graph_from_edges(int n, const std::vector<std::pair<int, int>>& edges) {
    KnowledgeGraph g;
    for (int i = 0; i < n; ++i) {
        std::string id = "e" + std::to_string(i);
        g.entities[id] = {id, id, {id}, "description of " + id};
    }
    int k = 0;
    for (const auto& [u, v] : edges) {
        g.triplets.push_back({"e" + std::to_string(u), "rel" + std::to_string(k++),
                              "e" + std::to_string(v), {"c#0"}});
    }
    std::sort(g.triplets.begin(), g.triplets.end(), [](const Triplet& a, const Triplet& b) {
        return std::tie(a.head, a.relation, a.tail) < std::tie(b.head, b.relation, b.tail);
    });
    for (size_t i = 0; i < g.triplets.size(); ++i) {
        g.adjacency[g.triplets[i].head].push_back(i);
        if (g.triplets[i].tail != g.triplets[i].head) {
            g.adjacency[g.triplets[i].tail].push_back(i);
        }
    }
    return g;
}

std::vector<std::vector<std::string>> to_blocks(const KnowledgeGraph& g,
                                                const std::vector<std::vector<int>>& partition) {
    std::vector<std::vector<std::string>> blocks;
    for (const auto& block : partition) {
        std::vector<std::string> ids;
        for (int i : block) ids.push_back("e" + std::to_string(i));
        blocks.push_back(ids);
    }
    return blocks;
}

// level-0 member sets as a canonical set-of-sets
std::set<std::set<std::string>> level_members(const CommunityHierarchy& h, uint32_t level) {
    std::set<std::set<std::string>> out;
    for (const Community* c : h.at_level(level)) out.insert(c->members);
    return out;
}

const std::vector<std::pair<int, int>> two_cliques_bridge = {
    {0, 1}, {0, 2}, {1, 2},   // clique A
    {3, 4}, {3, 5}, {4, 5},   // clique B
    {2, 3}};                  // the bridge

} // namespace

TEST_CASE("modularity identities from first principles") {
    // single edge, both nodes together -> 0
    auto g1 = graph_from_edges(2, {{0, 1}});
    CHECK(modularity(g1, {{"e0", "e1"}}) == doctest::Approx(0.0));
    // apart -> -0.5
    CHECK(modularity(g1, {{"e0"}, {"e1"}}) == doctest::Approx(-0.5));

    // two disjoint edges paired correctly -> 0.5
    auto g2 = graph_from_edges(4, {{0, 1}, {2, 3}});
    CHECK(modularity(g2, {{"e0", "e1"}, {"e2", "e3"}}) == doctest::Approx(0.5));

    // all-in-one is 0 on any graph
    auto g3 = graph_from_edges(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}});
    CHECK(modularity(g3, {{"e0", "e1", "e2", "e3", "e4"}}) == doctest::Approx(0.0));

    // partition must cover exactly
    CHECK_THROWS_AS(modularity(g1, {{"e0"}}), domain_error);
    CHECK_THROWS_AS(modularity(g1, {{"e0", "e1"}, {"e1"}}), domain_error);
    CHECK_THROWS_AS(modularity(g1, {{"e0", "e1", "zz"}}), domain_error);
}

TEST_CASE("two cliques joined by a bridge: level 0 recovers the cliques") {
    auto g = graph_from_edges(6, two_cliques_bridge);

    // brute-force maximum-modularity partition over all 203 partitions of 6 nodes
    auto best = oracles::best_partition(6, [&](const std::vector<std::vector<int>>& partition) {
        return modularity(g, to_blocks(g, partition));
    });
    std::set<std::set<std::string>> expected;
    for (const auto& block : best) {
        std::set<std::string> ids;
        for (int i : block) ids.insert("e" + std::to_string(i));
        expected.insert(ids);
    }
    CHECK(expected == std::set<std::set<std::string>>{{"e0", "e1", "e2"}, {"e3", "e4", "e5"}});

    auto hierarchy = detect_communities(g, 3, 42);
    REQUIRE(hierarchy.levels >= 1);
    CHECK(level_members(hierarchy, 0) == expected);
}

TEST_CASE("edgeless graph: n singleton communities, one level") {
    KnowledgeGraph g;
    for (int i = 0; i < 4; ++i) {
        std::string id = "e" + std::to_string(i);
        g.entities[id] = {id, id, {id}, ""};
    }
    auto hierarchy = detect_communities(g, 3, 0);
    CHECK(hierarchy.levels == 1);
    CHECK(hierarchy.top_level == 0);
    auto level0 = hierarchy.at_level(0);
    CHECK(level0.size() == 4);
    for (const Community* c : level0) {
        CHECK(c->members.size() == 1);
        CHECK(c->children.empty());
        CHECK(c->parent.empty());
    }
}

TEST_CASE("empty graph: zero levels") {
    KnowledgeGraph g;
    auto hierarchy = detect_communities(g, 3, 0);
    CHECK(hierarchy.levels == 0);
    CHECK(hierarchy.top_level == -1);
    CHECK(hierarchy.communities.empty());
}

TEST_CASE("same seed reproduces the hierarchy exactly") {
    auto g = graph_from_edges(10, {{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5}, {5, 3},
                                   {6, 7}, {7, 8}, {8, 6}, {2, 3}, {5, 6}, {9, 0}});
    auto h1 = detect_communities(g, 3, 123);
    auto h2 = detect_communities(g, 3, 123);
    REQUIRE(h1.communities.size() == h2.communities.size());
    for (const auto& [id, c] : h1.communities) {
        REQUIRE(h2.communities.count(id) == 1);
        const auto& other = h2.communities.at(id);
        CHECK(c.members == other.members);
        CHECK(c.parent == other.parent);
        CHECK(c.children == other.children);
        CHECK(c.level == other.level);
    }
}

TEST_CASE("invariants hold on 50 random graphs") {
    std::mt19937 rng(31337);
    for (int trial = 0; trial < 50; ++trial) {
        int n = 2 + int(rng() % 29);
        std::vector<std::pair<int, int>> edges;
        int m = 1 + int(rng() % (2 * n));
        for (int e = 0; e < m; ++e) {
            int u = int(rng() % n), v = int(rng() % n);
            if (u == v) continue;
            edges.push_back({u, v});
        }
        if (edges.empty()) edges.push_back({0, 1});
        auto g = graph_from_edges(n, edges);
        auto hierarchy = detect_communities(g, 3, trial);
        REQUIRE(hierarchy.levels >= 1);

        std::set<std::string> all_entities;
        for (const auto& [id, e] : g.entities) all_entities.insert(id);

        for (uint32_t level = 0; level < hierarchy.levels; ++level) {
            // partition invariant: every entity in exactly one community
            std::set<std::string> seen;
            for (const Community* c : hierarchy.at_level(level)) {
                CHECK(!c->members.empty());
                for (const auto& member : c->members) {
                    CHECK(seen.insert(member).second);
                }
                if (level == 0) CHECK(c->children.empty());
            }
            CHECK(seen == all_entities);
        }
        // parent-union invariant
        for (const auto& [id, c] : hierarchy.communities) {
            if (c.children.empty()) continue;
            std::set<std::string> union_members;
            for (const auto& child_id : c.children) {
                const Community* child = hierarchy.find(child_id);
                REQUIRE(child != nullptr);
                CHECK(child->level + 1 == c.level);
                CHECK(child->parent == c.id);
                union_members.insert(child->members.begin(), child->members.end());
            }
            CHECK(union_members == c.members);
        }

        // detected level-0 modularity >= both trivial partitions
        std::vector<std::vector<std::string>> detected;
        for (const Community* c : hierarchy.at_level(0)) {
            detected.push_back({c->members.begin(), c->members.end()});
        }
        std::vector<std::vector<std::string>> singletons;
        std::vector<std::string> one_block;
        for (const auto& id : all_entities) {
            singletons.push_back({id});
            one_block.push_back(id);
        }
        double q = modularity(g, detected);
        CHECK(q >= modularity(g, singletons) - 1e-12);
        CHECK(q >= modularity(g, {one_block}) - 1e-12);
    }
}

TEST_CASE("reports: singleton short-circuit, fixtures, parent composition") {
    auto g = graph_from_edges(7, {{0, 1}, {0, 2}, {1, 2}, {3, 4}, {3, 5}, {4, 5}, {2, 3}});
    // e6 is isolated -> singleton community
    auto hierarchy = detect_communities(g, 3, 1);
    REQUIRE(hierarchy.levels >= 1);

    auto mock = std::make_shared<MockProvider>();
    Gateway gateway(mock);
    auto gateway_calls_before = gateway.stats().provider_calls.load();
    PromptLibrary prompts(std::string(HYRAG_SOURCE_DIR) + "/templates", "v1");
    ReportOptions options;
    options.model = "m";
    generate_reports(hierarchy, g, gateway, prompts, options);

    size_t singleton_count = 0;
    for (const auto& [id, c] : hierarchy.communities) {
        if (c.members.size() == 1) {
            ++singleton_count;
            const auto& entity = *c.members.begin();
            CHECK(c.report == g.entities.at(entity).description);  // verbatim, no LLM
        } else {
            CHECK(!c.report.empty());
        }
    }
    CHECK(singleton_count >= 1);
    // every provider call was for a non-singleton community
    size_t non_singletons = hierarchy.communities.size() - singleton_count;
    CHECK(gateway.stats().provider_calls.load() - gateway_calls_before == non_singletons);
}

TEST_CASE("fixture-pinned reports and child inclusion in parent prompts") {
    auto g = graph_from_edges(6, two_cliques_bridge);
    auto hierarchy = detect_communities(g, 3, 7);
    REQUIRE(hierarchy.levels >= 1);

    // capture prompts with an echoing provider
    class RecordingProvider : public CompletionProvider {
    public:
        std::vector<std::string> prompts;
        std::string complete(const CompletionRequest& req) override {
            prompts.push_back(req.prompt);
            return "RPT<" + std::to_string(prompts.size()) + ">";
        }
        ProviderKind kind() const override { return ProviderKind::mock; }
    };
    auto recorder = std::make_shared<RecordingProvider>();
    Gateway gateway(recorder);
    PromptLibrary prompts(std::string(HYRAG_SOURCE_DIR) + "/templates", "v1");
    ReportOptions options;
    options.model = "m";

    // force a 2-level hierarchy for the composition check
    if (hierarchy.levels == 1) {
        // synthesize a parent over the two level-0 communities
        auto level0 = hierarchy.at_level(0);
        REQUIRE(level0.size() == 2);
        Community parent;
        parent.id = "c1-0";
        parent.level = 1;
        for (const Community* c : level0) {
            parent.members.insert(c->members.begin(), c->members.end());
            parent.children.insert(c->id);
            hierarchy.communities[c->id].parent = parent.id;
        }
        hierarchy.communities[parent.id] = parent;
        hierarchy.levels = 2;
        hierarchy.top_level = 1;
    }

    generate_reports(hierarchy, g, gateway, prompts, options);
    const Community* parent = hierarchy.find("c1-0");
    REQUIRE(parent != nullptr);
    REQUIRE(!parent->children.empty());
    // the parent prompt is the last one issued; it must embed every child report
    const std::string& parent_prompt = recorder->prompts.back();
    for (const auto& child_id : parent->children) {
        const Community* child = hierarchy.find(child_id);
        CHECK(parent_prompt.find(child->report) != std::string::npos);
    }
}

TEST_CASE("provider failure degrades to a placeholder report") {
    class FailingProvider : public CompletionProvider {
    public:
        std::string complete(const CompletionRequest& req) override {
            throw provider_error(req.tag, "synthetic outage");
        }
        ProviderKind kind() const override { return ProviderKind::mock; }
    };
    auto g = graph_from_edges(3, {{0, 1}, {1, 2}, {2, 0}});
    auto hierarchy = detect_communities(g, 3, 0);
    Gateway gateway(std::make_shared<FailingProvider>());
    PromptLibrary prompts(std::string(HYRAG_SOURCE_DIR) + "/templates", "v1");
    ReportOptions options;
    options.model = "m";
    generate_reports(hierarchy, g, gateway, prompts, options);
    for (const auto& [id, c] : hierarchy.communities) {
        if (c.members.size() > 1) CHECK(c.report == "[report unavailable]");
    }
    CHECK(hierarchy.report_failures > 0);
}

TEST_CASE("hierarchy persistence round-trips sorted by (level, id)") {
    auto g = graph_from_edges(6, two_cliques_bridge);
    auto hierarchy = detect_communities(g, 3, 2);
    for (auto& [id, c] : hierarchy.communities) c.report = "report of " + id;

    auto path = fs::temp_directory_path() / "hyrag_hierarchy.jsonl";
    save_hierarchy(hierarchy, path.string());
    auto loaded = load_hierarchy(path.string());
    CHECK(loaded.levels == hierarchy.levels);
    CHECK(loaded.top_level == hierarchy.top_level);
    REQUIRE(loaded.communities.size() == hierarchy.communities.size());
    for (const auto& [id, c] : hierarchy.communities) {
        const Community* other = loaded.find(id);
        REQUIRE(other != nullptr);
        CHECK(other->members == c.members);
        CHECK(other->report == c.report);
    }
    CHECK(loaded.entity_to_level0 == hierarchy.entity_to_level0);
    fs::remove(path);
}
