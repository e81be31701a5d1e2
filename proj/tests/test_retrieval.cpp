#include <doctest.h>

#include "hyrag/retrieval.hpp"
#include "oracles.hpp"
#include "toy_pipeline.hpp"

using namespace hyrag;

TEST_CASE("strategy names round-trip and unknown names are rejected with the list") {
    for (const auto& name : strategy_names()) {
        CHECK(to_string(strategy_from_string(name)) == name);
    }
    CHECK_THROWS_WITH_AS(strategy_from_string("bogus"), doctest::Contains("community-global"),
                         config_error);
}

TEST_CASE("rag returns only chunks, ranked exactly like a brute-force scan") {
    auto p = toy::build();
    auto result = p->retriever->rag_retrieve("q", "Who discovered radium?");
    REQUIRE(!result.items.empty());
    CHECK(result.strategy == Strategy::rag);
    CHECK(result.items.size() == p->corpus.chunks.size());  // k=10 > 5 chunks: exhaustive

    for (const auto& item : result.items) CHECK(item.kind == ContextKind::chunk);
    for (size_t i = 1; i < result.items.size(); ++i) {
        CHECK(result.items[i - 1].score >= result.items[i].score);
    }

    // independent full cosine scan over the same mock vectors
    std::vector<std::pair<std::string, std::vector<double>>> entries;
    for (const auto& chunk : p->corpus.chunks) {
        entries.push_back({chunk.id, p->embedder->embed_one(chunk.text).values});
    }
    auto query_vec = p->embedder->embed_one("Who discovered radium?").values;
    auto expected = oracles::top_k(entries, query_vec, 10);
    REQUIRE(expected.size() == result.items.size());
    for (size_t i = 0; i < expected.size(); ++i) {
        CHECK(result.items[i].provenance[0] == expected[i].id);
        CHECK(result.items[i].score == doctest::Approx(expected[i].score).epsilon(1e-12));
    }
}

TEST_CASE("per-document scope never crosses documents") {
    auto p = toy::build();
    auto result = p->retriever->rag_retrieve("q", "anything at all", "d2");
    REQUIRE(!result.items.empty());
    for (const auto& item : result.items) {
        CHECK(item.provenance[0].rfind("d2#", 0) == 0);
    }
}

TEST_CASE("missing indexes raise index-not-built") {
    auto p = toy::build();
    RetrievalOptions opts;
    opts.model = "m";
    Retriever bare(nullptr, nullptr, nullptr, nullptr, p->embedder, p->gateway.get(),
                   p->prompts.get(), opts);
    CHECK_THROWS_AS(bare.rag_retrieve("q", "x"), index_not_built_error);
    CHECK_THROWS_AS(bare.kg_retrieve("q", "x", KgMode::triplets), index_not_built_error);
    CHECK_THROWS_AS(bare.community_local("q", "x"), index_not_built_error);
    CHECK_THROWS_AS(bare.community_global("q", "x"), index_not_built_error);

    // chunks but no reports: global search is still unavailable
    Retriever no_reports(&p->corpus, nullptr, &p->graph, &p->hierarchy, p->embedder,
                         p->gateway.get(), p->prompts.get(), opts);
    CHECK_THROWS_AS(no_reports.community_global("q", "x"), index_not_built_error);
}

TEST_CASE("query_entities: fixtures, dedup, and the heuristic fallback") {
    auto p = toy::build();
    bool fallback = false;
    auto names = p->retriever->query_entities("Who discovered radium?", &fallback);
    CHECK(names == std::vector<std::string>{"radium"});
    CHECK(!fallback);

    // duplicates collapse after normalization, order preserved
    p->provider->add_fixture({"query-entities", "dup-probe", "paris, Paris\nParis"});
    names = p->retriever->query_entities("dup-probe", &fallback);
    CHECK(names == std::vector<std::string>{"paris"});

    // garbled output (no parseable lines) falls back to the capitalization heuristic
    p->provider->add_fixture({"query-entities", "Marie Curie biography", "   \n  ,, ;"});
    names = p->retriever->query_entities("Marie Curie biography", &fallback);
    CHECK(names == std::vector<std::string>{"marie curie"});
    CHECK(fallback);
}

TEST_CASE("heuristic entity extraction drops lone sentence openers") {
    CHECK(heuristic_query_entities("Marie Curie biography") ==
          std::vector<std::string>{"marie curie"});
    CHECK(heuristic_query_entities("Who discovered radium?").empty());
    CHECK(heuristic_query_entities("Tell me about the Eiffel Tower in Paris") ==
          std::vector<std::string>{"eiffel tower", "paris"});
}

TEST_CASE("kg_retrieve: star fixture, hop order, text mode, degradation") {
    // star: A-r-B, A-s-C built from one chunk; query matches A
    auto mock = std::make_shared<MockProvider>();
    mock->add_fixture({"triplet-extract", "", "(A | r | B)\n(A | s | C)\n(C | t | D)"});
    mock->add_fixture({"query-entities", "about A", "A"});
    mock->add_fixture({"query-entities", "about nothing", "zzz unknown zzz"});
    Gateway gateway(mock);
    PromptLibrary prompts(std::string(HYRAG_SOURCE_DIR) + "/templates", "v1");
    auto corpus = ingest({{"doc", "", "one chunk.", ""}});
    chunk_corpus(corpus, 256, 0);
    KgBuildOptions kg_opts;
    kg_opts.model = "m";
    auto graph = build_graph(corpus, gateway, prompts, kg_opts);
    auto embedder = std::make_shared<MockEmbedder>(16);

    RetrievalOptions opts;
    opts.model = "m";
    opts.kg_depth = 1;
    Retriever depth1(&corpus, nullptr, &graph, nullptr, embedder, &gateway, &prompts, opts);

    auto result = depth1.kg_retrieve("q", "about A", KgMode::triplets);
    CHECK(result.strategy == Strategy::kg_triplets);
    CHECK(result.diagnostics.matched_entities == 1);
    REQUIRE(result.items.size() == 2);  // depth 1: only A's incident triplets
    CHECK(result.items[0].text == "a \xE2\x80\x94 r \xE2\x80\x94 b");
    CHECK(result.items[1].text == "a \xE2\x80\x94 s \xE2\x80\x94 c");
    for (const auto& item : result.items) CHECK(item.kind == ContextKind::triplet);

    // depth 2 reaches C-t-D strictly after the 1-hop triplets
    opts.kg_depth = 2;
    Retriever depth2(&corpus, nullptr, &graph, nullptr, embedder, &gateway, &prompts, opts);
    result = depth2.kg_retrieve("q", "about A", KgMode::triplets);
    REQUIRE(result.items.size() == 3);
    CHECK(result.items[2].text == "c \xE2\x80\x94 t \xE2\x80\x94 d");
    CHECK(result.diagnostics.hops_expanded == 2);

    // triplets_text appends each source chunk exactly once
    result = depth2.kg_retrieve("q", "about A", KgMode::triplets_text);
    REQUIRE(result.items.size() == 4);
    CHECK(result.items[3].kind == ContextKind::chunk);
    CHECK(result.items[3].provenance[0] == "doc#0");

    // zero matched entities degrade to an empty result
    result = depth2.kg_retrieve("q", "about nothing", KgMode::triplets);
    CHECK(result.items.empty());
    CHECK(result.diagnostics.matched_entities == 0);
}

TEST_CASE("kg budget truncation counts the overflow") {
    auto p = toy::build();
    RetrievalOptions opts = p->retriever->options();
    opts.kg_budget_items = 2;
    Retriever tight(&p->corpus, &p->vectors, &p->graph, &p->hierarchy, p->embedder,
                    p->gateway.get(), p->prompts.get(), opts);
    auto full = p->retriever->kg_retrieve("q", "How are Pierre Curie and Paris connected?",
                                          KgMode::triplets);
    auto cut = tight.kg_retrieve("q", "How are Pierre Curie and Paris connected?",
                                 KgMode::triplets);
    REQUIRE(full.items.size() > 2);
    CHECK(cut.items.size() == 2);
    CHECK(cut.diagnostics.truncations == int(full.items.size()) - 2);
    // truncation keeps the hop-ordered prefix
    for (size_t i = 0; i < cut.items.size(); ++i) {
        CHECK(cut.items[i].text == full.items[i].text);
    }
}

TEST_CASE("hop monotonicity: no deeper triplet precedes a nearer one") {
    auto p = toy::build();
    auto result = p->retriever->kg_retrieve("q", "Who discovered radium?", KgMode::triplets);
    REQUIRE(!result.items.empty());
    // hop numbers are recoverable: 1-hop triplets touch the matched entity
    std::set<std::string> matched = {"radium"};
    bool seen_deeper = false;
    for (const auto& item : result.items) {
        size_t idx = std::stoul(item.provenance[0].substr(1));
        const auto& t = p->graph.triplets[idx];
        bool touches = matched.count(t.head) || matched.count(t.tail);
        if (!touches) seen_deeper = true;
        CHECK(!(touches && seen_deeper));  // a 1-hop item after a deeper one
    }
    CHECK(seen_deeper);  // the fixture graph does reach 2 hops
}

TEST_CASE("community_local gathers descriptions, triplets, then reports") {
    auto p = toy::build();
    auto result = p->retriever->community_local("q", "Who discovered radium?");
    CHECK(result.strategy == Strategy::community_local);
    REQUIRE(!result.items.empty());
    CHECK(result.diagnostics.matched_entities == 1);

    // tier order: entity_desc ... triplet ... report
    std::vector<int> tier;
    for (const auto& item : result.items) {
        switch (item.kind) {
            case ContextKind::entity_desc: tier.push_back(0); break;
            case ContextKind::triplet: tier.push_back(1); break;
            case ContextKind::report: tier.push_back(2); break;
            default: tier.push_back(9); break;
        }
    }
    CHECK(std::is_sorted(tier.begin(), tier.end()));
    CHECK(tier.front() == 0);
    CHECK(tier.back() == 2);

    // the report is the level-0 community containing "radium"
    const std::string& community_id = p->hierarchy.entity_to_level0.at("radium");
    bool found_report = false;
    for (const auto& item : result.items) {
        if (item.kind == ContextKind::report) {
            CHECK(item.provenance[0] == community_id);
            found_report = true;
        }
    }
    CHECK(found_report);
}

TEST_CASE("two matched entities in one community produce one report") {
    auto p = toy::build();
    // both polonium and pitchblende live in the radium community
    p->provider->add_fixture({"query-entities", "both-probe", "polonium\npitchblende"});
    auto result = p->retriever->community_local("q", "both-probe");
    int reports = 0;
    for (const auto& item : result.items) {
        if (item.kind == ContextKind::report) ++reports;
    }
    CHECK(reports == 1);
    CHECK(result.diagnostics.matched_entities == 2);
}

TEST_CASE("community_local budget 1 keeps only the first description") {
    auto p = toy::build();
    RetrievalOptions opts = p->retriever->options();
    opts.local_budget_items = 1;
    Retriever tight(&p->corpus, &p->vectors, &p->graph, &p->hierarchy, p->embedder,
                    p->gateway.get(), p->prompts.get(), opts);
    auto full = p->retriever->community_local("q", "Who discovered radium?");
    auto cut = tight.community_local("q", "Who discovered radium?");
    REQUIRE(cut.items.size() == 1);
    CHECK(cut.items[0].kind == ContextKind::entity_desc);
    CHECK(cut.diagnostics.truncations == int(full.items.size()) - 1);
}

TEST_CASE("community_global returns only reports, ranked like a brute-force scan") {
    auto p = toy::build();
    auto result = p->retriever->community_global("q", "science and discoveries");
    CHECK(result.strategy == Strategy::community_global);
    REQUIRE(!result.items.empty());
    for (const auto& item : result.items) CHECK(item.kind == ContextKind::report);

    auto top = p->hierarchy.at_level(static_cast<uint32_t>(p->hierarchy.top_level));
    CHECK(result.items.size() == std::min<size_t>(5, top.size()));

    std::vector<std::pair<std::string, std::vector<double>>> entries;
    for (const Community* c : top) {
        entries.push_back({c->id, p->embedder->embed_one(c->report).values});
    }
    auto expected =
        oracles::top_k(entries, p->embedder->embed_one("science and discoveries").values, 5);
    for (size_t i = 0; i < result.items.size(); ++i) {
        CHECK(result.items[i].provenance[0] == expected[i].id);
    }
}

TEST_CASE("retrieval is deterministic: identical query, identical result bytes") {
    auto p1 = toy::build();
    auto p2 = toy::build();
    for (const char* query : {"Who discovered radium?", "What links Gustave Eiffel to the Seine?"}) {
        for (Strategy s : {Strategy::rag, Strategy::kg_triplets, Strategy::kg_triplets_text,
                           Strategy::community_local, Strategy::community_global}) {
            auto r1 = p1->retriever->retrieve(s, "q", query);
            auto r2 = p2->retriever->retrieve(s, "q", query);
            CHECK(retrieval_trace_record(r1).dump() == retrieval_trace_record(r2).dump());
            REQUIRE(r1.items.size() == r2.items.size());
            for (size_t i = 0; i < r1.items.size(); ++i) {
                CHECK(r1.items[i].text == r2.items[i].text);
                CHECK(r1.items[i].score == r2.items[i].score);
            }
        }
    }
}

TEST_CASE("no duplicate (kind, provenance) pairs in any strategy result") {
    auto p = toy::build();
    for (Strategy s : {Strategy::rag, Strategy::kg_triplets, Strategy::kg_triplets_text,
                       Strategy::community_local, Strategy::community_global}) {
        auto r = p->retriever->retrieve(s, "q", "Did Marie Curie and Pierre Curie both work in Paris?");
        std::set<std::pair<int, std::vector<std::string>>> seen;
        for (const auto& item : r.items) {
            CHECK(seen.emplace(static_cast<int>(item.kind), item.provenance).second);
        }
    }
}
