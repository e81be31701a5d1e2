#include <doctest.h>

#include <filesystem>

#include "hyrag/engine.hpp"
#include "hyrag/jsonl.hpp"
#include "hyrag/kg.hpp"

using namespace hyrag;
namespace fs = std::filesystem;

namespace {

PromptLibrary test_prompts() {
    return PromptLibrary(std::string(HYRAG_SOURCE_DIR) + "/templates", "v1");
}

CorpusIndex two_chunk_corpus(const std::string& text_a, const std::string& text_b) {
    auto idx = ingest({{"da", "", text_a, ""}, {"db", "", text_b, ""}});
    chunk_corpus(idx, 256, 0);
    return idx;
}

} // namespace

TEST_CASE("normalize_entity rules") {
    CHECK(normalize_entity("  Marie   Curie ") == "marie curie");
    CHECK(normalize_entity("The Eiffel Tower") == "eiffel tower");
    CHECK(normalize_entity("RADIUM") == "radium");
    CHECK(normalize_entity("An Apple") == "apple");
    CHECK(normalize_entity("   ") == "");
    CHECK(normalize_entity("the") == "the");  // a bare article is kept, not emptied
}

TEST_CASE("triplet line parser follows the grammar strictly") {
    ExtractStats stats;
    auto drafts = parse_triplet_lines("(Marie Curie | discovered | radium)", "c1", 15, stats);
    REQUIRE(drafts.size() == 1);
    CHECK(drafts[0].head_surface == "Marie Curie");
    CHECK(drafts[0].relation == "discovered");
    CHECK(drafts[0].tail_surface == "radium");
    CHECK(drafts[0].chunk_id == "c1");
    CHECK(stats.malformed_lines == 0);
    CHECK(!stats.fully_unparseable);

    stats = {};
    CHECK(parse_triplet_lines("garbled text with no parens", "c1", 15, stats).empty());
    CHECK(stats.malformed_lines == 1);
    CHECK(stats.fully_unparseable);

    stats = {};
    auto mixed = parse_triplet_lines("(a | b)\n(x | r | y)\n(p || q)\n( | r | t)", "c2", 15, stats);
    REQUIRE(mixed.size() == 1);  // two-field, empty-field lines are skipped
    CHECK(mixed[0].head_surface == "x");
    CHECK(stats.malformed_lines == 3);
    CHECK(!stats.fully_unparseable);

    stats = {};
    std::string many;
    for (int i = 0; i < 20; ++i) many += "(h" + std::to_string(i) + " | r | t)\n";
    CHECK(parse_triplet_lines(many, "c3", 15, stats).size() == 15);  // retention cap
}

TEST_CASE("build_graph merges entities and deduplicates triplets with provenance union") {
    // the same fact extracted from two chunks, with varying surface forms
    auto mock = std::make_shared<MockProvider>();
    mock->add_fixture({"triplet-extract", "first passage", "(A | r | B)\n(a  | r | B)"});
    mock->add_fixture({"triplet-extract", "second passage", "(a | r | b)"});
    Gateway gateway(mock);
    auto prompts = test_prompts();

    auto corpus = two_chunk_corpus("first passage.", "second passage.");
    KgBuildOptions options;
    options.model = "m";
    auto graph = build_graph(corpus, gateway, prompts, options);

    REQUIRE(graph.entities.size() == 2);  // A/a merge, B/b merge
    REQUIRE(graph.triplets.size() == 1);
    CHECK(graph.triplets[0].head == "a");
    CHECK(graph.triplets[0].tail == "b");
    CHECK(graph.triplets[0].source_chunk_ids.size() == 2);
    CHECK(graph.entities.at("a").surface_forms.count("A") == 1);

    // referential integrity + adjacency round-trip
    for (size_t i = 0; i < graph.triplets.size(); ++i) {
        const auto& t = graph.triplets[i];
        CHECK(graph.entities.count(t.head) == 1);
        CHECK(graph.entities.count(t.tail) == 1);
        for (const auto& cid : t.source_chunk_ids) CHECK(corpus.find_chunk(cid) != nullptr);
    }
    for (const auto& [entity, incidents] : graph.adjacency) {
        for (size_t idx : incidents) {
            const auto& t = graph.triplets[idx];
            CHECK((t.head == entity || t.tail == entity));
        }
    }
}

TEST_CASE("drafts with endpoints normalizing to empty are dropped") {
    auto mock = std::make_shared<MockProvider>();
    mock->add_fixture({"triplet-extract", "", "(  | r | B)\n(The | r | C)\n(D | r | E)"});
    Gateway gateway(mock);
    auto prompts = test_prompts();
    auto corpus = two_chunk_corpus("passage one.", "passage two.");
    KgBuildOptions options;
    options.model = "m";
    auto graph = build_graph(corpus, gateway, prompts, options);

    // "(  | r | B)" parses as malformed (empty field); "(The | ...)" normalizes to "the", kept
    CHECK(graph.entities.count("the") == 1);
    CHECK(graph.entities.count("d") == 1);
    CHECK(graph.triplets.size() == 2);
}

TEST_CASE("empty corpus yields an empty graph") {
    auto mock = std::make_shared<MockProvider>();
    Gateway gateway(mock);
    auto prompts = test_prompts();
    CorpusIndex corpus;  // no docs, no chunks
    KgBuildOptions options;
    options.model = "m";
    auto graph = build_graph(corpus, gateway, prompts, options);
    CHECK(graph.empty());
    CHECK(graph.triplets.empty());
}

TEST_CASE("rebuild from a warm cache yields identical persisted graphs") {
    auto dir = fs::temp_directory_path() / "hyrag_kg_idem";
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto prompts = test_prompts();
    auto fixtures = MockProvider::load_fixture_file(std::string(HYRAG_SOURCE_DIR) +
                                                    "/fixtures/mock_fixtures.jsonl");
    auto docs = load_corpus_file(std::string(HYRAG_SOURCE_DIR) + "/fixtures/toy_corpus.jsonl");
    KgBuildOptions options;
    options.model = "m";

    std::string bytes[2];
    for (int round = 0; round < 2; ++round) {
        Gateway gateway(std::make_shared<MockProvider>(fixtures), dir / "cache");
        auto corpus = ingest(docs);
        chunk_corpus(corpus, 256, 0);
        auto graph = build_graph(corpus, gateway, prompts, options);
        save_graph(graph, (dir / "e.jsonl").string(), (dir / "t.jsonl").string());
        bytes[round] = jsonl::read_text_file(dir / "e.jsonl") + "\xff" +
                       jsonl::read_text_file(dir / "t.jsonl");
    }
    CHECK(bytes[0] == bytes[1]);
    fs::remove_all(dir);
}

TEST_CASE("graph persistence round-trips") {
    KnowledgeGraph graph;
    graph.entities["a"] = {"a", "a", {"A", "a"}, "desc a"};
    graph.entities["b"] = {"b", "b", {"B"}, ""};
    graph.triplets.push_back({"a", "rel", "b", {"c#0"}});
    graph.adjacency["a"] = {0};
    graph.adjacency["b"] = {0};

    auto dir = fs::temp_directory_path() / "hyrag_kg_roundtrip";
    fs::create_directories(dir);
    save_graph(graph, (dir / "e.jsonl").string(), (dir / "t.jsonl").string());
    auto loaded = load_graph((dir / "e.jsonl").string(), (dir / "t.jsonl").string());
    CHECK(loaded.entities.size() == 2);
    CHECK(loaded.entities.at("a").surface_forms.size() == 2);
    REQUIRE(loaded.triplets.size() == 1);
    CHECK(loaded.triplets[0].relation == "rel");
    CHECK(loaded.incident("a") == std::vector<size_t>{0});
    fs::remove_all(dir);
}

TEST_CASE("answer entity coverage") {
    KnowledgeGraph graph;
    for (const char* id : {"paris", "france"}) {
        graph.entities[id] = {id, id, {id}, ""};
    }
    std::vector<QueryRecord> queries = {{"q1", "", "", {"Paris", "Berlin"}, ""}};
    auto coverage = answer_entity_coverage(graph, queries);
    REQUIRE(coverage.has_value());
    CHECK(*coverage == doctest::Approx(0.5));

    std::vector<QueryRecord> all_present = {{"q1", "", "", {"Paris"}, ""},
                                            {"q2", "", "", {"France"}, ""}};
    CHECK(*answer_entity_coverage(graph, all_present) == doctest::Approx(1.0));

    // zero golds -> absent, not zero
    std::vector<QueryRecord> no_golds = {{"q1", "", "", {}, ""}};
    CHECK(!answer_entity_coverage(graph, no_golds).has_value());

    // whole-word substring of a canonical counts as covered
    graph.entities["university of paris"] = {"university of paris", "university of paris",
                                             {"University of Paris"}, ""};
    std::vector<QueryRecord> substr = {{"q1", "", "", {"university"}, ""}};
    CHECK(*answer_entity_coverage(graph, substr) == doctest::Approx(1.0));
    // ...but a partial word never matches
    std::vector<QueryRecord> partial = {{"q1", "", "", {"univ"}, ""}};
    CHECK(*answer_entity_coverage(graph, partial) == doctest::Approx(0.0));
}

TEST_CASE("coverage is monotone under added triplets") {
    auto mock = std::make_shared<MockProvider>();
    Gateway gateway(mock);
    std::vector<QueryRecord> queries = {{"q1", "", "", {"radium", "oxygen"}, ""}};

    KnowledgeGraph before;
    before.entities["radium"] = {"radium", "radium", {"radium"}, ""};
    auto c1 = answer_entity_coverage(before, queries);

    KnowledgeGraph after = before;
    after.entities["oxygen"] = {"oxygen", "oxygen", {"oxygen"}, ""};
    after.triplets.push_back({"radium", "r", "oxygen", {"c#0"}});
    auto c2 = answer_entity_coverage(after, queries);
    CHECK(*c2 >= *c1);
    CHECK(*c2 == doctest::Approx(1.0));
}

TEST_CASE("busy entities get one LLM description, quiet ones keep raw context") {
    auto mock = std::make_shared<MockProvider>();
    mock->add_fixture({"triplet-extract", "",
                       "(Hub | r1 | A)\n(Hub | r2 | B)\n(Hub | r3 | C)"});
    mock->add_fixture({"entity-describe", "Entity: hub", "summarized hub"});
    Gateway gateway(mock);
    auto prompts = test_prompts();
    auto corpus = ingest({{"d", "", "anything.", ""}});
    chunk_corpus(corpus, 256, 0);
    KgBuildOptions options;
    options.model = "m";
    options.describe_mention_threshold = 2;
    auto graph = build_graph(corpus, gateway, prompts, options);

    CHECK(graph.entities.at("hub").description == "summarized hub");  // 3 mentions > 2
    // "a" has one mention: raw concatenated context, no LLM call
    CHECK(graph.entities.at("a").description.find("hub") != std::string::npos);
    CHECK(graph.entities.at("a").description.find("\xE2\x80\x94") != std::string::npos);
}

TEST_CASE("render_triplet is byte-exact em-dash separated") {
    Triplet t{"head", "rel", "tail", {}};
    CHECK(render_triplet(t) == "head \xE2\x80\x94 rel \xE2\x80\x94 tail");
}
