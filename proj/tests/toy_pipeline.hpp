#pragma once
// Builds the bundled toy corpus into in-memory artifacts for retrieval and
// hybrid tests, wiring the module layers together directly.

#include <memory>
#include <string>

#include "hyrag/community.hpp"
#include "hyrag/corpus.hpp"
#include "hyrag/embed.hpp"
#include "hyrag/gateway.hpp"
#include "hyrag/kg.hpp"
#include "hyrag/retrieval.hpp"

namespace toy {

struct Pipeline {
    hyrag::CorpusIndex corpus;
    hyrag::VectorIndex vectors;
    hyrag::KnowledgeGraph graph;
    hyrag::CommunityHierarchy hierarchy;
    std::shared_ptr<hyrag::MockEmbedder> embedder;
    std::shared_ptr<hyrag::MockProvider> provider;
    std::unique_ptr<hyrag::Gateway> gateway;
    std::unique_ptr<hyrag::PromptLibrary> prompts;
    std::unique_ptr<hyrag::Retriever> retriever;
};

inline std::unique_ptr<Pipeline> build(uint64_t seed = 7) {
    using namespace hyrag;
    auto p = std::make_unique<Pipeline>();
    std::string root = HYRAG_SOURCE_DIR;

    p->provider = std::make_shared<MockProvider>(
        MockProvider::load_fixture_file(root + "/fixtures/mock_fixtures.jsonl"));
    p->gateway = std::make_unique<Gateway>(p->provider);
    p->prompts = std::make_unique<PromptLibrary>(root + "/templates", "v1");
    p->embedder = std::make_shared<MockEmbedder>(64);

    p->corpus = ingest(load_corpus_file(root + "/fixtures/toy_corpus.jsonl"));
    chunk_corpus(p->corpus, 256, 0);
    for (const auto& chunk : p->corpus.chunks) {
        p->vectors.add(chunk.id, ItemKind::chunk, p->embedder->embed_one(chunk.text));
    }

    KgBuildOptions kg_opts;
    kg_opts.model = "m";
    p->graph = build_graph(p->corpus, *p->gateway, *p->prompts, kg_opts);

    p->hierarchy = detect_communities(p->graph, 3, seed);
    ReportOptions report_opts;
    report_opts.model = "m";
    generate_reports(p->hierarchy, p->graph, *p->gateway, *p->prompts, report_opts);

    if (p->hierarchy.top_level >= 0) {
        for (const Community* c :
             p->hierarchy.at_level(static_cast<uint32_t>(p->hierarchy.top_level))) {
            if (c->report.empty()) continue;
            p->vectors.add(c->id, ItemKind::report, p->embedder->embed_one(c->report));
        }
    }

    RetrievalOptions ropts;
    ropts.model = "m";
    p->retriever = std::make_unique<Retriever>(&p->corpus, &p->vectors, &p->graph, &p->hierarchy,
                                               p->embedder, p->gateway.get(), p->prompts.get(),
                                               ropts);
    return p;
}

} // namespace toy
