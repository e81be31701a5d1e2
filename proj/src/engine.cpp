#include "hyrag/engine.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "hyrag/jsonl.hpp"

namespace hyrag {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string sanitize_for_path(const std::string& id) {
    std::string out;
    for (char c : id) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                  c == '.' || c == '_' || c == '-';
        out.push_back(ok ? c : '_');
    }
    return out.empty() ? "_" : out;
}

// ---------------------------------------------------------------------------
// Lock
// ---------------------------------------------------------------------------

IndexLock::IndexLock(const fs::path& dir) {
    fs::create_directories(dir);
    lock_path_ = dir / ".lock";
    std::FILE* f = std::fopen(lock_path_.string().c_str(), "wx");
    if (!f) {
        throw runtime_failure("index directory locked (remove stale " + lock_path_.string() +
                              " if no other writer is running)");
    }
    std::fclose(f);
}

IndexLock::~IndexLock() {
    std::error_code ec;
    fs::remove(lock_path_, ec);
}

// ---------------------------------------------------------------------------
// Engine
// ---------------------------------------------------------------------------

Engine::Engine(RunConfig config)
    : config_(std::move(config)), prompts_(config_.template_dir, config_.template_version) {
    // completion provider
    std::shared_ptr<CompletionProvider> provider;
    if (config_.provider == "mock") {
        auto mock = std::make_shared<MockProvider>();
        if (!config_.mock_fixtures.empty()) {
            for (auto& f : MockProvider::load_fixture_file(config_.mock_fixtures)) {
                mock->add_fixture(std::move(f));
            }
        }
        mock->set_judge_mode(config_.mock_judge_mode == "slot1" ? MockJudgeMode::slot_one
                                                                : MockJudgeMode::content);
        provider = mock;
    } else {
        auto remote = std::make_shared<RemoteProvider>(config_.llm_base, config_.llm_key);
        provider = remote;
    }
    gateway_ = std::make_shared<Gateway>(provider, fs::path(config_.cache_dir) / "llm",
                                         config_.max_inflight);

    // embedder
    std::shared_ptr<Embedder> inner;
    if (config_.embed_provider == "mock") {
        inner = std::make_shared<MockEmbedder>(config_.embed_dims);
    } else {
        inner = std::make_shared<RemoteEmbedder>(config_.embed_base, config_.embed_key,
                                                 config_.embed_model, config_.embed_dims);
    }
    embedder_ = std::make_shared<CachingEmbedder>(inner, fs::path(config_.cache_dir) / "embed");
}

HybridOptions Engine::hybrid_options() const {
    HybridOptions opts;
    opts.model = config_.model;
    opts.classify_max_tokens = config_.classify_max_tokens;
    opts.answer_max_tokens = config_.max_output_tokens;
    opts.integration_budget_items = config_.integration_budget;
    opts.prompt_token_budget = config_.prompt_token_budget;
    return opts;
}

PipelineArtifacts Engine::build_one(const std::vector<Document>& docs, CorpusMode mode) {
    PipelineArtifacts artifacts;
    artifacts.corpus = ingest(docs);
    artifacts.corpus.mode = mode;
    chunk_corpus(artifacts.corpus, config_.chunk_max_tokens, config_.chunk_overlap);

    // chunk vectors
    std::vector<std::string> texts;
    for (const auto& c : artifacts.corpus.chunks) texts.push_back(c.text);
    auto chunk_vectors = embedder_->embed(texts);
    for (size_t i = 0; i < chunk_vectors.size(); ++i) {
        artifacts.vectors.add(artifacts.corpus.chunks[i].id, ItemKind::chunk,
                              std::move(chunk_vectors[i]));
    }

    // knowledge graph
    KgBuildOptions kg_opts;
    kg_opts.model = config_.model;
    kg_opts.max_output_tokens = config_.max_output_tokens;
    kg_opts.max_triplets_per_chunk = config_.max_triplets_per_chunk;
    kg_opts.describe_mention_threshold = config_.describe_mention_threshold;
    artifacts.graph = build_graph(artifacts.corpus, *gateway_, prompts_, kg_opts);

    // communities + reports
    artifacts.hierarchy = detect_communities(artifacts.graph, config_.max_levels, config_.seed);
    ReportOptions report_opts;
    report_opts.model = config_.model;
    report_opts.max_output_tokens = config_.max_output_tokens;
    generate_reports(artifacts.hierarchy, artifacts.graph, *gateway_, prompts_, report_opts);

    // top-level reports join the vector index for global search
    if (artifacts.hierarchy.top_level >= 0) {
        auto top = artifacts.hierarchy.at_level(
            static_cast<uint32_t>(artifacts.hierarchy.top_level));
        std::vector<std::string> report_texts;
        std::vector<std::string> report_ids;
        for (const Community* c : top) {
            if (c->report.empty()) continue;
            report_ids.push_back(c->id);
            report_texts.push_back(c->report);
        }
        auto report_vectors = embedder_->embed(report_texts);
        for (size_t i = 0; i < report_ids.size(); ++i) {
            artifacts.vectors.add(report_ids[i], ItemKind::report, std::move(report_vectors[i]));
        }
    }
    return artifacts;
}

void Engine::save_artifacts(const PipelineArtifacts& artifacts, const fs::path& dir) {
    fs::create_directories(dir);
    save_chunks(artifacts.corpus, (dir / "chunks.jsonl").string());
    artifacts.vectors.save((dir / "vectors.jsonl").string());
    save_graph(artifacts.graph, (dir / "entities.jsonl").string(),
               (dir / "triplets.jsonl").string());
    save_hierarchy(artifacts.hierarchy, (dir / "communities.jsonl").string());
}

PipelineArtifacts Engine::load_artifacts(const fs::path& dir) const {
    for (const char* name :
         {"chunks.jsonl", "vectors.jsonl", "entities.jsonl", "triplets.jsonl",
          "communities.jsonl"}) {
        if (!fs::exists(dir / name)) {
            throw index_not_built_error((dir / name).string());
        }
    }
    PipelineArtifacts artifacts;
    artifacts.corpus.mode = config_.mode;
    artifacts.corpus.chunks = load_chunks((dir / "chunks.jsonl").string());
    // reconstruct the document registry from chunk provenance
    std::set<std::string> doc_ids;
    for (const auto& c : artifacts.corpus.chunks) doc_ids.insert(c.doc_id);
    for (const auto& id : doc_ids) {
        Document d;
        d.id = id;
        artifacts.corpus.doc_by_id[id] = artifacts.corpus.documents.size();
        artifacts.corpus.documents.push_back(std::move(d));
    }
    artifacts.vectors = VectorIndex::load((dir / "vectors.jsonl").string());
    artifacts.graph =
        load_graph((dir / "entities.jsonl").string(), (dir / "triplets.jsonl").string());
    artifacts.hierarchy = load_hierarchy((dir / "communities.jsonl").string());
    return artifacts;
}

fs::path Engine::scope_dir(const std::string& scope) const {
    if (config_.mode == CorpusMode::shared) return config_.index_dir;
    if (scope.empty()) {
        throw config_error("per-document mode requires a query scope (document id)");
    }
    return fs::path(config_.index_dir) / "docs" / sanitize_for_path(scope);
}

Engine::Bundle& Engine::bundle_for_scope(const std::string& scope) {
    std::string key = config_.mode == CorpusMode::shared ? "" : scope;
    auto it = bundles_.find(key);
    if (it != bundles_.end()) return *it->second;

    auto bundle = std::make_unique<Bundle>();
    bundle->artifacts = load_artifacts(scope_dir(scope));

    RetrievalOptions ropts;
    ropts.model = config_.model;
    ropts.max_output_tokens = config_.max_output_tokens;
    ropts.rag_k = config_.rag_k;
    ropts.kg_depth = config_.kg_depth;
    ropts.kg_budget_items = config_.kg_budget;
    ropts.local_budget_items = config_.local_budget;
    ropts.global_k_reports = config_.global_k_reports;
    bundle->retriever = std::make_unique<Retriever>(
        &bundle->artifacts.corpus, &bundle->artifacts.vectors, &bundle->artifacts.graph,
        &bundle->artifacts.hierarchy, embedder_, gateway_.get(), &prompts_, ropts);
    bundle->hybrid = std::make_unique<HybridPipeline>(bundle->retriever.get(), gateway_.get(),
                                                      &prompts_, hybrid_options());
    auto [pos, inserted] = bundles_.emplace(key, std::move(bundle));
    return *pos->second;
}

BuildCounters Engine::build_index() {
    if (config_.corpus.empty() || !fs::exists(config_.corpus)) {
        throw config_error("corpus not found: " + config_.corpus);
    }
    IndexLock lock(config_.index_dir);
    auto docs = load_corpus_file(config_.corpus);

    BuildCounters counters;
    auto accumulate = [&counters](const PipelineArtifacts& a) {
        counters.documents += a.corpus.documents.size();
        counters.chunks += a.corpus.chunks.size();
        counters.vectors += a.vectors.size();
        counters.entities += a.graph.entities.size();
        counters.triplets += a.graph.triplets.size();
        counters.communities += a.hierarchy.communities.size();
    };

    if (config_.mode == CorpusMode::shared) {
        auto artifacts = build_one(docs, CorpusMode::shared);
        save_artifacts(artifacts, config_.index_dir);
        accumulate(artifacts);
    } else {
        for (const auto& doc : docs) {
            auto artifacts = build_one({doc}, CorpusMode::per_document);
            save_artifacts(artifacts, fs::path(config_.index_dir) / "docs" /
                                          sanitize_for_path(doc.id));
            accumulate(artifacts);
        }
    }
    config_.write_echo(config_.index_dir);
    counters.provider_calls = gateway_->stats().provider_calls.load();
    counters.cache_hits = gateway_->stats().cache_hits.load();
    return counters;
}

GeneratedAnswer Engine::ask(const std::string& query, Strategy strategy,
                            const std::string& scope_doc, const std::string& trace_path) {
    Bundle& bundle = bundle_for_scope(scope_doc);
    RetrievalResult result = bundle.hybrid->retrieve_any(strategy, "adhoc", query, scope_doc);
    if (!trace_path.empty()) {
        jsonl::write_file_atomic(trace_path, retrieval_trace_record(result).dump() + "\n");
    }
    return bundle.hybrid->generate("adhoc", query, result);
}

EvalOutcome Engine::run_eval(const std::vector<Strategy>& strategies,
                             const std::string& trace_path) {
    if (config_.dataset.empty() || !fs::exists(config_.dataset)) {
        throw config_error("dataset not found: " + config_.dataset);
    }
    auto queries = load_queries(config_.dataset);

    EvalOutcome outcome;
    std::string trace;
    json strategies_report = json::object();
    // per strategy: query id -> correctness, for the confusion block
    std::map<std::string, std::map<std::string, bool>> correctness;

    for (Strategy strategy : strategies) {
        std::vector<Prediction> predictions;
        std::map<std::string, std::map<std::string, double>> per_query;
        std::map<std::string, std::string> qtype_by_id;

        for (const auto& q : queries) {
            try {
                Bundle& bundle = bundle_for_scope(q.scope);
                RetrievalResult r = bundle.hybrid->retrieve_any(strategy, q.id, q.text, q.scope);
                if (!trace_path.empty()) {
                    trace += retrieval_trace_record(r).dump() + "\n";
                }
                GeneratedAnswer answer = bundle.hybrid->generate(q.id, q.text, r);
                predictions.push_back({q.id, to_string(strategy), answer.text});
                qtype_by_id[q.id] = q.qtype;
                if (!q.golds.empty() || q.qtype == "null") {
                    auto scores = score_prediction(answer.text, q, embedder_.get());
                    if (!scores.empty()) {
                        per_query[q.id] = scores;
                        correctness[to_string(strategy)][q.id] = scores.at("accuracy") == 1.0;
                    }
                }
            } catch (const std::exception& e) {
                outcome.failures.push_back({q.id, to_string(strategy), e.what()});
            }
        }

        save_predictions(predictions, (fs::path(config_.out_dir) /
                                       ("predictions." + to_string(strategy) + ".jsonl"))
                                          .string());
        MetricReport report = aggregate(per_query, qtype_by_id);
        strategies_report[to_string(strategy)] = report.to_json();
    }

    json report = {{"strategies", strategies_report}};

    if (strategies.size() == 2) {
        const std::string name_a = to_string(strategies[0]);
        const std::string name_b = to_string(strategies[1]);
        std::vector<bool> correct_a, correct_b;
        for (const auto& q : queries) {
            auto ia = correctness[name_a].find(q.id);
            auto ib = correctness[name_b].find(q.id);
            if (ia == correctness[name_a].end() || ib == correctness[name_b].end()) continue;
            correct_a.push_back(ia->second);
            correct_b.push_back(ib->second);
        }
        ConfusionQuadrants quadrants = confusion_matrix(correct_a, correct_b);
        report["confusion"] = {
            {"a", name_a},
            {"b", name_b},
            {"metric", "accuracy"},
            {"both", quadrants.both},
            {"a_only", quadrants.a_only},
            {"b_only", quadrants.b_only},
            {"neither", quadrants.neither},
            {"frac_both", quadrants.frac_both()},
            {"frac_a_only", quadrants.frac_a_only()},
            {"frac_b_only", quadrants.frac_b_only()},
            {"frac_neither", quadrants.frac_neither()},
        };
    }

    // answer-entity coverage diagnostic over the graphs actually queried
    {
        size_t covered = 0, total = 0;
        std::set<std::string> scopes;
        for (const auto& q : queries) {
            scopes.insert(config_.mode == CorpusMode::shared ? "" : q.scope);
        }
        for (const auto& scope : scopes) {
            try {
                Bundle& bundle = bundle_for_scope(scope);
                std::vector<QueryRecord> scoped;
                for (const auto& q : queries) {
                    if (config_.mode == CorpusMode::shared || q.scope == scope) scoped.push_back(q);
                }
                auto [c, t] = answer_entity_coverage_counts(bundle.artifacts.graph, scoped);
                covered += c;
                total += t;
            } catch (const std::exception&) {
                // unloadable scope already recorded as per-query failures
            }
        }
        if (total > 0) {
            report["answer_entity_coverage"] =
                static_cast<double>(covered) / static_cast<double>(total);
        }
    }

    if (!outcome.failures.empty()) {
        json failures = json::array();
        for (const auto& f : outcome.failures) {
            failures.push_back(
                {{"query_id", f.query_id}, {"strategy", f.strategy}, {"error", f.error}});
        }
        report["failures"] = failures;
    }

    fs::create_directories(config_.out_dir);
    jsonl::write_file_atomic(fs::path(config_.out_dir) / "report.json", report.dump(2) + "\n");
    if (!trace_path.empty()) jsonl::write_file_atomic(trace_path, trace);
    config_.write_echo(config_.out_dir);
    outcome.report = std::move(report);
    return outcome;
}

std::vector<JudgeVerdict> Engine::run_judge(const std::string& predictions_a,
                                            const std::string& predictions_b) {
    if (config_.dataset.empty() || !fs::exists(config_.dataset)) {
        throw config_error("dataset not found: " + config_.dataset);
    }
    auto queries = load_queries(config_.dataset);
    std::map<std::string, std::string> text_by_id;
    for (const auto& q : queries) text_by_id[q.id] = q.text;

    auto preds_a = load_predictions(predictions_a);
    auto preds_b = load_predictions(predictions_b);
    if (preds_a.size() != preds_b.size()) {
        throw config_error("prediction files differ in length: " +
                           std::to_string(preds_a.size()) + " vs " +
                           std::to_string(preds_b.size()));
    }

    JudgeOptions opts;
    opts.model = config_.model;
    std::vector<JudgeVerdict> verdicts;
    for (size_t i = 0; i < preds_a.size(); ++i) {
        if (preds_a[i].query_id != preds_b[i].query_id) {
            throw config_error("prediction files misaligned at record " + std::to_string(i) +
                               ": '" + preds_a[i].query_id + "' vs '" + preds_b[i].query_id + "'");
        }
        auto it = text_by_id.find(preds_a[i].query_id);
        if (it == text_by_id.end()) {
            throw config_error("query id '" + preds_a[i].query_id + "' not in dataset");
        }
        auto batch = judge_pairwise(preds_a[i].query_id, it->second, preds_a[i].text,
                                    preds_b[i].text, *gateway_, prompts_, opts);
        for (auto& v : batch) verdicts.push_back(std::move(v));
    }

    fs::create_directories(config_.out_dir);
    save_verdicts(verdicts, (fs::path(config_.out_dir) / "verdicts.jsonl").string());
    config_.write_echo(config_.out_dir);
    return verdicts;
}

std::vector<RouteDecision> Engine::run_route() {
    if (config_.dataset.empty() || !fs::exists(config_.dataset)) {
        throw config_error("dataset not found: " + config_.dataset);
    }
    auto queries = load_queries(config_.dataset);
    HybridPipeline classifier(nullptr, gateway_.get(), &prompts_, hybrid_options());

    std::vector<RouteDecision> decisions;
    std::vector<json> records;
    for (const auto& q : queries) {
        RouteDecision d = classifier.classify_query(q.id, q.text);
        records.push_back({{"query_id", d.query_id},
                           {"klass", to_string(d.klass)},
                           {"target", to_string(d.target)},
                           {"raw_label", d.raw_label},
                           {"fallback_used", d.fallback_used}});
        decisions.push_back(std::move(d));
    }
    fs::create_directories(config_.out_dir);
    jsonl::write_file(fs::path(config_.out_dir) / "routes.jsonl", records);
    config_.write_echo(config_.out_dir);
    return decisions;
}

// ---------------------------------------------------------------------------
// Report table
// ---------------------------------------------------------------------------

std::string render_report_table(const json& report) {
    std::string out;
    if (!report.contains("strategies")) return out;
    for (const auto& [strategy, rep] : report.at("strategies").items()) {
        out += "strategy: " + strategy + "\n";
        if (!rep.contains("aggregates") || rep.at("aggregates").empty()) {
            out += "  (no scored queries)\n";
            continue;
        }
        // column order: overall first, then qtype slices alphabetically
        std::set<std::string> slices;
        for (const auto& [metric, by_slice] : rep.at("aggregates").items()) {
            for (const auto& [slice, value] : by_slice.items()) slices.insert(slice);
        }
        std::vector<std::string> columns = {"overall"};
        for (const auto& s : slices) {
            if (s != "overall") columns.push_back(s);
        }
        char buf[64];
        out += "  " + std::string(12, ' ');
        for (const auto& c : columns) {
            std::snprintf(buf, sizeof(buf), "%12s", c.c_str());
            out += buf;
        }
        out += "\n";
        for (const auto& [metric, by_slice] : rep.at("aggregates").items()) {
            std::snprintf(buf, sizeof(buf), "  %-12s", metric.c_str());
            out += buf;
            for (const auto& c : columns) {
                if (by_slice.contains(c)) {
                    std::snprintf(buf, sizeof(buf), "%12.4f", by_slice.at(c).get<double>());
                } else {
                    std::snprintf(buf, sizeof(buf), "%12s", "-");
                }
                out += buf;
            }
            out += "\n";
        }
    }
    if (report.contains("confusion")) {
        const auto& c = report.at("confusion");
        out += "confusion (" + c.at("a").get<std::string>() + " vs " +
               c.at("b").get<std::string>() + ", accuracy):\n";
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "  both=%zu  a_only=%zu  b_only=%zu  neither=%zu  "
                      "(%.1f%% / %.1f%% / %.1f%% / %.1f%%)\n",
                      c.at("both").get<size_t>(), c.at("a_only").get<size_t>(),
                      c.at("b_only").get<size_t>(), c.at("neither").get<size_t>(),
                      100 * c.at("frac_both").get<double>(),
                      100 * c.at("frac_a_only").get<double>(),
                      100 * c.at("frac_b_only").get<double>(),
                      100 * c.at("frac_neither").get<double>());
        out += buf;
    }
    return out;
}

} // namespace hyrag
