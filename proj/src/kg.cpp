#include "hyrag/kg.hpp"

#include <algorithm>

#include "hyrag/jsonl.hpp"
#include "hyrag/text.hpp"

namespace hyrag {

const std::vector<size_t>& KnowledgeGraph::incident(const std::string& entity_id) const {
    static const std::vector<size_t> none;
    auto it = adjacency.find(entity_id);
    return it == adjacency.end() ? none : it->second;
}

std::string normalize_entity(std::string_view surface) {
    std::string collapsed = text::collapse_whitespace(surface);
    std::string lowered = text::to_lower(collapsed);
    for (const char* article : {"the ", "an ", "a "}) {
        if (lowered.rfind(article, 0) == 0) {
            lowered.erase(0, std::string(article).size());
            break;
        }
    }
    return std::string(text::trim(lowered));
}

std::string render_triplet(const Triplet& t) {
    return t.head + " \xE2\x80\x94 " + t.relation + " \xE2\x80\x94 " + t.tail;
}

std::vector<TripletDraft> parse_triplet_lines(const std::string& response,
                                              const std::string& chunk_id,
                                              size_t max_triplets, ExtractStats& stats) {
    std::vector<TripletDraft> drafts;
    size_t start = 0;
    bool saw_content = false;
    while (start <= response.size()) {
        size_t eol = response.find('\n', start);
        std::string line = std::string(
            text::trim(response.substr(start, eol == std::string::npos ? eol : eol - start)));
        start = eol == std::string::npos ? response.size() + 1 : eol + 1;
        if (line.empty()) continue;
        saw_content = true;
        if (line.front() != '(' || line.back() != ')') {
            ++stats.malformed_lines;
            continue;
        }
        std::string body = line.substr(1, line.size() - 2);
        std::vector<std::string> fields;
        size_t pos = 0;
        while (true) {
            size_t bar = body.find('|', pos);
            fields.push_back(std::string(
                text::trim(body.substr(pos, bar == std::string::npos ? bar : bar - pos))));
            if (bar == std::string::npos) break;
            pos = bar + 1;
        }
        if (fields.size() != 3 || fields[0].empty() || fields[1].empty() || fields[2].empty()) {
            ++stats.malformed_lines;
            continue;
        }
        if (drafts.size() < max_triplets) {
            drafts.push_back({fields[0], fields[1], fields[2], chunk_id});
        }
    }
    stats.fully_unparseable = saw_content && drafts.empty();
    return drafts;
}

std::vector<TripletDraft> extract_triplets(const Chunk& chunk, Gateway& gateway,
                                           const PromptLibrary& prompts,
                                           const KgBuildOptions& options, ExtractStats& stats) {
    if (chunk.text.empty()) return {};
    CompletionRequest req;
    req.model = options.model;
    req.tag = "triplet-extract";
    req.max_output_tokens = options.max_output_tokens;
    req.prompt = prompts.render(
        "triplet_extract",
        {{"max_triplets", std::to_string(options.max_triplets_per_chunk)},
         {"passage", chunk.text}});
    auto response = gateway.complete(req);
    return parse_triplet_lines(response.text, chunk.id, options.max_triplets_per_chunk, stats);
}

namespace {

std::string describe_entity(const std::string& canonical,
                            const std::vector<std::string>& mention_context, Gateway& gateway,
                            const PromptLibrary& prompts, const KgBuildOptions& options) {
    std::string bullets;
    for (const auto& m : mention_context) bullets += "- " + m + "\n";
    CompletionRequest req;
    req.model = options.model;
    req.tag = "entity-describe";
    req.max_output_tokens = options.max_output_tokens;
    req.prompt = prompts.render("entity_describe", {{"entity", canonical}, {"mentions", bullets}});
    return gateway.complete(req).text;
}

} // namespace

KnowledgeGraph build_graph(const CorpusIndex& corpus, Gateway& gateway,
                           const PromptLibrary& prompts, const KgBuildOptions& options) {
    KnowledgeGraph graph;

    std::vector<TripletDraft> drafts;
    for (const auto& chunk : corpus.chunks) {
        if (chunk.text.empty()) continue;
        ExtractStats stats;
        auto chunk_drafts = extract_triplets(chunk, gateway, prompts, options, stats);
        graph.malformed_lines += stats.malformed_lines;
        if (stats.fully_unparseable) ++graph.parse_failures;
        for (auto& d : chunk_drafts) drafts.push_back(std::move(d));
    }

    // normalize endpoints, merge entities, dedup triplets with provenance union
    std::map<std::pair<std::string, std::pair<std::string, std::string>>, Triplet> merged;
    std::map<std::string, size_t> mention_counts;
    for (const auto& d : drafts) {
        std::string head = normalize_entity(d.head_surface);
        std::string tail = normalize_entity(d.tail_surface);
        if (head.empty() || tail.empty()) {
            ++graph.dropped_drafts;
            continue;
        }
        for (const auto& [canon, surface] :
             {std::pair{head, d.head_surface}, std::pair{tail, d.tail_surface}}) {
            auto& entity = graph.entities[canon];
            if (entity.id.empty()) {
                entity.id = canon;
                entity.canonical = canon;
            }
            entity.surface_forms.insert(std::string(text::trim(surface)));
            ++mention_counts[canon];
        }
        auto key = std::make_pair(head, std::make_pair(d.relation, tail));
        auto& t = merged[key];
        if (t.head.empty()) {
            t.head = head;
            t.relation = d.relation;
            t.tail = tail;
        }
        t.source_chunk_ids.insert(d.chunk_id);
    }

    graph.triplets.reserve(merged.size());
    for (auto& [key, t] : merged) graph.triplets.push_back(std::move(t));
    std::sort(graph.triplets.begin(), graph.triplets.end(),
              [](const Triplet& a, const Triplet& b) {
                  return std::tie(a.head, a.relation, a.tail) <
                         std::tie(b.head, b.relation, b.tail);
              });
    for (size_t i = 0; i < graph.triplets.size(); ++i) {
        graph.adjacency[graph.triplets[i].head].push_back(i);
        if (graph.triplets[i].tail != graph.triplets[i].head) {
            graph.adjacency[graph.triplets[i].tail].push_back(i);
        }
    }

    // descriptions: raw concatenated context, LLM-merged for busy entities
    for (auto& [id, entity] : graph.entities) {
        std::vector<std::string> context;
        for (size_t idx : graph.incident(id)) context.push_back(render_triplet(graph.triplets[idx]));
        std::string raw;
        for (const auto& c : context) {
            if (!raw.empty()) raw += "; ";
            raw += c;
        }
        if (mention_counts[id] > options.describe_mention_threshold) {
            entity.description = describe_entity(id, context, gateway, prompts, options);
        } else {
            entity.description = raw;
        }
    }
    return graph;
}

std::pair<size_t, size_t> answer_entity_coverage_counts(const KnowledgeGraph& graph,
                                                        const std::vector<QueryRecord>& queries) {
    size_t total = 0;
    size_t covered = 0;
    for (const auto& q : queries) {
        for (const auto& gold : q.golds) {
            ++total;
            std::string norm = normalize_entity(gold);
            if (norm.empty()) continue;
            if (graph.entities.count(norm)) {
                ++covered;
                continue;
            }
            auto gold_tokens = text::split_ws(norm);
            for (const auto& [canon, entity] : graph.entities) {
                auto canon_tokens = text::split_ws(canon);
                if (gold_tokens.size() > canon_tokens.size()) continue;
                bool found = false;
                for (size_t i = 0; i + gold_tokens.size() <= canon_tokens.size() && !found; ++i) {
                    found = std::equal(gold_tokens.begin(), gold_tokens.end(),
                                       canon_tokens.begin() + i);
                }
                if (found) {
                    ++covered;
                    break;
                }
            }
        }
    }
    return {covered, total};
}

std::optional<double> answer_entity_coverage(const KnowledgeGraph& graph,
                                             const std::vector<QueryRecord>& queries) {
    auto [covered, total] = answer_entity_coverage_counts(graph, queries);
    if (total == 0) return std::nullopt;
    return static_cast<double>(covered) / static_cast<double>(total);
}

void save_graph(const KnowledgeGraph& graph, const std::string& entities_path,
                const std::string& triplets_path) {
    std::vector<jsonl::json> entity_records;
    for (const auto& [id, e] : graph.entities) {
        entity_records.push_back({{"id", e.id},
                                  {"canonical", e.canonical},
                                  {"surface_forms", e.surface_forms},
                                  {"description", e.description}});
    }
    jsonl::write_file(entities_path, entity_records);

    std::vector<jsonl::json> triplet_records;
    for (const auto& t : graph.triplets) {
        triplet_records.push_back({{"head", t.head},
                                   {"relation", t.relation},
                                   {"tail", t.tail},
                                   {"source_chunk_ids", t.source_chunk_ids}});
    }
    jsonl::write_file(triplets_path, triplet_records);
}

KnowledgeGraph load_graph(const std::string& entities_path, const std::string& triplets_path) {
    KnowledgeGraph graph;
    for (const auto& rec : jsonl::read_file(entities_path)) {
        Entity e;
        e.id = rec.at("id").get<std::string>();
        e.canonical = rec.at("canonical").get<std::string>();
        for (const auto& s : rec.at("surface_forms")) e.surface_forms.insert(s.get<std::string>());
        e.description = rec.value("description", "");
        graph.entities[e.id] = std::move(e);
    }
    for (const auto& rec : jsonl::read_file(triplets_path)) {
        Triplet t;
        t.head = rec.at("head").get<std::string>();
        t.relation = rec.at("relation").get<std::string>();
        t.tail = rec.at("tail").get<std::string>();
        for (const auto& s : rec.at("source_chunk_ids")) {
            t.source_chunk_ids.insert(s.get<std::string>());
        }
        graph.triplets.push_back(std::move(t));
    }
    for (size_t i = 0; i < graph.triplets.size(); ++i) {
        graph.adjacency[graph.triplets[i].head].push_back(i);
        if (graph.triplets[i].tail != graph.triplets[i].head) {
            graph.adjacency[graph.triplets[i].tail].push_back(i);
        }
    }
    return graph;
}

} // namespace hyrag
