#include "hyrag/retrieval.hpp"

#include <algorithm>
#include <set>

#include "hyrag/text.hpp"

namespace hyrag {

std::string to_string(Strategy s) {
    switch (s) {
        case Strategy::rag: return "rag";
        case Strategy::kg_triplets: return "kg-triplets";
        case Strategy::kg_triplets_text: return "kg-triplets-text";
        case Strategy::community_local: return "community-local";
        case Strategy::community_global: return "community-global";
        case Strategy::selection: return "selection";
        case Strategy::integration: return "integration";
    }
    return "rag";
}

Strategy strategy_from_string(const std::string& s) {
    for (Strategy st : {Strategy::rag, Strategy::kg_triplets, Strategy::kg_triplets_text,
                        Strategy::community_local, Strategy::community_global,
                        Strategy::selection, Strategy::integration}) {
        if (to_string(st) == s) return st;
    }
    std::string valid;
    for (const auto& name : strategy_names()) valid += (valid.empty() ? "" : ", ") + name;
    throw config_error("unknown strategy '" + s + "' (valid: " + valid + ")");
}

std::vector<std::string> strategy_names() {
    return {"rag", "kg-triplets", "kg-triplets-text", "community-local", "community-global",
            "selection", "integration"};
}

std::string to_string(ContextKind kind) {
    switch (kind) {
        case ContextKind::chunk: return "chunk";
        case ContextKind::triplet: return "triplet";
        case ContextKind::entity_desc: return "entity_desc";
        case ContextKind::report: return "report";
    }
    return "chunk";
}

Retriever::Retriever(const CorpusIndex* corpus, const VectorIndex* vectors,
                     const KnowledgeGraph* graph, const CommunityHierarchy* hierarchy,
                     std::shared_ptr<Embedder> embedder, Gateway* gateway,
                     const PromptLibrary* prompts, RetrievalOptions options)
    : corpus_(corpus), vectors_(vectors), graph_(graph), hierarchy_(hierarchy),
      embedder_(std::move(embedder)), gateway_(gateway), prompts_(prompts),
      options_(std::move(options)) {
    if (corpus_) {
        for (const auto& c : corpus_->chunks) chunk_by_id_[c.id] = &c;
    }
}

namespace {

// assign synthetic rank scores 1/(rank+1) and apply the item budget
void finalize_ranked(RetrievalResult& result, size_t budget) {
    if (result.items.size() > budget) {
        result.diagnostics.truncations += static_cast<int>(result.items.size() - budget);
        result.items.resize(budget);
    }
    for (size_t i = 0; i < result.items.size(); ++i) {
        result.items[i].score = 1.0 / static_cast<double>(i + 1);
    }
}

} // namespace

RetrievalResult Retriever::rag_retrieve(const std::string& query_id, const std::string& query,
                                        const std::string& scope_doc) const {
    counters_.rag.fetch_add(1);
    if (!vectors_ || !corpus_ || !vectors_->has_kind(ItemKind::chunk)) {
        throw index_not_built_error("chunk vectors");
    }
    RetrievalResult result;
    result.strategy = Strategy::rag;
    result.query_id = query_id;

    EmbeddingVector qvec = embedder_->embed({query})[0];
    std::function<bool(const std::string&)> filter;
    if (!scope_doc.empty()) {
        filter = [this, &scope_doc](const std::string& chunk_id) {
            auto it = chunk_by_id_.find(chunk_id);
            return it != chunk_by_id_.end() && it->second->doc_id == scope_doc;
        };
    }
    for (const auto& hit : vectors_->top_k(qvec, options_.rag_k, ItemKind::chunk, filter)) {
        auto it = chunk_by_id_.find(hit.item_id);
        if (it == chunk_by_id_.end()) continue;
        ContextItem item;
        item.kind = ContextKind::chunk;
        item.text = it->second->text;
        item.score = hit.score;
        item.provenance = {hit.item_id};
        result.items.push_back(std::move(item));
    }
    return result;
}

std::vector<std::string> heuristic_query_entities(const std::string& query) {
    auto words = text::split_ws(query);
    std::vector<std::string> out;
    std::string cur;
    size_t run_start = 0, word_idx = 0;
    auto flush = [&](size_t start) {
        if (cur.empty()) return;
        // a lone capitalized sentence opener is noise, not an entity
        if (!(start == 0 && cur.find(' ') == std::string::npos)) {
            std::string canon = normalize_entity(cur);
            if (!canon.empty() && std::find(out.begin(), out.end(), canon) == out.end()) {
                out.push_back(canon);
            }
        }
        cur.clear();
    };
    for (const auto& raw : words) {
        size_t b = 0, e = raw.size();
        while (b < e && text::is_punct(static_cast<unsigned char>(raw[b]))) ++b;
        while (e > b && text::is_punct(static_cast<unsigned char>(raw[e - 1]))) --e;
        std::string word = raw.substr(b, e - b);
        if (text::starts_with_upper(word)) {
            if (cur.empty()) run_start = word_idx;
            if (!cur.empty()) cur += ' ';
            cur += word;
        } else {
            flush(run_start);
        }
        ++word_idx;
    }
    flush(run_start);
    return out;
}

std::vector<std::string> Retriever::query_entities(const std::string& query,
                                                   bool* fallback_used) const {
    if (fallback_used) *fallback_used = false;
    if (!gateway_ || !prompts_) throw index_not_built_error("gateway");
    CompletionRequest req;
    req.model = options_.model;
    req.tag = "query-entities";
    req.max_output_tokens = options_.max_output_tokens;
    req.prompt = prompts_->render("query_entities", {{"query", query}});
    std::string response = gateway_->complete(req).text;

    std::vector<std::string> names;
    std::string cur;
    auto flush = [&] {
        std::string item = std::string(text::trim(cur));
        cur.clear();
        while (!item.empty() && (item[0] == '-' || item[0] == '*')) {
            item = std::string(text::trim(item.substr(1)));
        }
        std::string canon = normalize_entity(item);
        if (!canon.empty() && std::find(names.begin(), names.end(), canon) == names.end()) {
            names.push_back(canon);
        }
    };
    for (char c : response) {
        if (c == '\n' || c == ',' || c == ';') {
            flush();
        } else {
            cur.push_back(c);
        }
    }
    flush();

    if (names.empty()) {
        names = heuristic_query_entities(query);
        if (fallback_used) *fallback_used = true;
    }
    return names;
}

std::vector<std::string> Retriever::match_entities(const std::vector<std::string>& names) const {
    std::vector<std::string> matched;
    auto push = [&matched](const std::string& canon) {
        if (std::find(matched.begin(), matched.end(), canon) == matched.end()) {
            matched.push_back(canon);
        }
    };
    for (const auto& name : names) {
        if (graph_->entities.count(name)) {
            push(name);
            continue;
        }
        auto name_tokens = text::split_ws(name);
        if (name_tokens.empty()) continue;
        for (const auto& [canon, entity] : graph_->entities) {
            auto canon_tokens = text::split_ws(canon);
            if (name_tokens.size() > canon_tokens.size()) continue;
            for (size_t i = 0; i + name_tokens.size() <= canon_tokens.size(); ++i) {
                if (std::equal(name_tokens.begin(), name_tokens.end(),
                               canon_tokens.begin() + i)) {
                    push(canon);
                    break;
                }
            }
        }
    }
    return matched;
}

RetrievalResult Retriever::kg_retrieve(const std::string& query_id, const std::string& query,
                                       KgMode mode) const {
    counters_.kg.fetch_add(1);
    if (!graph_) throw index_not_built_error("knowledge graph");
    RetrievalResult result;
    result.strategy = mode == KgMode::triplets ? Strategy::kg_triplets : Strategy::kg_triplets_text;
    result.query_id = query_id;

    bool fallback = false;
    auto matched = match_entities(query_entities(query, &fallback));
    result.diagnostics.entity_fallback_used = fallback;
    result.diagnostics.matched_entities = static_cast<int>(matched.size());
    if (matched.empty()) return result;  // generation answers from no context

    // breadth-first over incident triplets, nearer hops first
    std::set<std::string> visited(matched.begin(), matched.end());
    std::set<size_t> collected;
    std::vector<size_t> ordered_triplets;
    std::vector<std::string> frontier = matched;
    for (size_t hop = 0; hop < options_.kg_depth && !frontier.empty(); ++hop) {
        std::set<size_t> hop_triplets;
        for (const auto& entity : frontier) {
            for (size_t idx : graph_->incident(entity)) {
                if (!collected.count(idx)) hop_triplets.insert(idx);
            }
        }
        if (hop_triplets.empty()) break;
        ++result.diagnostics.hops_expanded;
        std::vector<std::string> next_frontier;
        for (size_t idx : hop_triplets) {  // ascending = canonical triplet order
            collected.insert(idx);
            ordered_triplets.push_back(idx);
            for (const std::string* end :
                 {&graph_->triplets[idx].head, &graph_->triplets[idx].tail}) {
                if (!visited.count(*end)) {
                    visited.insert(*end);
                    next_frontier.push_back(*end);
                }
            }
        }
        std::sort(next_frontier.begin(), next_frontier.end());
        frontier = std::move(next_frontier);
    }

    for (size_t idx : ordered_triplets) {
        ContextItem item;
        item.kind = ContextKind::triplet;
        item.text = render_triplet(graph_->triplets[idx]);
        item.provenance = {"t" + std::to_string(idx)};
        result.items.push_back(std::move(item));
    }

    if (mode == KgMode::triplets_text) {
        std::set<std::string> seen_chunks;
        for (size_t idx : ordered_triplets) {
            for (const auto& chunk_id : graph_->triplets[idx].source_chunk_ids) {
                if (!seen_chunks.insert(chunk_id).second) continue;
                auto it = chunk_by_id_.find(chunk_id);
                if (it == chunk_by_id_.end()) continue;
                ContextItem item;
                item.kind = ContextKind::chunk;
                item.text = it->second->text;
                item.provenance = {chunk_id};
                result.items.push_back(std::move(item));
            }
        }
    }

    finalize_ranked(result, options_.kg_budget_items);
    return result;
}

RetrievalResult Retriever::community_local(const std::string& query_id,
                                           const std::string& query) const {
    counters_.local.fetch_add(1);
    if (!graph_) throw index_not_built_error("knowledge graph");
    if (!hierarchy_ || hierarchy_->levels == 0) throw index_not_built_error("community hierarchy");
    RetrievalResult result;
    result.strategy = Strategy::community_local;
    result.query_id = query_id;

    bool fallback = false;
    auto matched = match_entities(query_entities(query, &fallback));
    result.diagnostics.entity_fallback_used = fallback;
    result.diagnostics.matched_entities = static_cast<int>(matched.size());
    if (matched.empty()) return result;

    // tier 1: matched entity descriptions
    for (const auto& entity_id : matched) {
        auto it = graph_->entities.find(entity_id);
        if (it == graph_->entities.end() || it->second.description.empty()) continue;
        ContextItem item;
        item.kind = ContextKind::entity_desc;
        item.text = it->second.description;
        item.provenance = {entity_id};
        result.items.push_back(std::move(item));
    }
    // tier 2: incident triplets, canonical order, each once
    std::set<size_t> triplet_ids;
    for (const auto& entity_id : matched) {
        for (size_t idx : graph_->incident(entity_id)) triplet_ids.insert(idx);
    }
    for (size_t idx : triplet_ids) {
        ContextItem item;
        item.kind = ContextKind::triplet;
        item.text = render_triplet(graph_->triplets[idx]);
        item.provenance = {"t" + std::to_string(idx)};
        result.items.push_back(std::move(item));
    }
    // tier 3: level-0 reports of communities holding any matched entity
    std::set<std::string> community_ids;
    for (const auto& entity_id : matched) {
        auto it = hierarchy_->entity_to_level0.find(entity_id);
        if (it != hierarchy_->entity_to_level0.end()) community_ids.insert(it->second);
    }
    for (const auto& cid : community_ids) {
        const Community* c = hierarchy_->find(cid);
        if (!c || c->report.empty()) continue;
        ContextItem item;
        item.kind = ContextKind::report;
        item.text = c->report;
        item.provenance = {cid};
        result.items.push_back(std::move(item));
    }

    finalize_ranked(result, options_.local_budget_items);
    return result;
}

RetrievalResult Retriever::community_global(const std::string& query_id,
                                            const std::string& query) const {
    counters_.global.fetch_add(1);
    if (!hierarchy_ || hierarchy_->levels == 0) throw index_not_built_error("community hierarchy");
    if (!vectors_ || !vectors_->has_kind(ItemKind::report)) {
        throw index_not_built_error("report vectors");
    }
    RetrievalResult result;
    result.strategy = Strategy::community_global;
    result.query_id = query_id;

    EmbeddingVector qvec = embedder_->embed({query})[0];
    for (const auto& hit : vectors_->top_k(qvec, options_.global_k_reports, ItemKind::report)) {
        const Community* c = hierarchy_->find(hit.item_id);
        if (!c || c->report.empty()) continue;
        ContextItem item;
        item.kind = ContextKind::report;
        item.text = c->report;
        item.score = hit.score;
        item.provenance = {hit.item_id};
        result.items.push_back(std::move(item));
    }
    return result;
}

RetrievalResult Retriever::retrieve(Strategy strategy, const std::string& query_id,
                                    const std::string& query,
                                    const std::string& scope_doc) const {
    switch (strategy) {
        case Strategy::rag: return rag_retrieve(query_id, query, scope_doc);
        case Strategy::kg_triplets: return kg_retrieve(query_id, query, KgMode::triplets);
        case Strategy::kg_triplets_text: return kg_retrieve(query_id, query, KgMode::triplets_text);
        case Strategy::community_local: return community_local(query_id, query);
        case Strategy::community_global: return community_global(query_id, query);
        default:
            throw config_error("strategy " + to_string(strategy) +
                               " is a hybrid; use the hybrid pipeline");
    }
}

nlohmann::json retrieval_trace_record(const RetrievalResult& result) {
    nlohmann::json kinds = nlohmann::json::array();
    nlohmann::json provenance = nlohmann::json::array();
    for (const auto& item : result.items) {
        kinds.push_back(to_string(item.kind));
        provenance.push_back(item.provenance);
    }
    nlohmann::json diag = {
        {"matched_entities", result.diagnostics.matched_entities},
        {"hops_expanded", result.diagnostics.hops_expanded},
        {"truncations", result.diagnostics.truncations},
        {"entity_fallback_used", result.diagnostics.entity_fallback_used},
        {"empty_source", result.diagnostics.empty_source},
    };
    if (!result.diagnostics.route_klass.empty()) {
        diag["route_klass"] = result.diagnostics.route_klass;
        diag["route_raw_label"] = result.diagnostics.route_raw_label;
    }
    return {{"query_id", result.query_id},
            {"strategy", to_string(result.strategy)},
            {"item_kinds", kinds},
            {"provenance", provenance},
            {"diagnostics", diag}};
}

} // namespace hyrag
