#include "hyrag/hybrid.hpp"

#include <algorithm>
#include <set>

#include "hyrag/text.hpp"

namespace hyrag {

RouteDecision HybridPipeline::classify_query(const std::string& query_id,
                                             const std::string& query) const {
    CompletionRequest req;
    req.model = options_.model;
    req.tag = "classify";
    req.max_output_tokens = options_.classify_max_tokens;
    req.prompt = prompts_->render(
        "classify", {{"query", query},
                     {"fact_examples", prompts_->raw("classify_fact_examples")},
                     {"reasoning_examples", prompts_->raw("classify_reasoning_examples")}});
    std::string response = gateway_->complete(req).text;  // provider failures propagate

    RouteDecision decision;
    decision.query_id = query_id;
    decision.raw_label = response;

    std::string lowered = text::to_lower(response);
    size_t fact_pos = lowered.find("fact");
    size_t reasoning_pos = lowered.find("reasoning");
    if (fact_pos == std::string::npos && reasoning_pos == std::string::npos) {
        decision.klass = QueryClass::fact;
        decision.fallback_used = true;
    } else if (reasoning_pos != std::string::npos &&
               (fact_pos == std::string::npos || reasoning_pos < fact_pos)) {
        decision.klass = QueryClass::reasoning;
    } else {
        decision.klass = QueryClass::fact;
    }
    decision.target =
        decision.klass == QueryClass::fact ? Strategy::rag : Strategy::community_local;
    return decision;
}

RetrievalResult HybridPipeline::select_retrieve(const std::string& query_id,
                                                const std::string& query,
                                                const std::string& scope_doc) const {
    RouteDecision decision = classify_query(query_id, query);
    RetrievalResult result = decision.target == Strategy::rag
                                 ? retriever_->rag_retrieve(query_id, query, scope_doc)
                                 : retriever_->community_local(query_id, query);
    result.strategy = Strategy::selection;
    result.diagnostics.route_klass = to_string(decision.klass);
    result.diagnostics.route_raw_label = decision.raw_label;
    return result;
}

RetrievalResult HybridPipeline::integrate_retrieve(const std::string& query_id,
                                                   const std::string& query,
                                                   const std::string& scope_doc) const {
    RetrievalResult rag = retriever_->rag_retrieve(query_id, query, scope_doc);
    RetrievalResult local = retriever_->community_local(query_id, query);

    RetrievalResult result;
    result.strategy = Strategy::integration;
    result.query_id = query_id;
    result.diagnostics.matched_entities = local.diagnostics.matched_entities;
    result.diagnostics.entity_fallback_used = local.diagnostics.entity_fallback_used;
    result.diagnostics.empty_source = rag.items.empty() || local.items.empty();

    // concatenate RAG first, dedup identical (kind, provenance)
    std::set<std::pair<int, std::vector<std::string>>> seen;
    std::vector<ContextItem> from_rag, from_local;
    for (auto& item : rag.items) {
        if (seen.emplace(static_cast<int>(item.kind), item.provenance).second) {
            from_rag.push_back(std::move(item));
        }
    }
    for (auto& item : local.items) {
        if (seen.emplace(static_cast<int>(item.kind), item.provenance).second) {
            from_local.push_back(std::move(item));
        }
    }

    // over budget: drop alternately from the tails, RAG side first
    size_t budget = options_.integration_budget_items;
    size_t total = from_rag.size() + from_local.size();
    bool drop_rag_next = true;
    while (total > budget) {
        if ((drop_rag_next && !from_rag.empty()) || from_local.empty()) {
            from_rag.pop_back();
        } else {
            from_local.pop_back();
        }
        drop_rag_next = !drop_rag_next;
        --total;
        ++result.diagnostics.truncations;
    }

    for (auto& item : from_rag) result.items.push_back(std::move(item));
    for (auto& item : from_local) result.items.push_back(std::move(item));
    for (size_t i = 0; i < result.items.size(); ++i) {
        result.items[i].score = 1.0 / static_cast<double>(i + 1);
    }
    return result;
}

std::string HybridPipeline::assemble_prompt(const std::string& query,
                                            const RetrievalResult& result, uint32_t token_budget,
                                            uint32_t* items_used) const {
    // survivors after dropping lowest-score items over the token budget
    std::vector<size_t> keep(result.items.size());
    for (size_t i = 0; i < keep.size(); ++i) keep[i] = i;
    std::vector<uint32_t> item_tokens;
    uint32_t total_tokens = 0;
    for (const auto& item : result.items) {
        item_tokens.push_back(count_tokens(item.text));
        total_tokens += item_tokens.back();
    }
    while (!keep.empty() && total_tokens > token_budget) {
        size_t drop_pos = 0;
        for (size_t i = 1; i < keep.size(); ++i) {
            // ties drop the later-ranked item
            if (result.items[keep[i]].score <= result.items[keep[drop_pos]].score) drop_pos = i;
        }
        total_tokens -= item_tokens[keep[drop_pos]];
        keep.erase(keep.begin() + static_cast<long>(drop_pos));
    }

    std::string context;
    uint32_t used = 0;
    for (size_t i : keep) {
        const auto& item = result.items[i];
        std::string prov;
        for (const auto& p : item.provenance) prov += (prov.empty() ? "" : ",") + p;
        context += "[" + std::to_string(used + 1) + "] (" + to_string(item.kind) + ") " + prov +
                   "\n" + item.text + "\n\n";
        ++used;
    }
    if (context.empty()) context = "(no context retrieved)\n\n";
    if (items_used) *items_used = used;
    return prompts_->render("answer", {{"context", context}, {"question", query}});
}

RetrievalResult HybridPipeline::retrieve_any(Strategy strategy, const std::string& query_id,
                                             const std::string& query,
                                             const std::string& scope_doc) const {
    switch (strategy) {
        case Strategy::selection: return select_retrieve(query_id, query, scope_doc);
        case Strategy::integration: return integrate_retrieve(query_id, query, scope_doc);
        default: return retriever_->retrieve(strategy, query_id, query, scope_doc);
    }
}

GeneratedAnswer HybridPipeline::generate(const std::string& query_id, const std::string& query,
                                         const RetrievalResult& result) const {
    uint32_t items_used = 0;
    std::string prompt =
        assemble_prompt(query, result, options_.prompt_token_budget, &items_used);

    CompletionRequest req;
    req.model = options_.model;
    req.tag = "answer";
    req.max_output_tokens = options_.answer_max_tokens;
    req.prompt = prompt;

    GeneratedAnswer answer;
    answer.query_id = query_id;
    answer.strategy = result.strategy;
    answer.text = gateway_->complete(req).text;
    answer.context_items_used = items_used;
    answer.prompt_tokens_est = count_tokens(prompt);
    return answer;
}

GeneratedAnswer HybridPipeline::answer(const std::string& query_id, const std::string& query,
                                       Strategy strategy, const std::string& scope_doc) const {
    return generate(query_id, query, retrieve_any(strategy, query_id, query, scope_doc));
}

} // namespace hyrag
