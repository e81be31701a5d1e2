#include "hyrag/eval.hpp"

#include <algorithm>
#include <cmath>

#include "hyrag/jsonl.hpp"
#include "hyrag/text.hpp"

namespace hyrag {

namespace {

std::string strip_punct_lower(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (size_t p = 0; p < s.size();) {
        size_t start = p;
        char32_t cp = text::decode_utf8(s, p);
        if (text::is_punct(cp)) continue;
        for (size_t i = start; i < p; ++i) out.push_back(text::ascii_lower(s[i]));
    }
    return out;
}

bool is_article(const std::string& token) {
    return token == "a" || token == "an" || token == "the";
}

double harmonic_f1(double p, double r) {
    return (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

bool contains_phrase(const std::vector<std::string>& haystack,
                     const std::vector<std::string>& needle) {
    if (needle.empty() || needle.size() > haystack.size()) return false;
    for (size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
        if (std::equal(needle.begin(), needle.end(), haystack.begin() + i)) return true;
    }
    return false;
}

} // namespace

std::string normalize_answer(const std::string& answer) {
    std::string cleaned = strip_punct_lower(answer);
    std::string out;
    for (const auto& token : text::split_ws(cleaned)) {
        if (is_article(token)) continue;
        if (!out.empty()) out += ' ';
        out += token;
    }
    return out;
}

std::vector<std::string> metric_tokens(const std::string& s) {
    return text::split_ws(strip_punct_lower(s));
}

// ---------------------------------------------------------------------------
// Token P/R/F1
// ---------------------------------------------------------------------------

namespace {

Prf token_prf_single(const std::vector<std::string>& pred_tokens,
                     const std::vector<std::string>& gold_tokens) {
    if (pred_tokens.empty() && gold_tokens.empty()) return {1.0, 1.0, 1.0};
    if (pred_tokens.empty() || gold_tokens.empty()) return {0.0, 0.0, 0.0};
    std::map<std::string, int> gold_counts;
    for (const auto& t : gold_tokens) ++gold_counts[t];
    int overlap = 0;
    for (const auto& t : pred_tokens) {
        auto it = gold_counts.find(t);
        if (it != gold_counts.end() && it->second > 0) {
            --it->second;
            ++overlap;
        }
    }
    double p = static_cast<double>(overlap) / static_cast<double>(pred_tokens.size());
    double r = static_cast<double>(overlap) / static_cast<double>(gold_tokens.size());
    return {p, r, harmonic_f1(p, r)};
}

} // namespace

Prf token_prf(const std::string& pred, const std::vector<std::string>& golds) {
    if (golds.empty()) throw domain_error("token_prf requires at least one gold answer");
    auto pred_tokens = metric_tokens(pred);
    Prf best;
    bool first = true;
    for (const auto& gold : golds) {
        Prf cur = token_prf_single(pred_tokens, metric_tokens(gold));
        if (first || cur.f1 > best.f1) {
            best = cur;
            first = false;
        }
    }
    return best;
}

bool accuracy_match(const std::string& pred, const std::string& gold, const std::string& qtype) {
    std::string pred_norm = normalize_answer(pred);
    auto pred_tokens = text::split_ws(pred_norm);
    if (qtype == "null") {
        return contains_phrase(pred_tokens, {"insufficient", "information"});
    }
    std::string gold_norm = normalize_answer(gold);
    if (pred_norm == gold_norm) return true;
    return contains_phrase(pred_tokens, text::split_ws(gold_norm));
}

// ---------------------------------------------------------------------------
// ROUGE-2
// ---------------------------------------------------------------------------

namespace {

std::vector<std::pair<std::string, std::string>> bigrams(const std::vector<std::string>& tokens) {
    std::vector<std::pair<std::string, std::string>> out;
    for (size_t i = 0; i + 1 < tokens.size(); ++i) out.push_back({tokens[i], tokens[i + 1]});
    return out;
}

Prf rouge2_single(const std::vector<std::string>& pred_tokens,
                  const std::vector<std::string>& gold_tokens) {
    if (pred_tokens.size() < 2) return {0.0, 0.0, 0.0};
    auto pred_bi = bigrams(pred_tokens);
    auto gold_bi = bigrams(gold_tokens);
    if (gold_bi.empty()) return {0.0, 0.0, 0.0};
    std::map<std::pair<std::string, std::string>, int> gold_counts;
    for (const auto& b : gold_bi) ++gold_counts[b];
    int overlap = 0;
    for (const auto& b : pred_bi) {
        auto it = gold_counts.find(b);
        if (it != gold_counts.end() && it->second > 0) {
            --it->second;
            ++overlap;
        }
    }
    double p = static_cast<double>(overlap) / static_cast<double>(pred_bi.size());
    double r = static_cast<double>(overlap) / static_cast<double>(gold_bi.size());
    return {p, r, harmonic_f1(p, r)};
}

} // namespace

Prf rouge2(const std::string& pred, const std::vector<std::string>& golds) {
    auto pred_tokens = metric_tokens(pred);
    Prf best;
    bool first = true;
    for (const auto& gold : golds) {
        Prf cur = rouge2_single(pred_tokens, metric_tokens(gold));
        if (first || cur.f1 > best.f1) {
            best = cur;
            first = false;
        }
    }
    return best;
}

Prf rouge2(const std::string& pred, const std::string& gold) {
    return rouge2(pred, std::vector<std::string>{gold});
}

// ---------------------------------------------------------------------------
// Semantic score (greedy token-embedding matching)
// ---------------------------------------------------------------------------

Prf semantic_score(const std::string& pred, const std::string& gold, Embedder& embedder,
                   uint64_t* skipped_tokens) {
    auto pred_tokens = metric_tokens(pred);
    auto gold_tokens = metric_tokens(gold);
    if (pred_tokens.empty() && gold_tokens.empty()) return {1.0, 1.0, 1.0};
    if (pred_tokens.empty() || gold_tokens.empty()) return {0.0, 0.0, 0.0};
    if (pred_tokens == gold_tokens) return {1.0, 1.0, 1.0};

    std::vector<std::string> all = pred_tokens;
    all.insert(all.end(), gold_tokens.begin(), gold_tokens.end());
    auto vectors = embedder.embed(all);

    auto usable = [&](size_t i) { return vectors[i].norm() > 0.0; };
    auto greedy_mean = [&](size_t from_begin, size_t from_len, size_t to_begin, size_t to_len) {
        double sum = 0.0;
        size_t counted = 0;
        for (size_t i = from_begin; i < from_begin + from_len; ++i) {
            if (!usable(i)) {
                if (skipped_tokens) ++*skipped_tokens;
                continue;
            }
            double best = -1.0;
            bool found = false;
            for (size_t j = to_begin; j < to_begin + to_len; ++j) {
                if (!usable(j)) continue;
                best = found ? std::max(best, cosine(vectors[i], vectors[j]))
                             : cosine(vectors[i], vectors[j]);
                found = true;
            }
            if (found) {
                sum += best;
                ++counted;
            }
        }
        return counted == 0 ? 0.0 : sum / static_cast<double>(counted);
    };

    double p = greedy_mean(0, pred_tokens.size(), pred_tokens.size(), gold_tokens.size());
    double r = greedy_mean(pred_tokens.size(), gold_tokens.size(), 0, pred_tokens.size());
    return {p, r, harmonic_f1(p, r)};
}

// ---------------------------------------------------------------------------
// Confusion quadrants
// ---------------------------------------------------------------------------

double ConfusionQuadrants::frac_both() const {
    return total() == 0 ? 0.0 : static_cast<double>(both) / static_cast<double>(total());
}
double ConfusionQuadrants::frac_a_only() const {
    return total() == 0 ? 0.0 : static_cast<double>(a_only) / static_cast<double>(total());
}
double ConfusionQuadrants::frac_b_only() const {
    return total() == 0 ? 0.0 : static_cast<double>(b_only) / static_cast<double>(total());
}
double ConfusionQuadrants::frac_neither() const {
    return total() == 0 ? 0.0 : static_cast<double>(neither) / static_cast<double>(total());
}

ConfusionQuadrants confusion_matrix(const std::vector<bool>& correct_a,
                                    const std::vector<bool>& correct_b) {
    if (correct_a.size() != correct_b.size()) {
        throw domain_error("confusion_matrix inputs differ in length: " +
                           std::to_string(correct_a.size()) + " vs " +
                           std::to_string(correct_b.size()));
    }
    ConfusionQuadrants q;
    for (size_t i = 0; i < correct_a.size(); ++i) {
        if (correct_a[i] && correct_b[i]) ++q.both;
        else if (correct_a[i]) ++q.a_only;
        else if (correct_b[i]) ++q.b_only;
        else ++q.neither;
    }
    return q;
}

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

nlohmann::json MetricReport::to_json() const {
    return {{"per_query", per_query}, {"aggregates", aggregates}, {"counts", counts}};
}

MetricReport aggregate(const std::map<std::string, std::map<std::string, double>>& per_query,
                       const std::map<std::string, std::string>& qtype_by_id) {
    MetricReport report;
    report.per_query = per_query;

    std::map<std::string, std::map<std::string, std::pair<double, size_t>>> sums;  // metric/slice
    for (const auto& [qid, metrics] : per_query) {
        std::string qtype;
        auto ti = qtype_by_id.find(qid);
        if (ti != qtype_by_id.end()) qtype = ti->second;
        if (!qtype.empty()) ++report.counts[qtype];
        for (const auto& [metric, value] : metrics) {
            auto& overall = sums[metric]["overall"];
            overall.first += value;
            ++overall.second;
            if (!qtype.empty()) {
                auto& slice = sums[metric][qtype];
                slice.first += value;
                ++slice.second;
            }
        }
    }
    report.counts["overall"] = per_query.size();

    for (const auto& [metric, slices] : sums) {
        for (const auto& [slice, acc] : slices) {
            if (acc.second == 0) continue;  // empty slices omitted, never zero
            report.aggregates[metric][slice] = acc.first / static_cast<double>(acc.second);
        }
    }
    return report;
}

std::map<std::string, double> score_prediction(const std::string& pred, const QueryRecord& query,
                                               Embedder* embedder) {
    std::map<std::string, double> scores;
    if (query.golds.empty()) return scores;

    Prf prf = token_prf(pred, query.golds);
    scores["precision"] = prf.precision;
    scores["recall"] = prf.recall;
    scores["f1"] = prf.f1;

    bool correct = false;
    if (query.qtype == "null") {
        correct = accuracy_match(pred, "", query.qtype);
    } else {
        for (const auto& gold : query.golds) {
            if (accuracy_match(pred, gold, query.qtype)) {
                correct = true;
                break;
            }
        }
    }
    scores["accuracy"] = correct ? 1.0 : 0.0;

    Prf rg = rouge2(pred, query.golds);
    scores["rouge2_p"] = rg.precision;
    scores["rouge2_r"] = rg.recall;
    scores["rouge2_f1"] = rg.f1;

    if (embedder) {
        Prf best;
        bool first = true;
        for (const auto& gold : query.golds) {
            Prf cur = semantic_score(pred, gold, *embedder);
            if (first || cur.f1 > best.f1) {
                best = cur;
                first = false;
            }
        }
        scores["semantic_p"] = best.precision;
        scores["semantic_r"] = best.recall;
        scores["semantic_f1"] = best.f1;
    }
    return scores;
}

// ---------------------------------------------------------------------------
// LLM-as-judge
// ---------------------------------------------------------------------------

std::string to_string(JudgeAspect aspect) {
    return aspect == JudgeAspect::comprehensiveness ? "comprehensiveness" : "diversity";
}

std::string to_string(JudgeWinner winner) {
    switch (winner) {
        case JudgeWinner::A: return "A";
        case JudgeWinner::B: return "B";
        case JudgeWinner::tie: return "tie";
    }
    return "tie";
}

namespace {

// aspect headers and criteria rendered into the judge prompt
std::string aspect_heading(JudgeAspect aspect) {
    return aspect == JudgeAspect::comprehensiveness ? "Comprehensiveness" : "Global Diversity";
}

std::string aspect_criteria(JudgeAspect aspect) {
    if (aspect == JudgeAspect::comprehensiveness) {
        return "- Does the answer address every part of the query, with enough detail that no "
               "important point is missing?\n"
               "- Prefer the answer that covers more of the relevant facts and context without "
               "leaving gaps.";
    }
    return "- Does the answer span many themes and vantage points instead of fixating on one "
           "topic or locale?\n"
           "- Prefer the answer a reader anywhere could follow, drawing on the widest range of "
           "viewpoints.";
}

enum class SlotChoice { slot1, slot2, tie, unparseable };

SlotChoice parse_slot_choice(const std::string& response) {
    std::string lowered = text::to_lower(response);
    size_t p1 = lowered.find("model 1");
    size_t p2 = lowered.find("model 2");
    size_t pt = lowered.find("tie");
    size_t best = std::string::npos;
    SlotChoice choice = SlotChoice::unparseable;
    if (p1 != std::string::npos) {
        best = p1;
        choice = SlotChoice::slot1;
    }
    if (p2 != std::string::npos && p2 < best) {
        best = p2;
        choice = SlotChoice::slot2;
    }
    if (pt != std::string::npos && pt < best) {
        choice = SlotChoice::tie;
    }
    return choice;
}

} // namespace

std::vector<JudgeVerdict> judge_pairwise(const std::string& query_id, const std::string& query,
                                         const std::string& answer_a, const std::string& answer_b,
                                         Gateway& gateway, const PromptLibrary& prompts,
                                         const JudgeOptions& options) {
    std::vector<JudgeVerdict> verdicts;
    for (JudgeAspect aspect : options.aspects) {
        JudgeVerdict verdict;
        verdict.query_id = query_id;
        verdict.aspect = aspect;

        // order 1 puts method A in slot 1; order 2 puts method B there
        for (int order = 1; order <= 2; ++order) {
            const std::string& slot1 = order == 1 ? answer_a : answer_b;
            const std::string& slot2 = order == 1 ? answer_b : answer_a;
            CompletionRequest req;
            req.model = options.model;
            req.tag = "judge";
            req.max_output_tokens = options.max_output_tokens;
            req.prompt = prompts.render("judge", {{"query", query},
                                                  {"answer_1", slot1},
                                                  {"answer_2", slot2},
                                                  {"aspect_name", aspect_heading(aspect)},
                                                  {"aspect_criteria", aspect_criteria(aspect)}});
            SlotChoice choice = parse_slot_choice(gateway.complete(req).text);
            JudgeWinner winner;
            switch (choice) {
                case SlotChoice::slot1: winner = order == 1 ? JudgeWinner::A : JudgeWinner::B; break;
                case SlotChoice::slot2: winner = order == 1 ? JudgeWinner::B : JudgeWinner::A; break;
                case SlotChoice::tie: winner = JudgeWinner::tie; break;
                case SlotChoice::unparseable:
                default:
                    winner = JudgeWinner::tie;
                    verdict.parse_failure = true;
                    break;
            }
            if (order == 1) verdict.winner_o1 = winner;
            else verdict.winner_o2 = winner;
        }
        verdict.bias_flag = verdict.winner_o1 != verdict.winner_o2;
        verdicts.push_back(std::move(verdict));
    }
    return verdicts;
}

JudgeSummary summarize_verdicts(const std::vector<JudgeVerdict>& verdicts) {
    JudgeSummary summary;
    summary.verdicts = verdicts.size();
    std::map<std::string, std::map<std::string, std::map<std::string, size_t>>> counts;
    std::map<std::string, size_t> aspect_totals;
    size_t biased = 0;
    for (const auto& v : verdicts) {
        std::string aspect = to_string(v.aspect);
        ++counts[aspect]["o1"][to_string(v.winner_o1)];
        ++counts[aspect]["o2"][to_string(v.winner_o2)];
        ++aspect_totals[aspect];
        if (v.bias_flag) ++biased;
    }
    for (const auto& [aspect, orders] : counts) {
        for (const auto& [order, winners] : orders) {
            for (const char* w : {"A", "B", "tie"}) {
                size_t c = winners.count(w) ? winners.at(w) : 0;
                summary.fractions[aspect][order][w] =
                    static_cast<double>(c) / static_cast<double>(aspect_totals[aspect]);
            }
        }
    }
    summary.bias_flag_rate =
        verdicts.empty() ? 0.0 : static_cast<double>(biased) / static_cast<double>(verdicts.size());
    return summary;
}

void save_verdicts(const std::vector<JudgeVerdict>& verdicts, const std::string& path) {
    std::vector<jsonl::json> records;
    for (const auto& v : verdicts) {
        records.push_back({{"query_id", v.query_id},
                           {"aspect", to_string(v.aspect)},
                           {"winner_o1", to_string(v.winner_o1)},
                           {"winner_o2", to_string(v.winner_o2)},
                           {"bias_flag", v.bias_flag},
                           {"parse_failure", v.parse_failure}});
    }
    jsonl::write_file(path, records);
}

} // namespace hyrag
