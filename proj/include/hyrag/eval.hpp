#pragma once
// Evaluation: token-level P/R/F1, typed accuracy with null handling, ROUGE-2,
// an embedding-based semantic score, confusion quadrants, per-type
// aggregation, and the dual-order LLM-as-judge with position-bias flagging.
//
// Two normalizations are in play. normalize_answer (lowercase, punctuation
// and article stripping) backs accuracy matching. The overlap metrics
// (token_prf, rouge2, semantic_score) tokenize with lowercase + punctuation
// stripping only — articles count as tokens there, which is what their
// worked expectations assume.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hyrag/dataset.hpp"
#include "hyrag/embed.hpp"
#include "hyrag/gateway.hpp"
#include "hyrag/templates.hpp"

namespace hyrag {

std::string normalize_answer(const std::string& answer);

// lowercase + punctuation stripping + whitespace split; no article removal
std::vector<std::string> metric_tokens(const std::string& s);

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Multiset token overlap against the max-F1 gold. Empty vs empty is a
// perfect match; empty vs non-empty scores zero.
Prf token_prf(const std::string& pred, const std::vector<std::string>& golds);

// Containment after normalization: the gold appears in the prediction as a
// whole-word phrase (or matches exactly). qtype "null" is correct iff the
// prediction contains "insufficient information".
bool accuracy_match(const std::string& pred, const std::string& gold, const std::string& qtype);

// Bigram multiset overlap; predictions with < 2 tokens score zero;
// multiple references take the max-F1 reference.
Prf rouge2(const std::string& pred, const std::vector<std::string>& golds);
Prf rouge2(const std::string& pred, const std::string& gold);

// Greedy token-embedding matching: precision is the mean over prediction
// tokens of the max cosine to any gold token, recall symmetric. Identical
// token sequences short-circuit to exactly (1,1,1). Zero-norm token vectors
// are skipped and counted into *skipped_tokens.
Prf semantic_score(const std::string& pred, const std::string& gold, Embedder& embedder,
                   uint64_t* skipped_tokens = nullptr);

struct ConfusionQuadrants {
    size_t both = 0;
    size_t a_only = 0;
    size_t b_only = 0;
    size_t neither = 0;

    size_t total() const { return both + a_only + b_only + neither; }
    double frac_both() const;
    double frac_a_only() const;
    double frac_b_only() const;
    double frac_neither() const;
};

ConfusionQuadrants confusion_matrix(const std::vector<bool>& correct_a,
                                    const std::vector<bool>& correct_b);

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

struct MetricReport {
    // query id -> metric name -> value
    std::map<std::string, std::map<std::string, double>> per_query;
    // metric name -> slice (qtype or "overall") -> mean; empty slices omitted
    std::map<std::string, std::map<std::string, double>> aggregates;
    std::map<std::string, size_t> counts;  // slice -> query count

    nlohmann::json to_json() const;
};

MetricReport aggregate(const std::map<std::string, std::map<std::string, double>>& per_query,
                       const std::map<std::string, std::string>& qtype_by_id);

// All metric families for one prediction against one query record.
std::map<std::string, double> score_prediction(const std::string& pred, const QueryRecord& query,
                                               Embedder* embedder);

// ---------------------------------------------------------------------------
// LLM-as-judge, dual order
// ---------------------------------------------------------------------------

enum class JudgeAspect { comprehensiveness, diversity };
enum class JudgeWinner { A, B, tie };

std::string to_string(JudgeAspect aspect);
std::string to_string(JudgeWinner winner);

struct JudgeVerdict {
    std::string query_id;
    JudgeAspect aspect = JudgeAspect::comprehensiveness;
    JudgeWinner winner_o1 = JudgeWinner::tie;  // order 1: A rendered in slot 1
    JudgeWinner winner_o2 = JudgeWinner::tie;  // order 2: B rendered in slot 1
    bool bias_flag = false;                    // winner_o1 != winner_o2
    bool parse_failure = false;                // some order's output was unparseable
};

struct JudgeOptions {
    std::string model;
    uint32_t max_output_tokens = 64;
    std::vector<JudgeAspect> aspects = {JudgeAspect::comprehensiveness, JudgeAspect::diversity};
};

// Renders the pairwise judge prompt twice per aspect (slots swapped between
// orders), parses "Model 1" / "Model 2" / "tie", and maps slots back to the
// methods A and B. Winners always refer to methods, never to slots.
std::vector<JudgeVerdict> judge_pairwise(const std::string& query_id, const std::string& query,
                                         const std::string& answer_a, const std::string& answer_b,
                                         Gateway& gateway, const PromptLibrary& prompts,
                                         const JudgeOptions& options);

struct JudgeSummary {
    // aspect -> order ("o1"/"o2") -> winner name -> fraction
    std::map<std::string, std::map<std::string, std::map<std::string, double>>> fractions;
    double bias_flag_rate = 0.0;
    size_t verdicts = 0;
};

JudgeSummary summarize_verdicts(const std::vector<JudgeVerdict>& verdicts);

void save_verdicts(const std::vector<JudgeVerdict>& verdicts, const std::string& path);

} // namespace hyrag
