#pragma once
// Brute-force oracles, kept deliberately independent of the library
// implementations they check: different containers, different counting
// strategies, and exhaustive enumeration instead of greedy algorithms.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace oracles {

struct Prf {
    double p = 0.0, r = 0.0, f1 = 0.0;
};

// Token-level P/R/F1 by pairwise matching with used-flags (no hash maps).
inline Prf token_prf(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
    if (pred.empty() && gold.empty()) return {1.0, 1.0, 1.0};
    if (pred.empty() || gold.empty()) return {0.0, 0.0, 0.0};
    std::vector<bool> used(gold.size(), false);
    int overlap = 0;
    for (const auto& t : pred) {
        for (size_t j = 0; j < gold.size(); ++j) {
            if (!used[j] && gold[j] == t) {
                used[j] = true;
                ++overlap;
                break;
            }
        }
    }
    Prf out;
    out.p = double(overlap) / double(pred.size());
    out.r = double(overlap) / double(gold.size());
    out.f1 = (out.p + out.r) > 0 ? 2 * out.p * out.r / (out.p + out.r) : 0.0;
    return out;
}

// ROUGE-2 by explicit bigram lists and used-flags.
inline Prf rouge2(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
    if (pred.size() < 2) return {0.0, 0.0, 0.0};
    std::vector<std::string> pred_bi, gold_bi;
    for (size_t i = 0; i + 1 < pred.size(); ++i) pred_bi.push_back(pred[i] + "\x1f" + pred[i + 1]);
    for (size_t i = 0; i + 1 < gold.size(); ++i) gold_bi.push_back(gold[i] + "\x1f" + gold[i + 1]);
    if (gold_bi.empty()) return {0.0, 0.0, 0.0};
    std::vector<bool> used(gold_bi.size(), false);
    int overlap = 0;
    for (const auto& b : pred_bi) {
        for (size_t j = 0; j < gold_bi.size(); ++j) {
            if (!used[j] && gold_bi[j] == b) {
                used[j] = true;
                ++overlap;
                break;
            }
        }
    }
    Prf out;
    out.p = double(overlap) / double(pred_bi.size());
    out.r = double(overlap) / double(gold_bi.size());
    out.f1 = (out.p + out.r) > 0 ? 2 * out.p * out.r / (out.p + out.r) : 0.0;
    return out;
}

// Exhaustive cosine scan: score every item, sort by (score desc, id asc).
struct ScoredId {
    std::string id;
    double score;
};

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0, na = 0, nb = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

inline std::vector<ScoredId> top_k(const std::vector<std::pair<std::string, std::vector<double>>>&
                                       entries,
                                   const std::vector<double>& query, size_t k) {
    std::vector<ScoredId> scored;
    for (const auto& [id, vec] : entries) scored.push_back({id, cosine(vec, query)});
    std::sort(scored.begin(), scored.end(), [](const ScoredId& x, const ScoredId& y) {
        if (x.score != y.score) return x.score > y.score;
        return x.id < y.id;
    });
    if (scored.size() > k) scored.resize(k);
    return scored;
}

// Enumerates every partition of n elements (restricted growth strings) and
// returns the one maximizing the scoring callback.
template <typename Score>
std::vector<std::vector<int>> best_partition(int n, Score&& score) {
    std::vector<int> rgs(n, 0);
    std::vector<std::vector<int>> best;
    double best_score = -1e18;

    auto evaluate = [&]() {
        int blocks = *std::max_element(rgs.begin(), rgs.end()) + 1;
        std::vector<std::vector<int>> partition(blocks);
        for (int i = 0; i < n; ++i) partition[rgs[i]].push_back(i);
        double s = score(partition);
        if (s > best_score) {
            best_score = s;
            best = partition;
        }
    };

    // iterate restricted growth strings: rgs[0] = 0, rgs[i] <= max(prefix)+1
    while (true) {
        evaluate();
        int i = n - 1;
        for (; i > 0; --i) {
            int prefix_max = *std::max_element(rgs.begin(), rgs.begin() + i);
            if (rgs[i] <= prefix_max) break;
        }
        if (i == 0) break;
        ++rgs[i];
        for (int j = i + 1; j < n; ++j) rgs[j] = 0;
    }
    return best;
}

} // namespace oracles
