#pragma once

#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "tsp/interaction_data.hpp"
#include "tsp/types.hpp"

namespace tsp {

struct EvalReport {
    int k = 0;
    double tail_fraction = 0.0;
    double overall_recall = 0.0;
    double overall_ndcg = 0.0;
    double tail_recall = 0.0;
    double tail_ndcg = 0.0;
    Index num_evaluated_users = 0;
    Index num_tail_evaluated_users = 0;

    std::string to_json() const;
    std::string csv_header() const;
    std::string csv_row() const;
};

// Top-k items for one user by descending inner-product score, ties broken by
// ascending item index, `exclude` (train items) removed from the candidates.
std::vector<Index> rank_topk(const Matrix& x, Index num_users, Index num_items, Index user,
                             int k, const std::unordered_set<Index>& exclude);

// |recommended ∩ relevant| / |relevant|; `relevant` must be non-empty.
double recall_at_k(const std::vector<Index>& recommended,
                   const std::unordered_set<Index>& relevant);

// Binary-relevance DCG@k / IDCG@k with gain (2^rel - 1) / log2(pos + 1).
double ndcg_at_k(const std::vector<Index>& recommended,
                 const std::unordered_set<Index>& relevant);

// Per-user ranking metrics averaged over users with non-empty test
// relevance; tail metrics restrict the relevance sets to the configured
// fraction of least popular items.
EvalReport evaluate(const Matrix& x, const InteractionDataset& dataset, int k,
                    double tail_fraction);

// Synthetic implicit-feedback generator: each user samples items without
// replacement from p(i) proportional to (i + 1)^(-exponent).
InteractionDataset synthetic_biased_dataset(Index num_users, Index num_items,
                                            int interactions_per_user,
                                            double popularity_exponent, std::uint64_t seed);

}  // namespace tsp
