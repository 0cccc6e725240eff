#include "tsp/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tsp/errors.hpp"

namespace tsp {

std::vector<Index> rank_topk(const Matrix& x, Index num_users, Index num_items, Index user,
                             int k, const std::unordered_set<Index>& exclude) {
    if (k < 1) throw ConfigError("rank_topk: k must be >= 1");
    if (user < 0 || user >= num_users || num_users + num_items > x.rows()) {
        throw ShapeError("rank_topk: index out of range");
    }
    Vector scores = x.middleRows(num_users, num_items) * x.row(user).transpose();
    Index excluded = 0;
    for (Index i : exclude) {
        if (i >= 0 && i < num_items) {
            scores[i] = -std::numeric_limits<double>::infinity();
            ++excluded;
        }
    }
    std::vector<Index> idx(static_cast<std::size_t>(num_items));
    std::iota(idx.begin(), idx.end(), Index{0});
    const Index top = std::min<Index>(k, num_items - excluded);
    std::partial_sort(idx.begin(), idx.begin() + std::min<Index>(k, num_items), idx.end(),
                      [&](Index a, Index b) {
                          return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
                      });
    idx.resize(static_cast<std::size_t>(std::max<Index>(top, 0)));
    return idx;
}

double recall_at_k(const std::vector<Index>& recommended,
                   const std::unordered_set<Index>& relevant) {
    if (relevant.empty()) throw ConfigError("recall_at_k: relevant set must be non-empty");
    std::size_t hits = 0;
    for (Index i : recommended) hits += relevant.count(i);
    return static_cast<double>(hits) / static_cast<double>(relevant.size());
}

double ndcg_at_k(const std::vector<Index>& recommended,
                 const std::unordered_set<Index>& relevant) {
    if (relevant.empty()) throw ConfigError("ndcg_at_k: relevant set must be non-empty");
    double dcg = 0.0;
    for (std::size_t pos = 0; pos < recommended.size(); ++pos) {
        if (relevant.count(recommended[pos])) {
            dcg += 1.0 / std::log2(static_cast<double>(pos) + 2.0);
        }
    }
    const std::size_t ideal_hits = std::min(recommended.size(), relevant.size());
    double idcg = 0.0;
    for (std::size_t pos = 0; pos < ideal_hits; ++pos) {
        idcg += 1.0 / std::log2(static_cast<double>(pos) + 2.0);
    }
    return idcg > 0.0 ? dcg / idcg : 0.0;
}

EvalReport evaluate(const Matrix& x, const InteractionDataset& dataset, int k,
                    double tail_fraction) {
    if (!dataset.has_split) throw ConfigError("evaluate requires a split dataset");
    if (x.rows() != static_cast<Index>(dataset.num_users + dataset.num_items)) {
        throw ShapeError("evaluate: embedding rows != num_users + num_items");
    }

    const auto tail = tail_items(dataset, tail_fraction);
    const std::unordered_set<Index> tail_set(tail.begin(), tail.end());

    std::vector<std::unordered_set<Index>> train_sets(dataset.num_users);
    std::vector<std::unordered_set<Index>> test_sets(dataset.num_users);
    for (const auto& [u, i] : dataset.train) train_sets[static_cast<std::size_t>(u)].insert(i);
    for (const auto& [u, i] : dataset.test) test_sets[static_cast<std::size_t>(u)].insert(i);

    EvalReport report;
    report.k = k;
    report.tail_fraction = tail_fraction;
    double recall_sum = 0.0, ndcg_sum = 0.0, tail_recall_sum = 0.0, tail_ndcg_sum = 0.0;

    for (std::size_t u = 0; u < dataset.num_users; ++u) {
        const auto& relevant = test_sets[u];
        if (relevant.empty()) continue;
        const auto recs = rank_topk(x, static_cast<Index>(dataset.num_users),
                                    static_cast<Index>(dataset.num_items),
                                    static_cast<Index>(u), k, train_sets[u]);
        recall_sum += recall_at_k(recs, relevant);
        ndcg_sum += ndcg_at_k(recs, relevant);
        ++report.num_evaluated_users;

        std::unordered_set<Index> tail_relevant;
        for (Index i : relevant) {
            if (tail_set.count(i)) tail_relevant.insert(i);
        }
        if (!tail_relevant.empty()) {
            tail_recall_sum += recall_at_k(recs, tail_relevant);
            tail_ndcg_sum += ndcg_at_k(recs, tail_relevant);
            ++report.num_tail_evaluated_users;
        }
    }

    if (report.num_evaluated_users > 0) {
        report.overall_recall = recall_sum / static_cast<double>(report.num_evaluated_users);
        report.overall_ndcg = ndcg_sum / static_cast<double>(report.num_evaluated_users);
    }
    if (report.num_tail_evaluated_users > 0) {
        report.tail_recall = tail_recall_sum / static_cast<double>(report.num_tail_evaluated_users);
        report.tail_ndcg = tail_ndcg_sum / static_cast<double>(report.num_tail_evaluated_users);
    }
    return report;
}

InteractionDataset synthetic_biased_dataset(Index num_users, Index num_items,
                                            int interactions_per_user,
                                            double popularity_exponent, std::uint64_t seed) {
    if (num_users < 1 || num_items < 1 || interactions_per_user < 1) {
        throw ConfigError("synthetic_biased_dataset: parameters must be positive");
    }
    if (popularity_exponent < 0.0) {
        throw ConfigError("synthetic_biased_dataset: exponent must be non-negative");
    }
    if (static_cast<Index>(interactions_per_user) > num_items) {
        throw ConfigError("interactions_per_user exceeds num_items");
    }

    std::vector<double> base_weight(static_cast<std::size_t>(num_items));
    for (Index i = 0; i < num_items; ++i) {
        base_weight[static_cast<std::size_t>(i)] =
            std::pow(static_cast<double>(i) + 1.0, -popularity_exponent);
    }

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    InteractionDataset ds;
    ds.num_users = static_cast<std::size_t>(num_users);
    ds.num_items = static_cast<std::size_t>(num_items);
    ds.user_ids.resize(ds.num_users);
    ds.item_ids.resize(ds.num_items);
    std::iota(ds.user_ids.begin(), ds.user_ids.end(), 0);
    std::iota(ds.item_ids.begin(), ds.item_ids.end(), 0);

    std::vector<double> weight;
    for (Index u = 0; u < num_users; ++u) {
        weight = base_weight;
        double total = std::accumulate(weight.begin(), weight.end(), 0.0);
        for (int t = 0; t < interactions_per_user; ++t) {
            // inverse-CDF draw over the remaining items
            double target = uniform(rng) * total;
            Index chosen = num_items - 1;
            for (Index i = 0; i < num_items; ++i) {
                target -= weight[static_cast<std::size_t>(i)];
                if (target <= 0.0) {
                    chosen = i;
                    break;
                }
            }
            while (weight[static_cast<std::size_t>(chosen)] == 0.0 && chosen > 0) --chosen;
            ds.interactions.emplace_back(static_cast<std::int32_t>(u),
                                         static_cast<std::int32_t>(chosen));
            total -= weight[static_cast<std::size_t>(chosen)];
            weight[static_cast<std::size_t>(chosen)] = 0.0;
        }
    }
    std::sort(ds.interactions.begin(), ds.interactions.end());
    return ds;
}

std::string EvalReport::to_json() const {
    nlohmann::json j;
    j["k"] = k;
    j["tail_fraction"] = tail_fraction;
    j["overall_recall"] = overall_recall;
    j["overall_ndcg"] = overall_ndcg;
    j["tail_recall"] = tail_recall;
    j["tail_ndcg"] = tail_ndcg;
    j["num_evaluated_users"] = num_evaluated_users;
    j["num_tail_evaluated_users"] = num_tail_evaluated_users;
    return j.dump(2);
}

std::string EvalReport::csv_header() const {
    return "k,tail_fraction,overall_recall,overall_ndcg,tail_recall,tail_ndcg,"
           "num_evaluated_users,num_tail_evaluated_users";
}

std::string EvalReport::csv_row() const {
    std::ostringstream ss;
    ss << k << "," << tail_fraction << "," << overall_recall << "," << overall_ndcg << ","
       << tail_recall << "," << tail_ndcg << "," << num_evaluated_users << ","
       << num_tail_evaluated_users;
    return ss.str();
}

}  // namespace tsp
