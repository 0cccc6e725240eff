// Shared generators for randomized test instances.
#pragma once

#include <algorithm>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "tsp/interaction_data.hpp"
#include "tsp/types.hpp"

namespace tsp::testing {

// Dataset whose train split is exactly `edges`; valid/test stay empty.
inline InteractionDataset dataset_from_edges(std::size_t num_users, std::size_t num_items,
                                             std::vector<Interaction> edges) {
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    InteractionDataset ds;
    ds.num_users = num_users;
    ds.num_items = num_items;
    ds.interactions = edges;
    ds.train = std::move(edges);
    ds.has_split = true;
    ds.user_ids.resize(num_users);
    ds.item_ids.resize(num_items);
    for (std::size_t i = 0; i < num_users; ++i) ds.user_ids[i] = static_cast<std::int64_t>(i);
    for (std::size_t i = 0; i < num_items; ++i) ds.item_ids[i] = static_cast<std::int64_t>(i);
    ds.item_popularity.assign(num_items, 0);
    for (const auto& [u, i] : ds.train) {
        (void)u;
        ds.item_popularity[static_cast<std::size_t>(i)] += 1;
    }
    return ds;
}

inline BipartiteGraph graph_from_edges(std::size_t num_users, std::size_t num_items,
                                       std::vector<Interaction> edges) {
    return build_bipartite_graph(dataset_from_edges(num_users, num_items, std::move(edges)));
}

// Random bipartite graph without isolated nodes: one edge per user, one per
// uncovered item, then extras up to the requested count.
inline BipartiteGraph random_bipartite_graph(std::size_t num_users, std::size_t num_items,
                                             std::size_t extra_edges, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::set<Interaction> edges;
    for (std::size_t u = 0; u < num_users; ++u) {
        edges.emplace(static_cast<std::int32_t>(u),
                      static_cast<std::int32_t>(rng() % num_items));
    }
    std::vector<bool> covered(num_items, false);
    for (const auto& [u, i] : edges) {
        (void)u;
        covered[static_cast<std::size_t>(i)] = true;
    }
    for (std::size_t i = 0; i < num_items; ++i) {
        if (!covered[i]) {
            edges.emplace(static_cast<std::int32_t>(rng() % num_users),
                          static_cast<std::int32_t>(i));
        }
    }
    for (std::size_t e = 0; e < extra_edges; ++e) {
        edges.emplace(static_cast<std::int32_t>(rng() % num_users),
                      static_cast<std::int32_t>(rng() % num_items));
    }
    return graph_from_edges(num_users, num_items, {edges.begin(), edges.end()});
}

inline Matrix random_matrix(Index rows, Index cols, std::uint64_t seed, double scale = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, scale);
    Matrix x(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < cols; ++j) x(i, j) = normal(rng);
    }
    return x;
}

// Symmetric 0/1 adjacency from an undirected edge list.
inline SparseMatrix adjacency_from_edges(Index n, const std::vector<std::pair<Index, Index>>& edges) {
    std::vector<Triplet> entries;
    for (const auto& [a, b] : edges) {
        entries.emplace_back(a, b, 1.0);
        entries.emplace_back(b, a, 1.0);
    }
    SparseMatrix adj(n, n);
    adj.setFromTriplets(entries.begin(), entries.end());
    return adj;
}

inline SparseMatrix triangle_adjacency() { return adjacency_from_edges(3, {{0, 1}, {0, 2}, {1, 2}}); }

inline SparseMatrix hollow_square_adjacency() {
    return adjacency_from_edges(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}});
}

// Erdos-Renyi style random symmetric adjacency.
inline SparseMatrix random_adjacency(Index n, double edge_prob, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::vector<std::pair<Index, Index>> edges;
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
            if (uniform(rng) < edge_prob) edges.emplace_back(i, j);
        }
    }
    return adjacency_from_edges(n, edges);
}

}  // namespace tsp::testing
