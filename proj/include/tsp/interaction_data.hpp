#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tsp/types.hpp"

namespace tsp {

enum class FileFormat { Csv, Tsv };

using Interaction = std::pair<std::int32_t, std::int32_t>;  // (user index, item index)

// Implicit-feedback dataset over densified user/item index spaces.
// `interactions` is the full deduplicated edge set; after unbiased_split the
// three split vectors partition it and `item_popularity` counts train
// interactions per item.
struct InteractionDataset {
    std::size_t num_users = 0;
    std::size_t num_items = 0;
    std::vector<Interaction> interactions;
    std::vector<Interaction> train, valid, test;
    bool has_split = false;
    std::vector<std::int64_t> user_ids;  // dense index -> original id
    std::vector<std::int64_t> item_ids;
    std::vector<std::int64_t> item_popularity;  // train counts, size num_items
};

// User-item bipartite graph with nodes ordered users first, then items.
// normalized_adjacency is D^{-1/2} A D^{-1/2} with the isolated-node
// convention D^{-1/2}_vv = 0; normalized_laplacian is I minus that.
struct BipartiteGraph {
    std::size_t num_users = 0;
    std::size_t num_items = 0;
    SparseMatrix adjacency;
    SparseMatrix normalized_adjacency;
    SparseMatrix normalized_laplacian;
    Eigen::VectorXi degrees;

    std::size_t num_nodes() const { return num_users + num_items; }
    Index item_node(Index item) const { return static_cast<Index>(num_users) + item; }
};

// Reads two integer columns (user id, item id), comma or tab separated, with
// an optional header row.  Ids are densified to contiguous indices in first-
// appearance order; duplicate pairs collapse to one interaction.
InteractionDataset load_interactions(const std::string& path, FileFormat format);

// Uniform sample without replacement over interactions: train/valid/test
// fractions honored to within rounding, deterministic per seed.  Item
// popularity is recomputed from the train split.
InteractionDataset unbiased_split(const InteractionDataset& dataset, double train_frac,
                                  double valid_frac, std::uint64_t seed);

// Builds A, the normalized adjacency and the normalized Laplacian from the
// train split.
BipartiteGraph build_bipartite_graph(const InteractionDataset& dataset);

// The floor(fraction * num_items) items with the smallest train popularity,
// ties broken by ascending item index.
std::vector<std::int32_t> tail_items(const InteractionDataset& dataset, double fraction);

// JSON split manifest: {"train": [[u,i],...], "valid": ..., "test": ...,
// "id_maps": {"users": {...}, "items": {...}}}.
void write_split_manifest(const InteractionDataset& dataset, const std::string& path);
InteractionDataset read_split_manifest(const std::string& path);

}  // namespace tsp
