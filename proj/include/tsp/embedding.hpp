#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tsp/interaction_data.hpp"
#include "tsp/types.hpp"

namespace tsp {

// Node embeddings, rows aligned with BipartiteGraph indexing (users first).
// `values` holds the propagated embeddings used for scoring; `initial` keeps
// the pre-propagation snapshot when one exists (0x0 otherwise).
struct EmbeddingMatrix {
    Matrix values;
    Matrix initial;

    Index rows() const { return values.rows(); }
    Index dim() const { return values.cols(); }
    bool has_initial() const { return initial.size() > 0; }
};

struct TrainConfig {
    int layers = 3;
    Index dim = 64;
    double learning_rate = 1e-3;
    double weight_decay = 1e-4;
    int batch_size = 4096;
    int max_epochs = 500;
    int patience = 50;
    std::uint64_t seed = 1;
    double init_scale = 0.1;
    int eval_k = 20;  // validation Recall@k cutoff for early stopping

    void validate() const;
};

struct EpochStats {
    int epoch = 0;
    double loss = 0.0;
    double valid_recall = 0.0;
};

struct TrainResult {
    EmbeddingMatrix embeddings;
    std::vector<EpochStats> history;
    int best_epoch = -1;
    std::int64_t skipped_triples = 0;
};

// Gaussian init: i.i.d. N(0, scale^2), deterministic per seed.  scale = 0
// degenerates to the zero matrix; negative scale is rejected.
EmbeddingMatrix init_embeddings(Index n, Index d, std::uint64_t seed, double scale);

// One message passing layer: returns the normalized adjacency times X.
Matrix propagate_layer(const BipartiteGraph& graph, const Matrix& x);

// Mean of the layer-wise propagated embeddings X, AX, ..., A^L X.
Matrix lightgcn_forward(const BipartiteGraph& graph, const Matrix& x0, int layers);

// Pairwise ranking (BPR) training of the layer-0 embeddings with Adam, one
// uniform negative per positive, early stopping on validation Recall@k.
TrainResult bpr_train(const InteractionDataset& dataset, const BipartiteGraph& graph,
                      const TrainConfig& config);

// Inner-product score between a user row and an item row.
double score(const Matrix& x, Index num_users, Index user, Index item);

// Binary format: magic "EMB1", u64 rows, u64 dim, row-major little-endian
// float32 payload.
void save_embeddings_binary(const std::string& path, const Matrix& x);
Matrix load_embeddings_binary(const std::string& path);

// CSV alternative: one row per node, 9 significant digits.
void save_embeddings_csv(const std::string& path, const Matrix& x);
Matrix load_embeddings_csv(const std::string& path);

}  // namespace tsp
