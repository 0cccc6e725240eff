#include "tsp/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "tsp/errors.hpp"

namespace tsp {

void TrainConfig::validate() const {
    if (layers < 0) throw ConfigError("layers must be >= 0");
    if (dim < 1) throw ConfigError("embedding dim must be >= 1");
    if (learning_rate <= 0.0) throw ConfigError("learning_rate must be positive");
    if (weight_decay < 0.0) throw ConfigError("weight_decay must be non-negative");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (max_epochs < 0) throw ConfigError("max_epochs must be >= 0");
    if (patience < 1) throw ConfigError("patience must be >= 1");
    if (init_scale < 0.0) throw ConfigError("init_scale must be non-negative");
    if (eval_k < 1) throw ConfigError("eval_k must be >= 1");
}

EmbeddingMatrix init_embeddings(Index n, Index d, std::uint64_t seed, double scale) {
    if (n < 1 || d < 1) throw ConfigError("init_embeddings requires n, d >= 1");
    if (scale < 0.0) throw ConfigError("init scale must be non-negative");
    Matrix x(n, d);
    if (scale == 0.0) {
        x.setZero();
    } else {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> normal(0.0, scale);
        for (Index i = 0; i < n; ++i) {
            for (Index j = 0; j < d; ++j) x(i, j) = normal(rng);
        }
    }
    return EmbeddingMatrix{x, Matrix()};
}

Matrix propagate_layer(const BipartiteGraph& graph, const Matrix& x) {
    if (x.rows() != static_cast<Index>(graph.num_nodes())) {
        throw ShapeError("propagate_layer: embedding rows " + std::to_string(x.rows()) +
                         " != graph nodes " + std::to_string(graph.num_nodes()));
    }
    return graph.normalized_adjacency * x;
}

Matrix lightgcn_forward(const BipartiteGraph& graph, const Matrix& x0, int layers) {
    if (layers < 0) throw ConfigError("layers must be >= 0");
    if (layers == 0) return x0;
    Matrix sum = x0;
    Matrix cur = x0;
    for (int l = 0; l < layers; ++l) {
        cur = propagate_layer(graph, cur);
        sum += cur;
    }
    return sum / static_cast<double>(layers + 1);
}

double score(const Matrix& x, Index num_users, Index user, Index item) {
    const Index item_row = num_users + item;
    if (user < 0 || user >= num_users || item < 0 || item_row >= x.rows()) {
        throw ShapeError("score: index out of range");
    }
    return x.row(user).dot(x.row(item_row));
}

namespace {

double softplus(double z) {
    // log(1 + exp(z)) without overflow
    return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Recall@k over users with at least one validation item, train items excluded
// from the candidate set, ties broken by ascending item index.
double validation_recall(const Matrix& embeddings, const InteractionDataset& dataset,
                         const std::vector<std::vector<std::int32_t>>& train_items,
                         const std::vector<std::vector<std::int32_t>>& valid_items, int k) {
    const auto num_users = static_cast<Index>(dataset.num_users);
    const auto num_items = static_cast<Index>(dataset.num_items);
    double total = 0.0;
    Index evaluated = 0;
    Vector scores(num_items);
    std::vector<Index> idx(static_cast<std::size_t>(num_items));
    for (Index u = 0; u < num_users; ++u) {
        const auto& rel = valid_items[static_cast<std::size_t>(u)];
        if (rel.empty()) continue;
        scores.noalias() = embeddings.bottomRows(num_items) * embeddings.row(u).transpose();
        for (std::int32_t t : train_items[static_cast<std::size_t>(u)]) {
            scores[t] = -std::numeric_limits<double>::infinity();
        }
        const Index top = std::min<Index>(k, num_items);
        for (Index i = 0; i < num_items; ++i) idx[static_cast<std::size_t>(i)] = i;
        std::partial_sort(idx.begin(), idx.begin() + top, idx.end(), [&](Index a, Index b) {
            return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
        });
        Index hits = 0;
        for (Index r = 0; r < top; ++r) {
            if (std::binary_search(rel.begin(), rel.end(), static_cast<std::int32_t>(idx[static_cast<std::size_t>(r)]))) {
                ++hits;
            }
        }
        total += static_cast<double>(hits) / static_cast<double>(rel.size());
        ++evaluated;
    }
    return evaluated > 0 ? total / static_cast<double>(evaluated) : 0.0;
}

}  // namespace

TrainResult bpr_train(const InteractionDataset& dataset, const BipartiteGraph& graph,
                      const TrainConfig& config) {
    config.validate();
    if (!dataset.has_split || dataset.train.empty()) {
        throw ConfigError("bpr_train requires a non-empty train split");
    }

    const auto num_nodes = static_cast<Index>(graph.num_nodes());
    const auto num_items = static_cast<std::int64_t>(dataset.num_items);

    std::vector<std::vector<std::int32_t>> train_items(dataset.num_users);
    std::vector<std::vector<std::int32_t>> valid_items(dataset.num_users);
    for (const auto& [u, i] : dataset.train) train_items[static_cast<std::size_t>(u)].push_back(i);
    for (const auto& [u, i] : dataset.valid) valid_items[static_cast<std::size_t>(u)].push_back(i);
    for (auto& v : train_items) std::sort(v.begin(), v.end());
    for (auto& v : valid_items) std::sort(v.begin(), v.end());

    std::mt19937_64 rng(config.seed);
    Matrix x0 = init_embeddings(num_nodes, config.dim, config.seed, config.init_scale).values;

    TrainResult result;
    result.embeddings.initial = x0;
    result.embeddings.values = lightgcn_forward(graph, x0, config.layers);
    if (config.max_epochs == 0) return result;

    // Adam state
    Matrix adam_m = Matrix::Zero(num_nodes, config.dim);
    Matrix adam_v = Matrix::Zero(num_nodes, config.dim);
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    std::int64_t step = 0;

    std::vector<std::size_t> order(dataset.train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    Matrix best_x0 = x0;
    double best_recall = -1.0;
    int best_epoch = -1;
    int stale = 0;
    const bool use_valid = !dataset.valid.empty();

    Matrix grad(num_nodes, config.dim);
    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(rng() % i);
            std::swap(order[i - 1], order[j]);
        }

        double epoch_loss = 0.0;
        std::int64_t triples = 0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            const Matrix fwd = lightgcn_forward(graph, x0, config.layers);
            grad.setZero();

            for (std::size_t t = start; t < stop; ++t) {
                const auto& [u, pos] = dataset.train[order[t]];
                const auto& owned = train_items[static_cast<std::size_t>(u)];
                if (static_cast<std::int64_t>(owned.size()) >= num_items) {
                    ++result.skipped_triples;  // no negative item exists for this user
                    continue;
                }
                std::int32_t neg;
                do {
                    neg = static_cast<std::int32_t>(rng() % static_cast<std::uint64_t>(num_items));
                } while (std::binary_search(owned.begin(), owned.end(), neg));

                const Index urow = u;
                const Index prow = graph.item_node(pos);
                const Index nrow = graph.item_node(neg);
                const double diff = fwd.row(urow).dot(fwd.row(prow) - fwd.row(nrow));
                epoch_loss += softplus(-diff);
                ++triples;
                const double g = sigmoid(diff) - 1.0;  // d(-log sigma(diff))/d(diff)
                grad.row(urow) += g * (fwd.row(prow) - fwd.row(nrow));
                grad.row(prow) += g * fwd.row(urow);
                grad.row(nrow) -= g * fwd.row(urow);
            }

            // The forward pass averages A^l x0 over layers; A is symmetric, so
            // the pullback applies the same averaging to the output gradient.
            Matrix g0 = grad;
            Matrix cur = grad;
            for (int l = 0; l < config.layers; ++l) {
                cur = graph.normalized_adjacency * cur;
                g0 += cur;
            }
            g0 /= static_cast<double>(config.layers + 1);
            g0 += config.weight_decay * x0;

            ++step;
            adam_m = beta1 * adam_m + (1.0 - beta1) * g0;
            adam_v = beta2 * adam_v + (1.0 - beta2) * g0.cwiseProduct(g0);
            const double correction1 = 1.0 - std::pow(beta1, static_cast<double>(step));
            const double correction2 = 1.0 - std::pow(beta2, static_cast<double>(step));
            x0 -= (config.learning_rate / correction1) *
                  (adam_m.array() / ((adam_v / correction2).array().sqrt() + eps)).matrix();
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.loss = triples > 0 ? epoch_loss / static_cast<double>(triples) : 0.0;
        if (use_valid) {
            const Matrix fwd = lightgcn_forward(graph, x0, config.layers);
            stats.valid_recall = validation_recall(fwd, dataset, train_items, valid_items, config.eval_k);
            if (stats.valid_recall > best_recall + 1e-12) {
                best_recall = stats.valid_recall;
                best_x0 = x0;
                best_epoch = epoch;
                stale = 0;
            } else if (++stale >= config.patience) {
                result.history.push_back(stats);
                break;
            }
        }
        result.history.push_back(stats);
    }

    if (use_valid && best_epoch > 0) {
        x0 = best_x0;
        result.best_epoch = best_epoch;
    } else {
        result.best_epoch = config.max_epochs;
    }
    result.embeddings.initial = x0;
    result.embeddings.values = lightgcn_forward(graph, x0, config.layers);
    return result;
}

namespace {
constexpr char kMagic[4] = {'E', 'M', 'B', '1'};
}

void save_embeddings_binary(const std::string& path, const Matrix& x) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write embedding file: " + path);
    out.write(kMagic, 4);
    const std::uint64_t rows = static_cast<std::uint64_t>(x.rows());
    const std::uint64_t dim = static_cast<std::uint64_t>(x.cols());
    out.write(reinterpret_cast<const char*>(&rows), 8);
    out.write(reinterpret_cast<const char*>(&dim), 8);
    std::vector<float> row(static_cast<std::size_t>(x.cols()));
    for (Index i = 0; i < x.rows(); ++i) {
        for (Index j = 0; j < x.cols(); ++j) row[static_cast<std::size_t>(j)] = static_cast<float>(x(i, j));
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size() * sizeof(float)));
    }
    if (!out) throw FormatError("short write to embedding file: " + path);
}

Matrix load_embeddings_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open embedding file: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        throw FormatError("bad magic in embedding file: " + path);
    }
    std::uint64_t rows = 0, dim = 0;
    in.read(reinterpret_cast<char*>(&rows), 8);
    in.read(reinterpret_cast<char*>(&dim), 8);
    if (!in) throw FormatError("truncated embedding header: " + path);
    if (rows == 0 || dim == 0 || rows > (1ull << 32) || dim > (1ull << 20)) {
        throw FormatError("implausible embedding dimensions in header: " + path);
    }
    Matrix x(static_cast<Index>(rows), static_cast<Index>(dim));
    std::vector<float> row(static_cast<std::size_t>(dim));
    for (std::uint64_t i = 0; i < rows; ++i) {
        in.read(reinterpret_cast<char*>(row.data()),
                static_cast<std::streamsize>(row.size() * sizeof(float)));
        if (!in) throw FormatError("truncated embedding payload: " + path);
        for (std::uint64_t j = 0; j < dim; ++j) {
            x(static_cast<Index>(i), static_cast<Index>(j)) = static_cast<double>(row[j]);
        }
    }
    in.peek();
    if (!in.eof()) throw FormatError("trailing bytes after embedding payload: " + path);
    return x;
}

void save_embeddings_csv(const std::string& path, const Matrix& x) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write embedding csv: " + path);
    char buf[64];
    for (Index i = 0; i < x.rows(); ++i) {
        for (Index j = 0; j < x.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.9g", x(i, j));
            out << (j ? "," : "") << buf;
        }
        out << "\n";
    }
}

Matrix load_embeddings_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open embedding csv: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) {
            try {
                row.push_back(std::stod(field));
            } catch (const std::exception&) {
                throw ParseError("non-numeric field in embedding csv", line_no);
            }
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw FormatError("ragged row in embedding csv: " + path + " line " +
                              std::to_string(line_no));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw FormatError("empty embedding csv: " + path);
    Matrix x(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            x(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
        }
    }
    return x;
}

}  // namespace tsp
