// Independent oracles used by the unit and acceptance suites.  Everything
// here is computed from first principles (dense algebra, explicit loops,
// subset enumeration) so it shares no code path with the library.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "tsp/interaction_data.hpp"
#include "tsp/types.hpp"

namespace tsp::testing {

// ---------------------------------------------------------------------------
// Dense clique complex built by brute-force subset enumeration (n <= ~14).
// ---------------------------------------------------------------------------

struct DenseComplex {
    std::vector<std::vector<std::vector<Index>>> simplices;  // [k] -> ascending tuples
    std::vector<Matrix> boundary;                            // [k] dense B_k, k >= 1
};

inline DenseComplex brute_force_clique_complex(const Matrix& adjacency, int max_order) {
    const Index n = adjacency.rows();
    DenseComplex complex;
    complex.simplices.assign(static_cast<std::size_t>(max_order) + 1, {});

    // Every subset of size <= K+1 whose members are pairwise adjacent.
    for (std::uint64_t mask = 1; mask < (1ull << n); ++mask) {
        std::vector<Index> members;
        for (Index v = 0; v < n; ++v) {
            if (mask & (1ull << v)) members.push_back(v);
        }
        if (static_cast<int>(members.size()) > max_order + 1) continue;
        bool clique = true;
        for (std::size_t a = 0; a < members.size() && clique; ++a) {
            for (std::size_t b = a + 1; b < members.size(); ++b) {
                if (adjacency(members[a], members[b]) == 0.0) {
                    clique = false;
                    break;
                }
            }
        }
        if (clique) complex.simplices[members.size() - 1].push_back(members);
    }
    for (auto& order : complex.simplices) std::sort(order.begin(), order.end());

    complex.boundary.resize(complex.simplices.size());
    for (std::size_t k = 1; k < complex.simplices.size(); ++k) {
        const auto& faces = complex.simplices[k - 1];
        const auto& cells = complex.simplices[k];
        Matrix b = Matrix::Zero(static_cast<Index>(faces.size()), static_cast<Index>(cells.size()));
        for (std::size_t col = 0; col < cells.size(); ++col) {
            for (std::size_t omit = 0; omit < cells[col].size(); ++omit) {
                std::vector<Index> face;
                for (std::size_t i = 0; i < cells[col].size(); ++i) {
                    if (i != omit) face.push_back(cells[col][i]);
                }
                const auto row = std::find(faces.begin(), faces.end(), face) - faces.begin();
                b(static_cast<Index>(row), static_cast<Index>(col)) = omit % 2 == 0 ? 1.0 : -1.0;
            }
        }
        complex.boundary[k] = b;
    }
    return complex;
}

inline int dense_top_order(const DenseComplex& c) {
    for (int k = static_cast<int>(c.simplices.size()) - 1; k >= 0; --k) {
        if (!c.simplices[static_cast<std::size_t>(k)].empty()) return k;
    }
    return -1;
}

inline Matrix dense_hodge_laplacian(const DenseComplex& c, int k) {
    const auto nk = static_cast<Index>(c.simplices[static_cast<std::size_t>(k)].size());
    Matrix lap = Matrix::Zero(nk, nk);
    const int top = dense_top_order(c);
    if (k == 0) {
        if (top >= 1) lap = c.boundary[1] * c.boundary[1].transpose();
        return lap;
    }
    lap = c.boundary[static_cast<std::size_t>(k)].transpose() * c.boundary[static_cast<std::size_t>(k)];
    if (k + 1 <= top) {
        lap += c.boundary[static_cast<std::size_t>(k) + 1] *
               c.boundary[static_cast<std::size_t>(k) + 1].transpose();
    }
    return lap;
}

// Straight-line dense evaluation of the full test-time propagation: lift
// every order, L filter steps, project down, fuse with the mean over orders.
inline Matrix straight_line_tsp(const Matrix& adjacency, const Matrix& x0, int max_order,
                                int layers, double beta, bool unsigned_mode) {
    const DenseComplex c = brute_force_clique_complex(adjacency, max_order);
    const int top = dense_top_order(c);
    Matrix sum = Matrix::Zero(x0.rows(), x0.cols());

    for (int k = 1; k <= max_order; ++k) {
        const auto& cells = c.simplices[static_cast<std::size_t>(k)];
        if (cells.empty()) continue;
        const auto nk = static_cast<Index>(cells.size());

        Matrix signal;
        if (unsigned_mode) {
            signal = Matrix::Zero(nk, x0.cols());
            for (Index s = 0; s < nk; ++s) {
                for (Index v : cells[static_cast<std::size_t>(s)]) signal.row(s) += x0.row(v);
                signal.row(s) /= static_cast<double>(cells[static_cast<std::size_t>(s)].size());
            }
        } else {
            signal = x0;
            for (int i = 1; i <= k; ++i) {
                signal = c.boundary[static_cast<std::size_t>(i)].transpose() * signal;
            }
        }

        const Matrix lap = dense_hodge_laplacian(c, k);
        for (int l = 0; l < layers; ++l) signal = signal - beta * (lap * signal);

        Matrix back = Matrix::Zero(x0.rows(), x0.cols());
        if (unsigned_mode) {
            Vector incident = Vector::Zero(x0.rows());
            for (Index s = 0; s < nk; ++s) {
                for (Index v : cells[static_cast<std::size_t>(s)]) {
                    back.row(v) += signal.row(s);
                    incident[v] += 1.0;
                }
            }
            for (Index v = 0; v < x0.rows(); ++v) {
                if (incident[v] > 0.0) back.row(v) /= incident[v];
            }
        } else {
            Matrix cur = signal;
            for (int i = k; i >= 1; --i) cur = c.boundary[static_cast<std::size_t>(i)] * cur;
            back = cur;
        }
        sum += back;
        (void)top;
    }
    return x0 + sum / static_cast<double>(max_order);
}

// ---------------------------------------------------------------------------
// Brute-force ranking metrics, explicit loops everywhere.
// ---------------------------------------------------------------------------

struct BruteReport {
    double overall_recall = 0.0;
    double overall_ndcg = 0.0;
    double tail_recall = 0.0;
    double tail_ndcg = 0.0;
    long evaluated_users = 0;
    long tail_evaluated_users = 0;
};

inline BruteReport brute_force_evaluate(const Matrix& x, const InteractionDataset& ds, int k,
                                        double tail_fraction) {
    const auto num_users = static_cast<Index>(ds.num_users);
    const auto num_items = static_cast<Index>(ds.num_items);

    // tail items by (popularity, index) sort
    std::vector<std::pair<std::int64_t, Index>> by_pop;
    for (Index i = 0; i < num_items; ++i) {
        by_pop.emplace_back(ds.item_popularity[static_cast<std::size_t>(i)], i);
    }
    std::sort(by_pop.begin(), by_pop.end());
    const auto tail_count =
        static_cast<std::size_t>(std::floor(tail_fraction * static_cast<double>(num_items)));
    std::set<Index> tail;
    for (std::size_t i = 0; i < tail_count; ++i) tail.insert(by_pop[i].second);

    std::vector<std::set<Index>> train_sets(ds.num_users), test_sets(ds.num_users);
    for (const auto& [u, i] : ds.train) train_sets[static_cast<std::size_t>(u)].insert(i);
    for (const auto& [u, i] : ds.test) test_sets[static_cast<std::size_t>(u)].insert(i);

    BruteReport report;
    for (Index u = 0; u < num_users; ++u) {
        const auto& rel = test_sets[static_cast<std::size_t>(u)];
        if (rel.empty()) continue;

        std::vector<std::pair<double, Index>> scored;
        for (Index i = 0; i < num_items; ++i) {
            if (train_sets[static_cast<std::size_t>(u)].count(i)) continue;
            double s = 0.0;
            for (Index f = 0; f < x.cols(); ++f) s += x(u, f) * x(num_users + i, f);
            scored.emplace_back(s, i);
        }
        std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
            return a.first != b.first ? a.first > b.first : a.second < b.second;
        });
        std::vector<Index> recs;
        for (std::size_t r = 0; r < scored.size() && static_cast<int>(r) < k; ++r) {
            recs.push_back(scored[r].second);
        }

        const auto metrics = [&](const std::set<Index>& relevant, double& recall, double& ndcg) {
            long hits = 0;
            double dcg = 0.0;
            for (std::size_t pos = 0; pos < recs.size(); ++pos) {
                if (relevant.count(recs[pos])) {
                    ++hits;
                    dcg += (std::pow(2.0, 1.0) - 1.0) / std::log2(static_cast<double>(pos + 2));
                }
            }
            double idcg = 0.0;
            const std::size_t ideal = std::min(recs.size(), relevant.size());
            for (std::size_t pos = 0; pos < ideal; ++pos) {
                idcg += (std::pow(2.0, 1.0) - 1.0) / std::log2(static_cast<double>(pos + 2));
            }
            recall = static_cast<double>(hits) / static_cast<double>(relevant.size());
            ndcg = idcg > 0.0 ? dcg / idcg : 0.0;
        };

        double recall = 0.0, ndcg = 0.0;
        metrics(rel, recall, ndcg);
        report.overall_recall += recall;
        report.overall_ndcg += ndcg;
        ++report.evaluated_users;

        std::set<Index> tail_rel;
        for (Index i : rel) {
            if (tail.count(i)) tail_rel.insert(i);
        }
        if (!tail_rel.empty()) {
            double tr = 0.0, tn = 0.0;
            metrics(tail_rel, tr, tn);
            report.tail_recall += tr;
            report.tail_ndcg += tn;
            ++report.tail_evaluated_users;
        }
    }
    if (report.evaluated_users > 0) {
        report.overall_recall /= static_cast<double>(report.evaluated_users);
        report.overall_ndcg /= static_cast<double>(report.evaluated_users);
    }
    if (report.tail_evaluated_users > 0) {
        report.tail_recall /= static_cast<double>(report.tail_evaluated_users);
        report.tail_ndcg /= static_cast<double>(report.tail_evaluated_users);
    }
    return report;
}

// Projection of a vector onto the numerical kernel of a dense symmetric
// matrix (eigenvalues below tol).
inline Vector dense_kernel_projection(const Matrix& m, const Vector& v, double tol = 1e-9) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
    Vector out = Vector::Zero(v.size());
    for (Index i = 0; i < m.rows(); ++i) {
        if (std::abs(solver.eigenvalues()[i]) < tol) {
            const Vector u = solver.eigenvectors().col(i);
            out += u.dot(v) * u;
        }
    }
    return out;
}

}  // namespace tsp::testing
