#include "tsp/simplicial.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "tsp/errors.hpp"

namespace tsp {

int SimplicialComplex::top_order() const {
    for (int k = static_cast<int>(simplices.size()) - 1; k >= 0; --k) {
        if (!simplices[static_cast<std::size_t>(k)].empty()) return k;
    }
    return -1;
}

std::string SimplicialComplex::content_hash() const {
    Fnv1a h;
    h.update(static_cast<std::uint64_t>(max_order));
    for (const auto& order : simplices) {
        h.update(static_cast<std::uint64_t>(order.size()));
        for (const auto& tuple : order) {
            for (Index v : tuple) h.update(static_cast<std::uint64_t>(v));
        }
    }
    for (Index id : node_ids) h.update(static_cast<std::uint64_t>(id));
    return h.hex();
}

SemanticGraph build_semantic_graph(const Matrix& x, double theta, NodeScope scope,
                                   bool normalize, Index num_users, std::size_t max_edges) {
    if (!std::isfinite(theta)) throw ConfigError("semantic threshold must be finite");
    if (scope == NodeScope::ItemsOnly && (num_users < 0 || num_users > x.rows())) {
        throw ShapeError("build_semantic_graph: num_users out of range");
    }

    const Index first_row = scope == NodeScope::ItemsOnly ? num_users : 0;
    const Index n = x.rows() - first_row;

    Matrix rows = x.bottomRows(n);
    if (normalize) {
        for (Index i = 0; i < n; ++i) {
            const double norm = rows.row(i).norm();
            if (norm > 0.0) rows.row(i) /= norm;
        }
    }

    std::vector<Triplet> entries;
    std::size_t edge_count = 0;
    const Index block = 512;
    for (Index r0 = 0; r0 < n; r0 += block) {
        const Index rows_here = std::min(block, n - r0);
        const Matrix sims = rows.middleRows(r0, rows_here) * rows.transpose();
        for (Index bi = 0; bi < rows_here; ++bi) {
            const Index i = r0 + bi;
            for (Index j = i + 1; j < n; ++j) {
                if (sims(bi, j) >= theta) {
                    if (++edge_count > max_edges) {
                        throw CapacityError(
                            "semantic graph exceeds " + std::to_string(max_edges) +
                            " edges; raise theta or the edge budget");
                    }
                    entries.emplace_back(i, j, 1.0);
                    entries.emplace_back(j, i, 1.0);
                }
            }
        }
    }

    SemanticGraph g;
    g.theta = theta;
    g.scope = scope;
    g.adjacency.resize(n, n);
    g.adjacency.setFromTriplets(entries.begin(), entries.end());
    g.node_ids.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) g.node_ids[static_cast<std::size_t>(i)] = first_row + i;
    return g;
}

namespace {

std::vector<std::vector<Index>> adjacency_lists(const SparseMatrix& adjacency) {
    const Index n = adjacency.rows();
    std::vector<std::vector<Index>> nbrs(static_cast<std::size_t>(n));
    for (Index c = 0; c < adjacency.outerSize(); ++c) {
        for (SparseMatrix::InnerIterator it(adjacency, c); it; ++it) {
            if (it.value() != 0.0 && it.row() != c) {
                nbrs[static_cast<std::size_t>(c)].push_back(it.row());
            }
        }
    }
    for (auto& v : nbrs) std::sort(v.begin(), v.end());
    return nbrs;
}

struct CliqueEnumerator {
    const std::vector<std::vector<Index>>& nbrs;
    int max_size;  // K + 1
    std::size_t budget;
    std::size_t emitted = 0;
    std::vector<std::vector<std::vector<Index>>>* out;

    void emit(const std::vector<Index>& clique) {
        if (++emitted > budget) {
            std::string counts;
            for (std::size_t k = 0; k < out->size(); ++k) {
                counts += (k ? ", " : "") + std::to_string(k) + ":" +
                          std::to_string((*out)[k].size());
            }
            throw CapacityError("simplex budget " + std::to_string(budget) +
                                " exceeded while lifting (per-order counts so far: " + counts +
                                "); raise theta, lower K, or raise the budget");
        }
        (*out)[clique.size() - 1].push_back(clique);
    }

    // Extends `clique` with vertices from `cands` (all adjacent to every
    // member, all greater than the last member, ascending).
    void grow(std::vector<Index>& clique, const std::vector<Index>& cands) {
        emit(clique);
        if (static_cast<int>(clique.size()) == max_size) return;
        std::vector<Index> next;
        for (std::size_t ci = 0; ci < cands.size(); ++ci) {
            const Index u = cands[ci];
            const auto& nu = nbrs[static_cast<std::size_t>(u)];
            next.clear();
            std::set_intersection(cands.begin() + static_cast<std::ptrdiff_t>(ci) + 1,
                                  cands.end(),
                                  std::upper_bound(nu.begin(), nu.end(), u), nu.end(),
                                  std::back_inserter(next));
            clique.push_back(u);
            grow(clique, next);
            clique.pop_back();
        }
    }
};

SparseMatrix build_boundary(const std::vector<std::vector<Index>>& faces,
                            const std::vector<std::vector<Index>>& simplices) {
    std::vector<Triplet> entries;
    entries.reserve(simplices.size() * (simplices.empty() ? 0 : simplices[0].size()));
    std::vector<Index> face;
    for (std::size_t col = 0; col < simplices.size(); ++col) {
        const auto& tuple = simplices[col];
        face.assign(tuple.begin() + 1, tuple.end());
        for (std::size_t omit = 0; omit <= tuple.size() - 1; ++omit) {
            // `face` currently omits vertex `omit` of the ascending tuple.
            const auto it = std::lower_bound(faces.begin(), faces.end(), face);
            if (it == faces.end() || *it != face) {
                throw Error("internal: face missing from complex (closure violated)");
            }
            const double sign = omit % 2 == 0 ? 1.0 : -1.0;
            entries.emplace_back(static_cast<Index>(it - faces.begin()),
                                 static_cast<Index>(col), sign);
            if (omit + 1 <= tuple.size() - 1) face[omit] = tuple[omit];
        }
    }
    SparseMatrix b(static_cast<Index>(faces.size()), static_cast<Index>(simplices.size()));
    b.setFromTriplets(entries.begin(), entries.end());
    return b;
}

SimplicialComplex lift_from_lists(const std::vector<std::vector<Index>>& nbrs, Index n,
                                  int max_order, std::size_t max_simplices) {
    if (max_order < 1) throw ConfigError("complex order cap K must be >= 1");

    SimplicialComplex complex;
    complex.max_order = max_order;
    complex.simplices.assign(static_cast<std::size_t>(max_order) + 1, {});

    CliqueEnumerator enumerator{nbrs, max_order + 1, max_simplices, 0, &complex.simplices};
    std::vector<Index> clique;
    clique.reserve(static_cast<std::size_t>(max_order) + 1);
    for (Index v = 0; v < n; ++v) {
        clique.assign(1, v);
        const auto& nv = nbrs[static_cast<std::size_t>(v)];
        std::vector<Index> cands(std::upper_bound(nv.begin(), nv.end(), v), nv.end());
        enumerator.grow(clique, cands);
    }

    complex.boundaries.resize(complex.simplices.size());
    for (int k = 1; k <= complex.top_order(); ++k) {
        complex.boundaries[static_cast<std::size_t>(k)] =
            build_boundary(complex.simplices[static_cast<std::size_t>(k) - 1],
                           complex.simplices[static_cast<std::size_t>(k)]);
    }
    complex.node_ids.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) complex.node_ids[static_cast<std::size_t>(i)] = i;
    return complex;
}

}  // namespace

SimplicialComplex lift_clique_complex(const SemanticGraph& graph, int max_order,
                                      std::size_t max_simplices) {
    auto complex = lift_from_lists(adjacency_lists(graph.adjacency), graph.num_vertices(),
                                   max_order, max_simplices);
    complex.node_ids = graph.node_ids;
    return complex;
}

SimplicialComplex lift_clique_complex(const SparseMatrix& adjacency, int max_order,
                                      std::size_t max_simplices) {
    if (adjacency.rows() != adjacency.cols()) {
        throw ShapeError("lift_clique_complex: adjacency must be square");
    }
    return lift_from_lists(adjacency_lists(adjacency), adjacency.rows(), max_order,
                           max_simplices);
}

const SparseMatrix& boundary_matrix(const SimplicialComplex& complex, int k) {
    if (k < 1 || k > complex.top_order()) {
        throw ShapeError("boundary_matrix: order " + std::to_string(k) +
                         " out of range (top order " + std::to_string(complex.top_order()) + ")");
    }
    return complex.boundaries[static_cast<std::size_t>(k)];
}

bool chain_complex_is_exact(const SimplicialComplex& complex) {
    for (int k = 1; k + 1 <= complex.top_order(); ++k) {
        const SparseMatrix& bk = complex.boundaries[static_cast<std::size_t>(k)];
        const SparseMatrix& bk1 = complex.boundaries[static_cast<std::size_t>(k) + 1];
        // Column c of the product accumulated in exact integer arithmetic.
        std::unordered_map<Index, std::int64_t> acc;
        for (Index c = 0; c < bk1.outerSize(); ++c) {
            acc.clear();
            for (SparseMatrix::InnerIterator right(bk1, c); right; ++right) {
                const auto rs = static_cast<std::int64_t>(right.value());
                for (SparseMatrix::InnerIterator left(bk, right.row()); left; ++left) {
                    acc[left.row()] += rs * static_cast<std::int64_t>(left.value());
                }
            }
            for (const auto& [row, sum] : acc) {
                (void)row;
                if (sum != 0) return false;
            }
        }
    }
    return true;
}

HodgeOperator hodge_laplacian(const SimplicialComplex& complex, int k) {
    if (k < 0 || k > complex.max_order) {
        throw ShapeError("hodge_laplacian: order " + std::to_string(k) + " out of range");
    }
    HodgeOperator op;
    op.order = k;
    const Index nk = complex.count(k);
    const int top = complex.top_order();

    op.matrix.resize(nk, nk);
    if (nk == 0) return op;

    if (k == 0) {
        if (top >= 1) {
            const SparseMatrix& b1 = complex.boundaries[1];
            op.upper = b1;
            op.matrix = (b1 * SparseMatrix(b1.transpose())).pruned();
        }
        // vertices-only complex: L_0 stays the zero matrix
        return op;
    }

    const SparseMatrix& bk = complex.boundaries[static_cast<std::size_t>(k)];
    op.lower = bk;
    SparseMatrix lap = SparseMatrix(bk.transpose()) * bk;
    if (k + 1 <= top) {
        const SparseMatrix& bk1 = complex.boundaries[static_cast<std::size_t>(k) + 1];
        op.upper = bk1;
        lap = lap + SparseMatrix(bk1 * SparseMatrix(bk1.transpose()));
    }
    op.matrix = lap.pruned();
    return op;
}

double estimate_spectral_radius(HodgeOperator& op, double rel_tol, int max_iters,
                                std::uint64_t seed) {
    if (op.dim() == 0 || op.matrix.nonZeros() == 0) {
        op.spectral_radius = 0.0;
        return 0.0;
    }
    const auto apply = [&](const Vector& v) -> Vector { return op.matrix * v; };
    op.spectral_radius = power_iteration(apply, op.dim(), rel_tol, max_iters, seed);
    return op.spectral_radius;
}

std::optional<Index> harmonic_dimension(const HodgeOperator& op, Index dense_cap,
                                        double zero_tol) {
    if (op.dim() > dense_cap) return std::nullopt;
    if (op.dim() == 0) return Index{0};
    Eigen::SelfAdjointEigenSolver<Matrix> solver(Matrix(op.matrix));
    Index count = 0;
    for (Index i = 0; i < op.dim(); ++i) {
        if (std::abs(solver.eigenvalues()[i]) < zero_tol) ++count;
    }
    return count;
}

HodgeComponents hodge_decompose(const SimplicialComplex& complex, int k, const Vector& signal,
                                const SolverConfig& config) {
    const Index nk = complex.count(k);
    if (signal.size() != nk) {
        throw ShapeError("hodge_decompose: signal length " + std::to_string(signal.size()) +
                         " != simplex count " + std::to_string(nk));
    }
    const int top = complex.top_order();
    HodgeComponents parts;
    parts.gradient = Vector::Zero(nk);
    parts.curl = Vector::Zero(nk);

    if (k >= 1 && k <= top) {
        const SparseMatrix& bk = complex.boundaries[static_cast<std::size_t>(k)];
        const SparseMatrix bkt = bk.transpose();
        // least squares onto im(B_k^T) through the normal equations
        const auto down = [&](const Vector& y) -> Vector { return bk * (bkt * y); };
        const Vector rhs = bk * signal;
        const Vector y = cg_solve(down, rhs, config, "hodge_decompose gradient");
        parts.gradient = bkt * y;
    }
    if (k + 1 <= top) {
        const SparseMatrix& bk1 = complex.boundaries[static_cast<std::size_t>(k) + 1];
        const SparseMatrix bk1t = bk1.transpose();
        const auto up = [&](const Vector& z) -> Vector { return bk1t * (bk1 * z); };
        const Vector rhs = bk1t * signal;
        const Vector z = cg_solve(up, rhs, config, "hodge_decompose curl");
        parts.curl = bk1 * z;
    }
    parts.harmonic = signal - parts.gradient - parts.curl;
    return parts;
}

void write_complex_manifest(const SimplicialComplex& complex, double theta,
                            const std::string& path) {
    nlohmann::json j;
    j["max_order"] = complex.max_order;
    j["theta"] = theta;
    nlohmann::json counts = nlohmann::json::array();
    for (int k = 0; k <= complex.max_order; ++k) counts.push_back(complex.count(k));
    j["simplex_counts"] = counts;
    j["content_hash"] = complex.content_hash();
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write complex manifest: " + path);
    out << j.dump(2) << "\n";
}

void write_boundary_triplets(const SimplicialComplex& complex, int k, const std::string& path) {
    const SparseMatrix& b = boundary_matrix(complex, k);
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write boundary triplets: " + path);
    for (Index c = 0; c < b.outerSize(); ++c) {
        for (SparseMatrix::InnerIterator it(b, c); it; ++it) {
            out << it.row() << " " << it.col() << " " << static_cast<int>(it.value()) << "\n";
        }
    }
}

}  // namespace tsp
