#include "tsp/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "tsp/errors.hpp"

namespace tsp {

void TSPConfig::validate() const {
    if (!std::isfinite(theta)) throw ConfigError("theta must be finite");
    if (beta <= 0.0) throw ConfigError("beta must be positive");
    if (layers < 1) throw ConfigError("propagation layers L must be >= 1");
    if (max_order < 1) throw ConfigError("max order K must be >= 1");
    if (mu <= 0.0) throw ConfigError("mu must be positive");
}

std::string TSPConfig::hash() const {
    Fnv1a h;
    h.update(theta).update(beta);
    h.update(static_cast<std::uint64_t>(layers));
    h.update(static_cast<std::uint64_t>(max_order));
    h.update(mu);
    h.update(static_cast<std::uint64_t>(lifting_mode == LiftingMode::UnsignedMean ? 0 : 1));
    h.update(static_cast<std::uint64_t>(normalize_similarity ? 1 : 0));
    h.update(static_cast<std::uint64_t>(scope == NodeScope::AllNodes ? 0 : 1));
    return h.hex();
}

namespace {

// Vertex-aligned rows of the embedding matrix (complex vertices may map to a
// subset of embedding rows).
Matrix vertex_rows(const SimplicialComplex& complex, const Matrix& x0) {
    const auto n = static_cast<Index>(complex.node_ids.size());
    Matrix rows(n, x0.cols());
    for (Index v = 0; v < n; ++v) {
        const Index src = complex.node_ids[static_cast<std::size_t>(v)];
        if (src < 0 || src >= x0.rows()) {
            throw ShapeError("complex vertex maps outside the embedding matrix");
        }
        rows.row(v) = x0.row(src);
    }
    return rows;
}

}  // namespace

SimplexSignal lift_embeddings(const SimplicialComplex& complex, const Matrix& x0, int k,
                              LiftingMode mode) {
    if (k < 1 || k > complex.max_order) {
        throw ShapeError("lift_embeddings: order " + std::to_string(k) + " out of range");
    }
    SimplexSignal signal;
    signal.order = k;
    const Index nk = complex.count(k);
    signal.values.resize(nk, x0.cols());
    if (nk == 0) return signal;

    if (mode == LiftingMode::SignedBoundary) {
        Matrix cur = vertex_rows(complex, x0);
        for (int i = 1; i <= k; ++i) {
            cur = SparseMatrix(complex.boundaries[static_cast<std::size_t>(i)].transpose()) * cur;
        }
        signal.values = cur;
    } else {
        const Matrix rows = vertex_rows(complex, x0);
        const auto& tuples = complex.simplices[static_cast<std::size_t>(k)];
        for (Index s = 0; s < nk; ++s) {
            const auto& tuple = tuples[static_cast<std::size_t>(s)];
            Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(x0.cols());
            for (Index v : tuple) mean += rows.row(v);
            signal.values.row(s) = mean / static_cast<double>(tuple.size());
        }
    }
    return signal;
}

SimplexSignal inter_simplex_step(const HodgeOperator& op, double beta,
                                 const SimplexSignal& signal) {
    if (beta <= 0.0) throw ConfigError("beta must be positive");
    if (signal.order != op.order) {
        throw ShapeError("inter_simplex_step: signal order != operator order");
    }
    if (signal.values.rows() != op.dim()) {
        throw ShapeError("inter_simplex_step: signal rows != operator dimension");
    }
    if (op.dim() == 0) return signal;

    double radius = op.spectral_radius;
    if (radius < 0.0) {
        HodgeOperator probe = op;
        radius = estimate_spectral_radius(probe);
    }
    if (beta * radius >= 2.0) {
        throw ConfigError("unstable filter: beta * lambda_max = " +
                          std::to_string(beta * radius) + " >= 2 (lambda_max ~ " +
                          std::to_string(radius) + ", admissible beta < " +
                          std::to_string(2.0 / radius) + ")");
    }
    SimplexSignal out;
    out.order = signal.order;
    out.values = signal.values - beta * (op.matrix * signal.values);
    return out;
}

Matrix project_down(const SimplicialComplex& complex, const SimplexSignal& signal,
                    LiftingMode mode, Index num_rows) {
    const int k = signal.order;
    if (k < 1 || k > complex.max_order) {
        throw ShapeError("project_down: order " + std::to_string(k) + " out of range");
    }
    if (signal.values.rows() != complex.count(k)) {
        throw ShapeError("project_down: signal rows != simplex count");
    }
    const Index d = signal.values.cols();
    Matrix out = Matrix::Zero(num_rows, d);
    if (complex.count(k) == 0) return out;

    const auto n_vertices = static_cast<Index>(complex.node_ids.size());
    Matrix vertex_values;
    if (mode == LiftingMode::SignedBoundary) {
        Matrix cur = signal.values;
        for (int i = k; i >= 1; --i) {
            cur = complex.boundaries[static_cast<std::size_t>(i)] * cur;
        }
        vertex_values = cur;
    } else {
        vertex_values = Matrix::Zero(n_vertices, d);
        Vector incident = Vector::Zero(n_vertices);
        const auto& tuples = complex.simplices[static_cast<std::size_t>(k)];
        for (Index s = 0; s < complex.count(k); ++s) {
            for (Index v : tuples[static_cast<std::size_t>(s)]) {
                vertex_values.row(v) += signal.values.row(s);
                incident[v] += 1.0;
            }
        }
        for (Index v = 0; v < n_vertices; ++v) {
            if (incident[v] > 0.0) vertex_values.row(v) /= incident[v];
        }
    }

    for (Index v = 0; v < n_vertices; ++v) {
        const Index dst = complex.node_ids[static_cast<std::size_t>(v)];
        if (dst < 0 || dst >= num_rows) {
            throw ShapeError("complex vertex maps outside the output matrix");
        }
        out.row(dst) = vertex_values.row(v);
    }
    return out;
}

FusedEmbedding tsp_run(const SimplicialComplex& complex, const Matrix& x0,
                       const TSPConfig& config) {
    config.validate();
    const int K = config.max_order;

    FusedEmbedding fused;
    fused.config_hash = config.hash();
    fused.complex_hash = complex.content_hash();

    // Order 0 propagates over L_0 like every other order; the fused output
    // adds the original X0, so this pass only feeds the provenance trace.
    {
        HodgeOperator op = hodge_laplacian(complex, 0);
        estimate_spectral_radius(op);
        SimplexSignal s0{0, vertex_rows(complex, x0)};
        OrderTrace trace{0, complex.count(0), s0.values.norm(), 0.0};
        for (int l = 0; l < config.layers; ++l) s0 = inter_simplex_step(op, config.beta, s0);
        trace.norm_after = s0.values.norm();
        fused.per_order.push_back(trace);
    }

    Matrix sum = Matrix::Zero(x0.rows(), x0.cols());
    for (int k = 1; k <= K; ++k) {
        OrderTrace trace{k, complex.count(k), 0.0, 0.0};
        if (complex.count(k) > 0) {
            HodgeOperator op = hodge_laplacian(complex, k);
            estimate_spectral_radius(op);
            SimplexSignal s = lift_embeddings(complex, x0, k, config.lifting_mode);
            trace.norm_before = s.values.norm();
            for (int l = 0; l < config.layers; ++l) s = inter_simplex_step(op, config.beta, s);
            trace.norm_after = s.values.norm();
            sum += project_down(complex, s, config.lifting_mode, x0.rows());
        }
        fused.per_order.push_back(trace);
    }

    fused.values = x0 + sum / static_cast<double>(K);
    return fused;
}

Matrix simplicial_resolvent_apply(const HodgeOperator& op, double mu, const Matrix& v,
                                  const SolverConfig& config) {
    if (mu <= 0.0) throw ConfigError("resolvent weight mu must be positive");
    if (v.rows() != op.dim()) {
        throw ShapeError("simplicial_resolvent_apply: vector rows != operator dimension");
    }
    const auto apply = [&](const Vector& y) -> Vector { return op.matrix * y + mu * y; };
    return cg_solve(apply, Matrix(mu * v), config, "simplicial_resolvent_apply");
}

ContractionReport verify_norm_contraction(const HodgeOperator& op, double mu, int trials,
                                          std::uint64_t seed, Index dense_cap) {
    if (mu <= 0.0) throw ConfigError("mu must be positive");
    ContractionReport report;
    if (op.dim() == 0 || op.matrix.nonZeros() == 0) return report;  // no positive spectrum

    const SolverConfig tight{1e-12, 20000};

    // Dense spectral oracle for the contraction bound on small operators.
    if (op.dim() <= dense_cap) {
        Eigen::SelfAdjointEigenSolver<Matrix> solver(Matrix(op.matrix));
        const double lambda_max = solver.eigenvalues().maxCoeff();
        const double zero_tol = 1e-9 * std::max(1.0, lambda_max);
        for (Index i = 0; i < op.dim(); ++i) {
            const double ev = solver.eigenvalues()[i];
            if (ev > zero_tol) {
                report.lambda_min_positive = ev;
                break;
            }
        }
        if (std::isfinite(report.lambda_min_positive)) {
            const double f = mu / (report.lambda_min_positive + mu);
            report.ratio_bound = f * f;
        } else {
            return report;  // numerically zero operator
        }
    }

    report.applicable = true;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    const bool has_lower = op.lower.size() > 0;
    const bool has_upper = op.upper.size() > 0;
    const SparseMatrix lower_t = has_lower ? SparseMatrix(op.lower.transpose()) : SparseMatrix();
    const SparseMatrix upper_t = has_upper ? SparseMatrix(op.upper.transpose()) : SparseMatrix();

    for (int t = 0; t < trials; ++t) {
        Vector v(op.dim());
        for (Index i = 0; i < op.dim(); ++i) v[i] = normal(rng);

        // Strip the harmonic component: project onto im(B_k^T) + im(B_{k+1}).
        Vector nonharmonic = Vector::Zero(op.dim());
        if (has_lower) {
            const auto down = [&](const Vector& y) -> Vector { return op.lower * (lower_t * y); };
            const Vector y = cg_solve(down, Vector(op.lower * v), tight, "contraction gradient");
            nonharmonic += lower_t * y;
        }
        if (has_upper) {
            const auto up = [&](const Vector& z) -> Vector { return upper_t * (op.upper * z); };
            const Vector z = cg_solve(up, Vector(upper_t * v), tight, "contraction curl");
            nonharmonic += op.upper * z;
        }
        const double norm_sq = nonharmonic.squaredNorm();
        if (norm_sq < 1e-20) continue;  // sampled (numerically) harmonic vector

        const Vector rv = simplicial_resolvent_apply(op, mu, Matrix(nonharmonic), tight).col(0);
        const double ratio = rv.squaredNorm() / norm_sq;
        ++report.trials;
        report.worst_ratio = std::max(report.worst_ratio, ratio);
        if (ratio >= 1.0) ++report.violations;
    }
    return report;
}

}  // namespace tsp
