#include "tsp/spectral.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "tsp/errors.hpp"

namespace tsp {

void EnergyConfig::validate() const {
    if (mu <= 0.0) throw ConfigError("mu must be positive");
    if (!(eta > 0.0 && eta <= 1.0)) throw ConfigError("eta must be in (0, 1]");
    if (cg_tolerance <= 0.0) throw ConfigError("cg_tolerance must be positive");
    if (cg_max_iters < 1) throw ConfigError("cg_max_iters must be >= 1");
}

namespace {

void check_rows(const BipartiteGraph& graph, const Matrix& x, const char* what) {
    if (x.rows() != static_cast<Index>(graph.num_nodes())) {
        throw ShapeError(std::string(what) + ": embedding rows " + std::to_string(x.rows()) +
                         " != graph nodes " + std::to_string(graph.num_nodes()));
    }
}

}  // namespace

double graph_dirichlet_energy(const BipartiteGraph& graph, const Matrix& x) {
    check_rows(graph, x, "graph_dirichlet_energy");
    const Matrix lx = graph.normalized_laplacian * x;
    return (x.array() * lx.array()).sum();
}

double local_dirichlet_energy(const BipartiteGraph& graph, const Matrix& x, Index v) {
    check_rows(graph, x, "local_dirichlet_energy");
    if (v < 0 || v >= static_cast<Index>(graph.num_nodes())) {
        throw ShapeError("local_dirichlet_energy: node index out of range");
    }
    const double dv = graph.degrees[v];
    if (dv == 0.0) return 0.0;
    const Eigen::RowVectorXd xv = x.row(v) / std::sqrt(dv);
    double energy = 0.0;
    for (SparseMatrix::InnerIterator it(graph.adjacency, v); it; ++it) {
        const Index j = it.row();
        const double dj = graph.degrees[j];
        energy += (xv - x.row(j) / std::sqrt(dj)).squaredNorm();
    }
    return 0.5 * energy;
}

Matrix energy_gradient(const BipartiteGraph& graph, const Matrix& x, const Matrix& x0,
                       const EnergyConfig& config) {
    check_rows(graph, x, "energy_gradient");
    if (x0.rows() != x.rows() || x0.cols() != x.cols()) {
        throw ShapeError("energy_gradient: X and X0 shapes differ");
    }
    return graph.normalized_laplacian * x + config.mu * (x - x0);
}

Matrix gradient_descent_step(const BipartiteGraph& graph, const Matrix& x, const Matrix& x0,
                             const EnergyConfig& config) {
    return x - config.eta * energy_gradient(graph, x, x0, config);
}

Matrix resolvent_apply(const SparseMatrix& laplacian, double mu, const Matrix& v,
                       const SolverConfig& config) {
    if (mu <= 0.0) throw ConfigError("resolvent weight mu must be positive");
    if (laplacian.rows() != laplacian.cols() || laplacian.rows() != v.rows()) {
        throw ShapeError("resolvent_apply: operator/vector shape mismatch");
    }
    const auto op = [&](const Vector& y) -> Vector { return laplacian * y + mu * y; };
    return cg_solve(op, Matrix(mu * v), config, "resolvent_apply");
}

NodeDiagnostics degree_norm_report(const BipartiteGraph& graph, const Matrix& x_star,
                                   const Matrix& x0) {
    check_rows(graph, x_star, "degree_norm_report");
    if (x0.rows() != x_star.rows() || x0.cols() != x_star.cols()) {
        throw ShapeError("degree_norm_report: X* and X0 shapes differ");
    }
    const auto n = static_cast<Index>(graph.num_nodes());

    // Coefficient of the zero-eigenvalue term: the kernel direction of the
    // normalized Laplacian is the degree-scaled constant (sqrt(d_1) ... ),
    // so the bound constant is ||u1^T X0||^2 / (sum_v d_v)^2.
    Vector u1(n);
    double degree_sum = 0.0;
    for (Index v = 0; v < n; ++v) {
        u1[v] = std::sqrt(static_cast<double>(graph.degrees[v]));
        degree_sum += graph.degrees[v];
    }
    double constant = 0.0;
    if (degree_sum > 0.0) {
        const Eigen::RowVectorXd projection = u1.transpose() * x0;
        constant = projection.squaredNorm() / (degree_sum * degree_sum);
    }

    NodeDiagnostics diag;
    diag.degree.resize(static_cast<std::size_t>(n));
    diag.norm_sq.resize(static_cast<std::size_t>(n));
    diag.local_energy.resize(static_cast<std::size_t>(n));
    diag.update_sq.assign(static_cast<std::size_t>(n), 0.0);
    diag.corollary_constant = constant;
    for (Index v = 0; v < n; ++v) {
        diag.degree[static_cast<std::size_t>(v)] = graph.degrees[v];
        diag.norm_sq[static_cast<std::size_t>(v)] = x_star.row(v).squaredNorm();
        diag.local_energy[static_cast<std::size_t>(v)] = local_dirichlet_energy(graph, x_star, v);
        const double bound = graph.degrees[v] * constant;
        if (diag.norm_sq[static_cast<std::size_t>(v)] < bound - 1e-9) {
            ++diag.corollary_violations;
        }
    }
    diag.spearman_degree_norm =
        spearman_rank_correlation(diag.degree, diag.norm_sq, &diag.degenerate_degrees);
    bool degenerate_energy = false;
    diag.spearman_degree_energy =
        spearman_rank_correlation(diag.degree, diag.local_energy, &degenerate_energy);
    diag.degenerate_degrees = diag.degenerate_degrees || degenerate_energy;
    return diag;
}

NodeDiagnostics verify_update_bound(const BipartiteGraph& graph, const Matrix& x) {
    check_rows(graph, x, "verify_update_bound");
    const auto n = static_cast<Index>(graph.num_nodes());
    const Matrix delta = graph.normalized_adjacency * x - x;

    NodeDiagnostics diag;
    diag.degree.resize(static_cast<std::size_t>(n));
    diag.norm_sq.resize(static_cast<std::size_t>(n));
    diag.local_energy.resize(static_cast<std::size_t>(n));
    diag.update_sq.resize(static_cast<std::size_t>(n));
    diag.max_update_excess = -std::numeric_limits<double>::infinity();
    for (Index v = 0; v < n; ++v) {
        diag.degree[static_cast<std::size_t>(v)] = graph.degrees[v];
        diag.norm_sq[static_cast<std::size_t>(v)] = x.row(v).squaredNorm();
        diag.local_energy[static_cast<std::size_t>(v)] = local_dirichlet_energy(graph, x, v);
        diag.update_sq[static_cast<std::size_t>(v)] = delta.row(v).squaredNorm();
        if (graph.degrees[v] == 0) continue;  // the update zeroes isolated rows; no bound applies
        // Cauchy-Schwarz over the incident edges bounds the update by the
        // full (unhalved) discrepancy sum; tight with a single neighbor.
        const double bound = 2.0 * diag.local_energy[static_cast<std::size_t>(v)];
        const double excess = diag.update_sq[static_cast<std::size_t>(v)] - bound;
        diag.max_update_excess = std::max(diag.max_update_excess, excess);
        if (excess > 1e-9) ++diag.update_bound_violations;
    }
    if (!std::isfinite(diag.max_update_excess)) diag.max_update_excess = 0.0;
    return diag;
}

void NodeDiagnostics::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write diagnostics csv: " + path);
    out << "node_id,degree,norm_sq,local_energy,update_sq\n";
    char buf[160];
    for (std::size_t v = 0; v < degree.size(); ++v) {
        std::snprintf(buf, sizeof(buf), "%zu,%.0f,%.12g,%.12g,%.12g\n", v, degree[v], norm_sq[v],
                      local_energy[v], update_sq[v]);
        out << buf;
    }
}

std::string NodeDiagnostics::summary_json() const {
    nlohmann::json j;
    j["num_nodes"] = degree.size();
    j["spearman_degree_norm"] = spearman_degree_norm;
    j["spearman_degree_energy"] = spearman_degree_energy;
    j["degenerate_degrees"] = degenerate_degrees;
    j["corollary_constant"] = corollary_constant;
    j["corollary_violations"] = corollary_violations;
    j["max_update_excess"] = max_update_excess;
    j["update_bound_violations"] = update_bound_violations;
    return j.dump(2);
}

}  // namespace tsp
