#pragma once

#include <string>
#include <vector>

#include "tsp/interaction_data.hpp"
#include "tsp/linalg.hpp"
#include "tsp/types.hpp"

namespace tsp {

struct EnergyConfig {
    double mu = 1.0;        // Tikhonov weight
    double eta = 1.0;       // gradient step size
    double cg_tolerance = 1e-10;
    int cg_max_iters = 10000;

    void validate() const;
    SolverConfig solver() const { return SolverConfig{cg_tolerance, cg_max_iters}; }
};

// Per-node diagnostic records plus the summary statistics derived from them.
// degree_norm_report fills the norm/correlation/bound fields; the update
// bound check fills update_sq and the excess summary.
struct NodeDiagnostics {
    std::vector<double> degree;
    std::vector<double> norm_sq;
    std::vector<double> local_energy;
    std::vector<double> update_sq;

    double spearman_degree_norm = 0.0;
    double spearman_degree_energy = 0.0;
    bool degenerate_degrees = false;

    double corollary_constant = 0.0;
    Index corollary_violations = 0;

    // max over non-isolated nodes of ||dx_v||^2 minus its incident-edge
    // discrepancy bound; <= 0 (up to fp noise) when the update bound holds.
    double max_update_excess = 0.0;
    Index update_bound_violations = 0;

    void write_csv(const std::string& path) const;
    std::string summary_json() const;
};

// Tr(X^T L X), the global smoothness of the embedding signal.
double graph_dirichlet_energy(const BipartiteGraph& graph, const Matrix& x);

// Half-sum of squared normalized differences over one node's incident edges.
double local_dirichlet_energy(const BipartiteGraph& graph, const Matrix& x, Index v);

// Gradient of J(X) = 1/2 Tr(X^T L X) + mu/2 ||X - X0||^2.
Matrix energy_gradient(const BipartiteGraph& graph, const Matrix& x, const Matrix& x0,
                       const EnergyConfig& config);

// X - eta * grad J(X); at X = X0 with eta = 1 this reproduces one message
// passing layer exactly.
Matrix gradient_descent_step(const BipartiteGraph& graph, const Matrix& x, const Matrix& x0,
                             const EnergyConfig& config);

// mu * (L + mu I)^{-1} V via conjugate gradients; the closed-form minimizer
// of the Tikhonov-regularized energy.
Matrix resolvent_apply(const SparseMatrix& laplacian, double mu, const Matrix& v,
                       const SolverConfig& config = {});

// Per-node (degree, ||x*_v||^2) table with Spearman correlations and the
// degree lower bound ||x*_v||^2 >= d_v * C checked for every node, where C
// is the squared projection of X0 onto the degree-scaled constant direction.
NodeDiagnostics degree_norm_report(const BipartiteGraph& graph, const Matrix& x_star,
                                   const Matrix& x0);

// Checks ||(AX - X)_v||^2 against the incident-edge discrepancy sum for all
// non-isolated nodes and reports the worst excess.
NodeDiagnostics verify_update_bound(const BipartiteGraph& graph, const Matrix& x);

}  // namespace tsp
