#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tsp/types.hpp"

namespace tsp {

// Tolerance policy shared by every iterative solve in the library.
struct SolverConfig {
    double tolerance = 1e-10;  // relative residual target
    int max_iters = 10000;
};

using LinearOperator = std::function<Vector(const Vector&)>;

// Conjugate gradients for a symmetric positive (semi)definite operator.
// Solves op(x) = rhs to ||op(x) - rhs|| <= tolerance * ||rhs||.  The rhs
// must lie in the range of the operator when it is singular.  Throws
// ConvergenceError when the iteration cap is reached first.
Vector cg_solve(const LinearOperator& op, const Vector& rhs,
                const SolverConfig& config, const std::string& context);

// Column-wise variant for multiple right-hand sides.
Matrix cg_solve(const LinearOperator& op, const Matrix& rhs,
                const SolverConfig& config, const std::string& context);

// Largest-eigenvalue estimate of a symmetric PSD operator by power
// iteration, converged to |change| <= rel_tol * value.  Returns 0 for the
// zero operator.
double power_iteration(const LinearOperator& op, Index dim, double rel_tol = 1e-3,
                       int max_iters = 10000, std::uint64_t seed = 12345);

// Spearman rank correlation with average ranks on ties.  When either input
// is constant the correlation is undefined; 0 is returned and *degenerate
// (if given) is set.
double spearman_rank_correlation(const std::vector<double>& a,
                                 const std::vector<double>& b,
                                 bool* degenerate = nullptr);

// FNV-1a content hashing, used for config/artifact provenance stamps.
class Fnv1a {
public:
    Fnv1a& update(const void* data, std::size_t size);
    Fnv1a& update(const std::string& s) { return update(s.data(), s.size()); }
    Fnv1a& update(std::uint64_t v);
    Fnv1a& update(double v);
    std::uint64_t value() const { return state_; }
    std::string hex() const;

private:
    std::uint64_t state_ = 1469598103934665603ull;
};

std::string hash_file(const std::string& path);

}  // namespace tsp
