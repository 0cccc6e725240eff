#include "tsp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>

#include "tsp/errors.hpp"

namespace tsp {

Vector cg_solve(const LinearOperator& op, const Vector& rhs,
                const SolverConfig& config, const std::string& context) {
    const double rhs_norm = rhs.norm();
    Vector x = Vector::Zero(rhs.size());
    if (rhs_norm == 0.0) return x;

    const double target = config.tolerance * rhs_norm;
    Vector r = rhs;  // residual for x = 0
    Vector p = r;
    double rs_old = r.squaredNorm();
    if (std::sqrt(rs_old) <= target) return x;

    for (int iter = 0; iter < config.max_iters; ++iter) {
        Vector ap = op(p);
        const double pap = p.dot(ap);
        if (pap <= 0.0) {
            // Direction annihilated by a singular operator: the remaining
            // residual is outside the range, nothing more can be reduced.
            break;
        }
        const double alpha = rs_old / pap;
        x += alpha * p;
        r -= alpha * ap;
        const double rs_new = r.squaredNorm();
        if (std::sqrt(rs_new) <= target) return x;
        p = r + (rs_new / rs_old) * p;
        rs_old = rs_new;
    }
    throw ConvergenceError(context + ": conjugate gradient did not reach tolerance " +
                               std::to_string(config.tolerance) + ", residual " +
                               std::to_string(std::sqrt(rs_old) / rhs_norm),
                           std::sqrt(rs_old) / rhs_norm);
}

Matrix cg_solve(const LinearOperator& op, const Matrix& rhs,
                const SolverConfig& config, const std::string& context) {
    Matrix out(rhs.rows(), rhs.cols());
    for (Index c = 0; c < rhs.cols(); ++c) {
        out.col(c) = cg_solve(op, Vector(rhs.col(c)), config,
                              context + " [column " + std::to_string(c) + "]");
    }
    return out;
}

double power_iteration(const LinearOperator& op, Index dim, double rel_tol,
                       int max_iters, std::uint64_t seed) {
    if (dim == 0) return 0.0;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector v(dim);
    for (Index i = 0; i < dim; ++i) v[i] = normal(rng);
    v.normalize();

    double estimate = 0.0;
    for (int iter = 0; iter < max_iters; ++iter) {
        Vector w = op(v);
        const double norm = w.norm();
        if (norm == 0.0) return 0.0;
        const double next = v.dot(w);  // Rayleigh quotient
        v = w / norm;
        if (iter > 0 && std::abs(next - estimate) <= rel_tol * std::abs(next)) {
            return next;
        }
        estimate = next;
    }
    return estimate;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double rank = 0.5 * static_cast<double>(i + j) + 1.0;  // average, 1-based
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double spearman_rank_correlation(const std::vector<double>& a,
                                 const std::vector<double>& b,
                                 bool* degenerate) {
    if (degenerate) *degenerate = false;
    if (a.size() != b.size()) throw ShapeError("spearman: size mismatch");
    const std::size_t n = a.size();
    if (n < 2) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    std::vector<double> ra = average_ranks(a);
    std::vector<double> rb = average_ranks(b);
    const double mean = 0.5 * static_cast<double>(n + 1);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = ra[i] - mean;
        const double dy = rb[i] - mean;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    return sxy / std::sqrt(sxx * syy);
}

Fnv1a& Fnv1a::update(const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        state_ ^= bytes[i];
        state_ *= 1099511628211ull;
    }
    return *this;
}

Fnv1a& Fnv1a::update(std::uint64_t v) { return update(&v, sizeof(v)); }

Fnv1a& Fnv1a::update(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    return update(bits);
}

std::string Fnv1a::hex() const {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    std::uint64_t v = state_;
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

std::string hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open file for hashing: " + path);
    Fnv1a h;
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        h.update(buf, static_cast<std::size_t>(in.gcount()));
    }
    return h.hex();
}

}  // namespace tsp
