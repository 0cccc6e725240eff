#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "tsp/linalg.hpp"
#include "tsp/simplicial.hpp"
#include "tsp/types.hpp"

namespace tsp {

enum class LiftingMode { UnsignedMean, SignedBoundary };

struct TSPConfig {
    double theta = 0.5;   // semantic similarity threshold
    double beta = 0.1;    // simplicial filter coefficient
    int layers = 2;       // inter-simplex propagation depth L
    int max_order = 3;    // complex dimension cap K
    double mu = 1.0;      // resolvent weight, verification operations only
    LiftingMode lifting_mode = LiftingMode::UnsignedMean;
    bool normalize_similarity = true;
    NodeScope scope = NodeScope::AllNodes;
    std::size_t max_edges = 50'000'000;
    std::size_t max_simplices = 2'000'000;

    void validate() const;
    std::string hash() const;
};

// Embeddings attached to the k-simplices of a complex.
struct SimplexSignal {
    int order = 0;
    Matrix values;  // N_k x d
};

struct OrderTrace {
    int order = 0;
    Index simplex_count = 0;
    double norm_before = 0.0;  // Frobenius norm of the lifted signal
    double norm_after = 0.0;   // after L propagation steps
};

struct FusedEmbedding {
    Matrix values;
    std::string config_hash;
    std::string complex_hash;
    std::vector<OrderTrace> per_order;
};

struct ContractionReport {
    bool applicable = false;  // false when the operator has no positive spectrum
    int trials = 0;
    Index violations = 0;     // test vectors with ||Rv|| >= ||v||
    double worst_ratio = 0.0; // max ||Rv||^2 / ||v||^2 over trials
    double ratio_bound = std::numeric_limits<double>::quiet_NaN();  // (mu/(lambda_min+ + mu))^2
    double lambda_min_positive = std::numeric_limits<double>::quiet_NaN();
};

// Node embeddings -> k-simplex signal.  SignedBoundary applies the boundary
// transposes (B_k^T ... B_1^T) X; UnsignedMean averages the component node
// rows of each simplex.
SimplexSignal lift_embeddings(const SimplicialComplex& complex, const Matrix& x0, int k,
                              LiftingMode mode);

// One filter step (I - beta L_k) S.  Requires beta * lambda_max < 2; the
// spectral radius estimate is computed on demand when the operator does not
// carry one yet.
SimplexSignal inter_simplex_step(const HodgeOperator& op, double beta,
                                 const SimplexSignal& signal);

// k-simplex signal -> node embeddings.  SignedBoundary applies B_1 ... B_k;
// UnsignedMean gives each component node the simplex row and divides by the
// node's incident k-simplex count (nodes in no k-simplex receive zero).
Matrix project_down(const SimplicialComplex& complex, const SimplexSignal& signal,
                    LiftingMode mode, Index num_rows);

// Full test-time pipeline over one complex: lift each order, propagate L
// steps per order (order 0 included), project down, fuse as
// X0 + Mean(X_{0<-1}, ..., X_{0<-K}).
FusedEmbedding tsp_run(const SimplicialComplex& complex, const Matrix& x0,
                       const TSPConfig& config);

// mu (L_k + mu I)^{-1} V, same solver contract as the graph resolvent.
Matrix simplicial_resolvent_apply(const HodgeOperator& op, double mu, const Matrix& v,
                                  const SolverConfig& config = {});

// Samples random signals, removes their harmonic component, applies the
// resolvent and verifies the strict norm contraction, reporting the worst
// squared ratio against the spectral bound (computed densely on small
// operators).
ContractionReport verify_norm_contraction(const HodgeOperator& op, double mu, int trials,
                                          std::uint64_t seed, Index dense_cap = 600);

}  // namespace tsp
