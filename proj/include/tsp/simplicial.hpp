#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tsp/linalg.hpp"
#include "tsp/types.hpp"

namespace tsp {

enum class NodeScope { AllNodes, ItemsOnly };

// Thresholded inner-product graph over embedding rows.  node_ids maps each
// semantic vertex back to its embedding row (identity for AllNodes scope).
struct SemanticGraph {
    SparseMatrix adjacency;  // symmetric 0/1, zero diagonal
    double theta = 0.0;
    NodeScope scope = NodeScope::AllNodes;
    std::vector<Index> node_ids;

    Index num_vertices() const { return adjacency.rows(); }
    std::size_t num_edges() const { return static_cast<std::size_t>(adjacency.nonZeros()) / 2; }
};

// Clique complex: simplices per order as strictly ascending vertex tuples in
// lexicographic order, plus the signed boundary matrices B_k.  Signs follow
// the face-omission rule on the ascending tuples: the face dropping the i-th
// vertex carries (-1)^i.
struct SimplicialComplex {
    int max_order = 0;  // requested cap K
    std::vector<std::vector<std::vector<Index>>> simplices;  // [k] -> tuples
    std::vector<SparseMatrix> boundaries;  // [k] = B_k for k >= 1; [0] empty
    std::vector<Index> node_ids;           // vertex -> embedding row

    Index count(int k) const {
        return k >= 0 && k < static_cast<int>(simplices.size())
                   ? static_cast<Index>(simplices[static_cast<std::size_t>(k)].size())
                   : 0;
    }
    // Highest order that actually has simplices.
    int top_order() const;
    std::string content_hash() const;
};

// Hodge Laplacian of one order, carrying its boundary factors so that
// downstream checks can project onto/off the harmonic space.
struct HodgeOperator {
    int order = 0;
    SparseMatrix matrix;  // L_k
    SparseMatrix lower;   // B_k   (0x0 when k = 0)
    SparseMatrix upper;   // B_{k+1} (0x0 at the top order)
    double spectral_radius = -1.0;  // < 0 until estimated

    Index dim() const { return matrix.rows(); }
};

struct HodgeComponents {
    Vector gradient;
    Vector curl;
    Vector harmonic;
};

// Pairwise thresholding of X (cosine similarity when normalize is set).
// ItemsOnly scope restricts vertices to rows >= num_users.  Throws
// CapacityError when the edge count would exceed max_edges.
SemanticGraph build_semantic_graph(const Matrix& x, double theta, NodeScope scope,
                                   bool normalize, Index num_users = 0,
                                   std::size_t max_edges = 50'000'000);

// Clique complex of the semantic graph with simplices up to order K
// (cliques of size K+1).  Enumeration is depth-first over ascending
// neighbor lists, so the output ordering is canonical.
SimplicialComplex lift_clique_complex(const SemanticGraph& graph, int max_order,
                                      std::size_t max_simplices = 2'000'000);

// Same lifting for a bare symmetric 0/1 adjacency (test instances, unions).
SimplicialComplex lift_clique_complex(const SparseMatrix& adjacency, int max_order,
                                      std::size_t max_simplices = 2'000'000);

// Signed boundary matrix accessor, 1 <= k <= top order.
const SparseMatrix& boundary_matrix(const SimplicialComplex& complex, int k);

// B_k * B_{k+1} == 0 for every consecutive pair, checked in 64-bit integer
// arithmetic on the +-1 entries.
bool chain_complex_is_exact(const SimplicialComplex& complex);

// L_0 = B1 B1^T, top order L_K = B_K^T B_K, otherwise both terms.
HodgeOperator hodge_laplacian(const SimplicialComplex& complex, int k);

// Power-iteration estimate of the top eigenvalue, stored on the operator.
double estimate_spectral_radius(HodgeOperator& op, double rel_tol = 1e-3,
                                int max_iters = 20000, std::uint64_t seed = 9001);

// Count of near-zero eigenvalues via dense decomposition; only available on
// small operators (dim <= cap).
std::optional<Index> harmonic_dimension(const HodgeOperator& op, Index dense_cap = 600,
                                        double zero_tol = 1e-9);

// Orthogonal split of a k-simplex signal into im(B_k^T), im(B_{k+1}) and the
// harmonic remainder via normal-equation conjugate gradient solves.
HodgeComponents hodge_decompose(const SimplicialComplex& complex, int k, const Vector& signal,
                                const SolverConfig& config = {1e-12, 20000});

// JSON manifest with per-order counts and the content hash.
void write_complex_manifest(const SimplicialComplex& complex, double theta,
                            const std::string& path);

// Coordinate triplet export "row col sign" for one boundary matrix.
void write_boundary_triplets(const SimplicialComplex& complex, int k, const std::string& path);

}  // namespace tsp
