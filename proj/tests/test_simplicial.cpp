#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "support/oracles.hpp"
#include "support/test_helpers.hpp"
#include "tsp/errors.hpp"
#include "tsp/simplicial.hpp"

using namespace tsp;

TEST_CASE("build_semantic_graph thresholds pairwise inner products") {
    Matrix x(3, 2);
    x << 1, 0, 1, 0, 0, 1;
    const auto g = build_semantic_graph(x, 0.5, NodeScope::AllNodes, false);
    CHECK(g.num_edges() == 1);
    CHECK(Matrix(g.adjacency)(0, 1) == 1.0);
    CHECK(Matrix(g.adjacency)(0, 2) == 0.0);
    CHECK(Matrix(g.adjacency)(0, 0) == 0.0);  // no self loops
}

TEST_CASE("build_semantic_graph with a threshold above every similarity is empty") {
    const Matrix x = testing::random_matrix(10, 4, 3);
    const double max_ip = (x * x.transpose()).maxCoeff();
    const auto g = build_semantic_graph(x, max_ip + 1.0, NodeScope::AllNodes, false);
    CHECK(g.num_edges() == 0);

    // cosine similarity never exceeds 1
    const auto cg = build_semantic_graph(x, 1.0 + 1e-9, NodeScope::AllNodes, true);
    CHECK(cg.num_edges() == 0);
}

TEST_CASE("build_semantic_graph enforces the edge budget") {
    Matrix x = Matrix::Ones(4, 2);
    CHECK_THROWS_AS(build_semantic_graph(x, 0.5, NodeScope::AllNodes, false, 0, 2),
                    CapacityError);
}

TEST_CASE("build_semantic_graph items-only scope maps vertices to item rows") {
    Matrix x = Matrix::Ones(5, 2);
    const auto g = build_semantic_graph(x, 0.5, NodeScope::ItemsOnly, true, 2);
    CHECK(g.num_vertices() == 3);
    CHECK(g.node_ids == std::vector<Index>{2, 3, 4});
    CHECK(g.num_edges() == 3);  // identical rows: complete graph on 3 items
}

TEST_CASE("lift_clique_complex on a triangle") {
    const auto complex = lift_clique_complex(testing::triangle_adjacency(), 2);
    CHECK(complex.count(0) == 3);
    CHECK(complex.count(1) == 3);
    CHECK(complex.count(2) == 1);
    CHECK(complex.top_order() == 2);
    CHECK(complex.simplices[2][0] == std::vector<Index>{0, 1, 2});
}

TEST_CASE("lift_clique_complex caps the order on a 4-clique") {
    SparseMatrix adj = testing::adjacency_from_edges(
        4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
    const auto complex = lift_clique_complex(adj, 2);
    CHECK(complex.count(0) == 4);
    CHECK(complex.count(1) == 6);   // C(4,2)
    CHECK(complex.count(2) == 4);   // C(4,3)
    CHECK(static_cast<int>(complex.simplices.size()) == 3);  // no tetrahedron bucket
}

TEST_CASE("lift_clique_complex of a tree has nothing above order 1") {
    SparseMatrix adj = testing::adjacency_from_edges(6, {{0, 1}, {0, 2}, {1, 3}, {1, 4}, {2, 5}});
    const auto complex = lift_clique_complex(adj, 4);
    CHECK(complex.count(1) == 5);
    CHECK(complex.top_order() == 1);
}

TEST_CASE("lift_clique_complex is deterministic and face-closed") {
    const auto adj = testing::random_adjacency(14, 0.4, 5);
    const auto a = lift_clique_complex(adj, 3);
    const auto b = lift_clique_complex(adj, 3);
    CHECK(a.content_hash() == b.content_hash());
    CHECK(a.simplices == b.simplices);

    // closure: every (k-1)-face of every stored simplex is stored
    for (int k = 1; k <= a.top_order(); ++k) {
        for (const auto& tuple : a.simplices[static_cast<std::size_t>(k)]) {
            for (std::size_t omit = 0; omit < tuple.size(); ++omit) {
                std::vector<Index> face;
                for (std::size_t i = 0; i < tuple.size(); ++i) {
                    if (i != omit) face.push_back(tuple[i]);
                }
                const auto& faces = a.simplices[static_cast<std::size_t>(k) - 1];
                CHECK(std::binary_search(faces.begin(), faces.end(), face));
            }
        }
    }

    // lists are lexicographically sorted
    for (const auto& order : a.simplices) {
        CHECK(std::is_sorted(order.begin(), order.end()));
    }
}

TEST_CASE("lift_clique_complex enforces the simplex budget with counts") {
    const auto adj = testing::random_adjacency(20, 0.8, 9);
    CHECK_THROWS_AS(lift_clique_complex(adj, 4, 50), CapacityError);
    try {
        lift_clique_complex(adj, 4, 50);
    } catch (const CapacityError& e) {
        CHECK(std::string(e.what()).find("per-order counts") != std::string::npos);
    }
}

TEST_CASE("boundary matrices follow the ascending-tuple omission rule") {
    const auto complex = lift_clique_complex(testing::triangle_adjacency(), 2);

    // edges in lexicographic order: {0,1}, {0,2}, {1,2}
    const Matrix b1 = Matrix(boundary_matrix(complex, 1));
    CHECK(b1(0, 0) == -1.0);  // edge {0,1}: -1 at vertex 0
    CHECK(b1(1, 0) == 1.0);   //             +1 at vertex 1
    CHECK(b1(2, 0) == 0.0);

    // triangle column: +1 on {1,2}, -1 on {0,2}, +1 on {0,1}
    const Matrix b2 = Matrix(boundary_matrix(complex, 2));
    CHECK(b2(0, 0) == 1.0);
    CHECK(b2(1, 0) == -1.0);
    CHECK(b2(2, 0) == 1.0);

    // chain identity on the triangle, and out-of-range access
    CHECK((b1 * b2).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(boundary_matrix(complex, 3), ShapeError);
    CHECK_THROWS_AS(boundary_matrix(complex, 0), ShapeError);
}

TEST_CASE("every boundary column has k+1 alternating-sign entries") {
    const auto adj = testing::random_adjacency(12, 0.5, 11);
    const auto complex = lift_clique_complex(adj, 3);
    for (int k = 1; k <= complex.top_order(); ++k) {
        const SparseMatrix& b = boundary_matrix(complex, k);
        for (Index c = 0; c < b.outerSize(); ++c) {
            int nonzeros = 0;
            for (SparseMatrix::InnerIterator it(b, c); it; ++it) {
                CHECK(std::abs(it.value()) == 1.0);
                ++nonzeros;
            }
            CHECK(nonzeros == k + 1);
        }
    }
}

TEST_CASE("chain complex identity holds exactly on random lifted complexes") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const auto adj = testing::random_adjacency(10 + static_cast<Index>(seed), 0.45, seed);
        const auto complex = lift_clique_complex(adj, 3);
        CHECK(chain_complex_is_exact(complex));
    }
}

TEST_CASE("hodge laplacians of the triangle") {
    const auto complex = lift_clique_complex(testing::triangle_adjacency(), 2);

    Matrix l0_expected(3, 3);
    l0_expected << 2, -1, -1, -1, 2, -1, -1, -1, 2;
    CHECK((Matrix(hodge_laplacian(complex, 0).matrix) - l0_expected).cwiseAbs().maxCoeff() == 0.0);

    const Matrix l1 = Matrix(hodge_laplacian(complex, 1).matrix);
    CHECK((l1 - 3.0 * Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);

    // top order on this complex: L_2 = B_2^T B_2 = [3]
    const Matrix l2 = Matrix(hodge_laplacian(complex, 2).matrix);
    CHECK(l2(0, 0) == 3.0);
    CHECK_THROWS_AS(hodge_laplacian(complex, 3), ShapeError);
}

TEST_CASE("top-order laplacian uses only the lower term") {
    // triangle lifted with K = 1: no 2-simplices, so L_1 = B_1^T B_1
    const auto complex = lift_clique_complex(testing::triangle_adjacency(), 1);
    Matrix expected(3, 3);
    expected << 2, 1, -1, 1, 2, 1, -1, 1, 2;
    CHECK((Matrix(hodge_laplacian(complex, 1).matrix) - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("L0 equals the unnormalized graph laplacian D - A") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto adj = testing::random_adjacency(15, 0.35, seed + 20);
        const auto complex = lift_clique_complex(adj, 3);
        const Matrix a = Matrix(adj);
        Matrix d = Matrix::Zero(a.rows(), a.cols());
        for (Index v = 0; v < a.rows(); ++v) d(v, v) = a.row(v).sum();
        const Matrix l0 = Matrix(hodge_laplacian(complex, 0).matrix);
        CHECK((l0 - (d - a)).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("hodge operators are symmetric and positive semidefinite") {
    const auto adj = testing::random_adjacency(12, 0.5, 33);
    const auto complex = lift_clique_complex(adj, 3);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int k = 0; k <= complex.top_order(); ++k) {
        const auto op = hodge_laplacian(complex, k);
        const Matrix m = Matrix(op.matrix);
        CHECK((m - m.transpose()).cwiseAbs().maxCoeff() == 0.0);
        for (int t = 0; t < 20; ++t) {
            Vector v(op.dim());
            for (Index i = 0; i < op.dim(); ++i) v[i] = normal(rng);
            CHECK(v.dot(op.matrix * v) >= -1e-9);
        }
    }
}

TEST_CASE("hodge_decompose recovers a pure gradient signal") {
    const auto adj = testing::random_adjacency(10, 0.5, 44);
    const auto complex = lift_clique_complex(adj, 2);
    REQUIRE(complex.count(1) > 0);
    const Vector y = testing::random_matrix(complex.count(0), 1, 7).col(0);
    const Vector signal = SparseMatrix(boundary_matrix(complex, 1).transpose()) * y;
    const auto parts = hodge_decompose(complex, 1, signal);
    CHECK(parts.curl.norm() < 1e-8 * std::max(1.0, signal.norm()));
    CHECK(parts.harmonic.norm() < 1e-8 * std::max(1.0, signal.norm()));
    CHECK((parts.gradient - signal).norm() < 1e-8 * std::max(1.0, signal.norm()));
}

TEST_CASE("hodge_decompose identifies the triangle curl direction") {
    const auto complex = lift_clique_complex(testing::triangle_adjacency(), 2);
    Vector signal(3);
    signal << 1.0, -1.0, 1.0;  // the B_2 column
    const auto parts = hodge_decompose(complex, 1, signal);
    CHECK(parts.gradient.norm() < 1e-9);
    CHECK(parts.harmonic.norm() < 1e-9);
    CHECK((parts.curl - signal).norm() < 1e-9);
}

TEST_CASE("hodge_decompose harmonic part matches the dense kernel projector") {
    const auto complex = lift_clique_complex(testing::hollow_square_adjacency(), 2);
    REQUIRE(complex.count(1) == 4);
    REQUIRE(complex.count(2) == 0);

    const auto op = hodge_laplacian(complex, 1);
    CHECK(harmonic_dimension(op).value() == 1);

    const Vector signal = testing::random_matrix(4, 1, 55).col(0);
    const auto parts = hodge_decompose(complex, 1, signal);
    const Vector oracle = testing::dense_kernel_projection(Matrix(op.matrix), signal);
    CHECK((parts.harmonic - oracle).norm() < 1e-8);
    CHECK((op.matrix * parts.harmonic).norm() < 1e-8);
}

TEST_CASE("hodge_decompose components are orthogonal and reconstruct") {
    std::mt19937_64 rng(66);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto adj = testing::random_adjacency(11, 0.5, seed + 70);
        const auto complex = lift_clique_complex(adj, 3);
        if (complex.top_order() < 2) continue;
        for (int rep = 0; rep < 10; ++rep) {
            Vector signal(complex.count(1));
            for (Index i = 0; i < signal.size(); ++i) signal[i] = normal(rng);
            const auto parts = hodge_decompose(complex, 1, signal);
            const double scale = std::max(1.0, signal.squaredNorm());
            CHECK(std::abs(parts.gradient.dot(parts.curl)) <= 1e-8 * scale);
            CHECK(std::abs(parts.gradient.dot(parts.harmonic)) <= 1e-8 * scale);
            CHECK(std::abs(parts.curl.dot(parts.harmonic)) <= 1e-8 * scale);
            CHECK((parts.gradient + parts.curl + parts.harmonic - signal).norm() <=
                  1e-8 * std::max(1.0, signal.norm()));
            const auto op = hodge_laplacian(complex, 1);
            CHECK((op.matrix * parts.harmonic).norm() < 1e-7);
        }
    }
}

TEST_CASE("estimate_spectral_radius on known operators") {
    const auto complex = lift_clique_complex(testing::triangle_adjacency(), 2);
    auto op = hodge_laplacian(complex, 1);
    const double radius = estimate_spectral_radius(op);
    CHECK(radius == doctest::Approx(3.0).epsilon(1e-3));
    CHECK(op.spectral_radius == radius);

    // complex with only vertices: zero laplacian
    SparseMatrix empty(5, 5);
    auto zero_op = hodge_laplacian(lift_clique_complex(empty, 2), 0);
    CHECK(estimate_spectral_radius(zero_op) == 0.0);
}

TEST_CASE("estimate_spectral_radius tracks the dense maximum eigenvalue") {
    const auto adj = testing::random_adjacency(8, 0.6, 91);
    const auto complex = lift_clique_complex(adj, 2);
    auto op = hodge_laplacian(complex, 1);
    REQUIRE(op.dim() >= 10);
    const double estimate = estimate_spectral_radius(op);
    Eigen::SelfAdjointEigenSolver<Matrix> eigen(Matrix(op.matrix));
    const double exact = eigen.eigenvalues().maxCoeff();
    CHECK(std::abs(estimate - exact) / exact < 0.005);
}

TEST_CASE("complex manifest and boundary triplets are written") {
    const auto complex = lift_clique_complex(testing::triangle_adjacency(), 2);
    const auto dir = std::filesystem::temp_directory_path();
    const std::string manifest = (dir / "tsp_complex.json").string();
    const std::string triplets = (dir / "tsp_b2.txt").string();
    write_complex_manifest(complex, 0.5, manifest);
    write_boundary_triplets(complex, 2, triplets);

    std::ifstream in(manifest);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(content.find("\"simplex_counts\"") != std::string::npos);
    CHECK(content.find(complex.content_hash()) != std::string::npos);

    std::ifstream tin(triplets);
    std::string line;
    int rows = 0;
    while (std::getline(tin, line)) ++rows;
    CHECK(rows == 3);
    std::remove(manifest.c_str());
    std::remove(triplets.c_str());
}
