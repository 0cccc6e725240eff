#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tsp/embedding.hpp"
#include "tsp/errors.hpp"
#include "tsp/evaluation.hpp"
#include "tsp/interaction_data.hpp"
#include "tsp/pipeline.hpp"
#include "tsp/propagation.hpp"
#include "tsp/simplicial.hpp"
#include "tsp/spectral.hpp"

namespace py = pybind11;
using namespace tsp;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Test-time simplicial propagation for graph recommenders";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
    py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
    py::register_exception<CapacityError>(m, "CapacityError", PyExc_RuntimeError);
    py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);

    py::enum_<FileFormat>(m, "FileFormat")
        .value("csv", FileFormat::Csv)
        .value("tsv", FileFormat::Tsv);
    py::enum_<NodeScope>(m, "NodeScope")
        .value("all_nodes", NodeScope::AllNodes)
        .value("items_only", NodeScope::ItemsOnly);
    py::enum_<LiftingMode>(m, "LiftingMode")
        .value("unsigned_mean", LiftingMode::UnsignedMean)
        .value("signed_boundary", LiftingMode::SignedBoundary);

    py::class_<InteractionDataset>(m, "InteractionDataset")
        .def_readonly("num_users", &InteractionDataset::num_users)
        .def_readonly("num_items", &InteractionDataset::num_items)
        .def_readonly("interactions", &InteractionDataset::interactions)
        .def_readonly("train", &InteractionDataset::train)
        .def_readonly("valid", &InteractionDataset::valid)
        .def_readonly("test", &InteractionDataset::test)
        .def_readonly("has_split", &InteractionDataset::has_split)
        .def_readonly("item_popularity", &InteractionDataset::item_popularity)
        .def_readonly("user_ids", &InteractionDataset::user_ids)
        .def_readonly("item_ids", &InteractionDataset::item_ids);

    py::class_<BipartiteGraph>(m, "BipartiteGraph")
        .def_readonly("num_users", &BipartiteGraph::num_users)
        .def_readonly("num_items", &BipartiteGraph::num_items)
        .def_property_readonly("num_nodes", &BipartiteGraph::num_nodes)
        .def_readonly("adjacency", &BipartiteGraph::adjacency)
        .def_readonly("normalized_adjacency", &BipartiteGraph::normalized_adjacency)
        .def_readonly("normalized_laplacian", &BipartiteGraph::normalized_laplacian)
        .def_readonly("degrees", &BipartiteGraph::degrees);

    m.def("load_interactions", &load_interactions, py::arg("path"), py::arg("format"));
    m.def("unbiased_split", &unbiased_split, py::arg("dataset"), py::arg("train_frac"),
          py::arg("valid_frac"), py::arg("seed"));
    m.def("build_bipartite_graph", &build_bipartite_graph, py::arg("dataset"));
    m.def("tail_items", &tail_items, py::arg("dataset"), py::arg("fraction"));
    m.def("synthetic_biased_dataset", &synthetic_biased_dataset, py::arg("num_users"),
          py::arg("num_items"), py::arg("interactions_per_user"),
          py::arg("popularity_exponent"), py::arg("seed"));

    py::class_<EmbeddingMatrix>(m, "EmbeddingMatrix")
        .def_readonly("values", &EmbeddingMatrix::values)
        .def_readonly("initial", &EmbeddingMatrix::initial)
        .def_property_readonly("rows", &EmbeddingMatrix::rows)
        .def_property_readonly("dim", &EmbeddingMatrix::dim);

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("layers", &TrainConfig::layers)
        .def_readwrite("dim", &TrainConfig::dim)
        .def_readwrite("learning_rate", &TrainConfig::learning_rate)
        .def_readwrite("weight_decay", &TrainConfig::weight_decay)
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("max_epochs", &TrainConfig::max_epochs)
        .def_readwrite("patience", &TrainConfig::patience)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("init_scale", &TrainConfig::init_scale)
        .def_readwrite("eval_k", &TrainConfig::eval_k);

    py::class_<EpochStats>(m, "EpochStats")
        .def_readonly("epoch", &EpochStats::epoch)
        .def_readonly("loss", &EpochStats::loss)
        .def_readonly("valid_recall", &EpochStats::valid_recall);

    py::class_<TrainResult>(m, "TrainResult")
        .def_readonly("embeddings", &TrainResult::embeddings)
        .def_readonly("history", &TrainResult::history)
        .def_readonly("best_epoch", &TrainResult::best_epoch)
        .def_readonly("skipped_triples", &TrainResult::skipped_triples);

    m.def(
        "init_embeddings",
        [](Index n, Index d, std::uint64_t seed, double scale) {
            return init_embeddings(n, d, seed, scale).values;
        },
        py::arg("n"), py::arg("d"), py::arg("seed"), py::arg("scale"));
    m.def("propagate_layer", &propagate_layer, py::arg("graph"), py::arg("x"));
    m.def("lightgcn_forward", &lightgcn_forward, py::arg("graph"), py::arg("x0"),
          py::arg("layers"));
    m.def("bpr_train", &bpr_train, py::arg("dataset"), py::arg("graph"), py::arg("config"));
    m.def("score", &score, py::arg("x"), py::arg("num_users"), py::arg("user"), py::arg("item"));
    m.def("save_embeddings_binary", &save_embeddings_binary, py::arg("path"), py::arg("x"));
    m.def("load_embeddings_binary", &load_embeddings_binary, py::arg("path"));
    m.def("save_embeddings_csv", &save_embeddings_csv, py::arg("path"), py::arg("x"));
    m.def("load_embeddings_csv", &load_embeddings_csv, py::arg("path"));

    py::class_<EnergyConfig>(m, "EnergyConfig")
        .def(py::init<>())
        .def_readwrite("mu", &EnergyConfig::mu)
        .def_readwrite("eta", &EnergyConfig::eta)
        .def_readwrite("cg_tolerance", &EnergyConfig::cg_tolerance)
        .def_readwrite("cg_max_iters", &EnergyConfig::cg_max_iters);

    py::class_<NodeDiagnostics>(m, "NodeDiagnostics")
        .def_readonly("degree", &NodeDiagnostics::degree)
        .def_readonly("norm_sq", &NodeDiagnostics::norm_sq)
        .def_readonly("local_energy", &NodeDiagnostics::local_energy)
        .def_readonly("update_sq", &NodeDiagnostics::update_sq)
        .def_readonly("spearman_degree_norm", &NodeDiagnostics::spearman_degree_norm)
        .def_readonly("spearman_degree_energy", &NodeDiagnostics::spearman_degree_energy)
        .def_readonly("degenerate_degrees", &NodeDiagnostics::degenerate_degrees)
        .def_readonly("corollary_constant", &NodeDiagnostics::corollary_constant)
        .def_readonly("corollary_violations", &NodeDiagnostics::corollary_violations)
        .def_readonly("max_update_excess", &NodeDiagnostics::max_update_excess)
        .def_readonly("update_bound_violations", &NodeDiagnostics::update_bound_violations);

    m.def("graph_dirichlet_energy", &graph_dirichlet_energy, py::arg("graph"), py::arg("x"));
    m.def("local_dirichlet_energy", &local_dirichlet_energy, py::arg("graph"), py::arg("x"),
          py::arg("v"));
    m.def("energy_gradient", &energy_gradient, py::arg("graph"), py::arg("x"), py::arg("x0"),
          py::arg("config") = EnergyConfig{});
    m.def("gradient_descent_step", &gradient_descent_step, py::arg("graph"), py::arg("x"),
          py::arg("x0"), py::arg("config") = EnergyConfig{});
    m.def(
        "resolvent_apply",
        [](const SparseMatrix& laplacian, double mu, const Matrix& v, double tolerance,
           int max_iters) {
            return resolvent_apply(laplacian, mu, v, SolverConfig{tolerance, max_iters});
        },
        py::arg("laplacian"), py::arg("mu"), py::arg("v"), py::arg("tolerance") = 1e-10,
        py::arg("max_iters") = 10000);
    m.def("degree_norm_report", &degree_norm_report, py::arg("graph"), py::arg("x_star"),
          py::arg("x0"));
    m.def("verify_update_bound", &verify_update_bound, py::arg("graph"), py::arg("x"));

    py::class_<SemanticGraph>(m, "SemanticGraph")
        .def_readonly("adjacency", &SemanticGraph::adjacency)
        .def_readonly("theta", &SemanticGraph::theta)
        .def_readonly("scope", &SemanticGraph::scope)
        .def_readonly("node_ids", &SemanticGraph::node_ids)
        .def_property_readonly("num_vertices", &SemanticGraph::num_vertices)
        .def_property_readonly("num_edges", &SemanticGraph::num_edges);

    py::class_<SimplicialComplex>(m, "SimplicialComplex")
        .def_readonly("max_order", &SimplicialComplex::max_order)
        .def_readonly("simplices", &SimplicialComplex::simplices)
        .def_readonly("node_ids", &SimplicialComplex::node_ids)
        .def("count", &SimplicialComplex::count, py::arg("k"))
        .def("top_order", &SimplicialComplex::top_order)
        .def("content_hash", &SimplicialComplex::content_hash);

    py::class_<HodgeOperator>(m, "HodgeOperator")
        .def_readonly("order", &HodgeOperator::order)
        .def_readonly("matrix", &HodgeOperator::matrix)
        .def_readonly("spectral_radius", &HodgeOperator::spectral_radius)
        .def_property_readonly("dim", &HodgeOperator::dim);

    m.def("build_semantic_graph", &build_semantic_graph, py::arg("x"), py::arg("theta"),
          py::arg("scope") = NodeScope::AllNodes, py::arg("normalize") = true,
          py::arg("num_users") = 0, py::arg("max_edges") = std::size_t{50'000'000});
    m.def(
        "lift_clique_complex",
        [](const SemanticGraph& g, int max_order, std::size_t max_simplices) {
            return lift_clique_complex(g, max_order, max_simplices);
        },
        py::arg("graph"), py::arg("max_order"), py::arg("max_simplices") = std::size_t{2'000'000});
    m.def(
        "lift_clique_complex_from_adjacency",
        [](const SparseMatrix& adjacency, int max_order, std::size_t max_simplices) {
            return lift_clique_complex(adjacency, max_order, max_simplices);
        },
        py::arg("adjacency"), py::arg("max_order"),
        py::arg("max_simplices") = std::size_t{2'000'000});
    m.def("boundary_matrix",
          [](const SimplicialComplex& c, int k) { return SparseMatrix(boundary_matrix(c, k)); },
          py::arg("complex"), py::arg("k"));
    m.def("chain_complex_is_exact", &chain_complex_is_exact, py::arg("complex"));
    m.def("hodge_laplacian", &hodge_laplacian, py::arg("complex"), py::arg("k"));
    m.def("estimate_spectral_radius", &estimate_spectral_radius, py::arg("op"),
          py::arg("rel_tol") = 1e-3, py::arg("max_iters") = 20000, py::arg("seed") = 9001);
    m.def(
        "hodge_decompose",
        [](const SimplicialComplex& c, int k, const Vector& signal) {
            const HodgeComponents parts = hodge_decompose(c, k, signal);
            return py::make_tuple(parts.gradient, parts.curl, parts.harmonic);
        },
        py::arg("complex"), py::arg("k"), py::arg("signal"));

    py::class_<TSPConfig>(m, "TSPConfig")
        .def(py::init<>())
        .def_readwrite("theta", &TSPConfig::theta)
        .def_readwrite("beta", &TSPConfig::beta)
        .def_readwrite("layers", &TSPConfig::layers)
        .def_readwrite("max_order", &TSPConfig::max_order)
        .def_readwrite("mu", &TSPConfig::mu)
        .def_readwrite("lifting_mode", &TSPConfig::lifting_mode)
        .def_readwrite("normalize_similarity", &TSPConfig::normalize_similarity)
        .def_readwrite("scope", &TSPConfig::scope)
        .def_readwrite("max_edges", &TSPConfig::max_edges)
        .def_readwrite("max_simplices", &TSPConfig::max_simplices);

    py::class_<SimplexSignal>(m, "SimplexSignal")
        .def(py::init([](int order, const Matrix& values) {
                 return SimplexSignal{order, values};
             }),
             py::arg("order"), py::arg("values"))
        .def_readwrite("order", &SimplexSignal::order)
        .def_readwrite("values", &SimplexSignal::values);

    py::class_<OrderTrace>(m, "OrderTrace")
        .def_readonly("order", &OrderTrace::order)
        .def_readonly("simplex_count", &OrderTrace::simplex_count)
        .def_readonly("norm_before", &OrderTrace::norm_before)
        .def_readonly("norm_after", &OrderTrace::norm_after);

    py::class_<FusedEmbedding>(m, "FusedEmbedding")
        .def_readonly("values", &FusedEmbedding::values)
        .def_readonly("config_hash", &FusedEmbedding::config_hash)
        .def_readonly("complex_hash", &FusedEmbedding::complex_hash)
        .def_readonly("per_order", &FusedEmbedding::per_order);

    py::class_<ContractionReport>(m, "ContractionReport")
        .def_readonly("applicable", &ContractionReport::applicable)
        .def_readonly("trials", &ContractionReport::trials)
        .def_readonly("violations", &ContractionReport::violations)
        .def_readonly("worst_ratio", &ContractionReport::worst_ratio)
        .def_readonly("ratio_bound", &ContractionReport::ratio_bound)
        .def_readonly("lambda_min_positive", &ContractionReport::lambda_min_positive);

    m.def("lift_embeddings", &lift_embeddings, py::arg("complex"), py::arg("x0"), py::arg("k"),
          py::arg("mode"));
    m.def("inter_simplex_step", &inter_simplex_step, py::arg("op"), py::arg("beta"),
          py::arg("signal"));
    m.def("project_down", &project_down, py::arg("complex"), py::arg("signal"), py::arg("mode"),
          py::arg("num_rows"));
    m.def("tsp_run", &tsp_run, py::arg("complex"), py::arg("x0"), py::arg("config"));
    m.def(
        "simplicial_resolvent_apply",
        [](const HodgeOperator& op, double mu, const Matrix& v) {
            return simplicial_resolvent_apply(op, mu, v);
        },
        py::arg("op"), py::arg("mu"), py::arg("v"));
    m.def("verify_norm_contraction", &verify_norm_contraction, py::arg("op"), py::arg("mu"),
          py::arg("trials"), py::arg("seed"), py::arg("dense_cap") = 600);

    py::class_<EvalReport>(m, "EvalReport")
        .def_readonly("k", &EvalReport::k)
        .def_readonly("tail_fraction", &EvalReport::tail_fraction)
        .def_readonly("overall_recall", &EvalReport::overall_recall)
        .def_readonly("overall_ndcg", &EvalReport::overall_ndcg)
        .def_readonly("tail_recall", &EvalReport::tail_recall)
        .def_readonly("tail_ndcg", &EvalReport::tail_ndcg)
        .def_readonly("num_evaluated_users", &EvalReport::num_evaluated_users)
        .def_readonly("num_tail_evaluated_users", &EvalReport::num_tail_evaluated_users)
        .def("to_json", &EvalReport::to_json);

    m.def(
        "rank_topk",
        [](const Matrix& x, Index num_users, Index num_items, Index user, int k,
           const std::unordered_set<Index>& exclude) {
            return rank_topk(x, num_users, num_items, user, k, exclude);
        },
        py::arg("x"), py::arg("num_users"), py::arg("num_items"), py::arg("user"), py::arg("k"),
        py::arg("exclude") = std::unordered_set<Index>{});
    m.def("recall_at_k", &recall_at_k, py::arg("recommended"), py::arg("relevant"));
    m.def("ndcg_at_k", &ndcg_at_k, py::arg("recommended"), py::arg("relevant"));
    m.def("evaluate", &evaluate, py::arg("x"), py::arg("dataset"), py::arg("k"),
          py::arg("tail_fraction"));
}
