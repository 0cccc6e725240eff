#include "tsp/pipeline.hpp"

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "tsp/errors.hpp"
#include "tsp/evaluation.hpp"
#include "tsp/spectral.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace tsp {

namespace {

json read_json(const std::string& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw ConfigError(std::string("cannot open ") + what + ": " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid JSON in ") + what + " (" + path + "): " + e.what());
    }
    return j;
}

template <typename T>
T field_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("config field '") + key + "' has the wrong type");
    }
}

}  // namespace

PipelineConfig PipelineConfig::load(const std::string& path) {
    const json j = read_json(path, "config");
    PipelineConfig c;

    if (j.contains("dataset")) {
        const json& d = j.at("dataset");
        c.dataset_path = field_or<std::string>(d, "path", "");
        const auto format = field_or<std::string>(d, "format", "csv");
        if (format == "csv") {
            c.dataset_format = FileFormat::Csv;
        } else if (format == "tsv") {
            c.dataset_format = FileFormat::Tsv;
        } else {
            throw ConfigError("dataset.format must be 'csv' or 'tsv', got '" + format + "'");
        }
    }
    if (j.contains("split")) {
        const json& s = j.at("split");
        c.train_frac = field_or<double>(s, "train_frac", c.train_frac);
        c.valid_frac = field_or<double>(s, "valid_frac", c.valid_frac);
        c.split_seed = field_or<std::uint64_t>(s, "seed", c.split_seed);
    }
    if (j.contains("train")) {
        const json& t = j.at("train");
        c.train.layers = field_or<int>(t, "layers", c.train.layers);
        c.train.dim = field_or<Index>(t, "dim", c.train.dim);
        c.train.learning_rate = field_or<double>(t, "learning_rate", c.train.learning_rate);
        c.train.weight_decay = field_or<double>(t, "weight_decay", c.train.weight_decay);
        c.train.batch_size = field_or<int>(t, "batch_size", c.train.batch_size);
        c.train.max_epochs = field_or<int>(t, "max_epochs", c.train.max_epochs);
        c.train.patience = field_or<int>(t, "patience", c.train.patience);
        c.train.seed = field_or<std::uint64_t>(t, "seed", c.train.seed);
        c.train.init_scale = field_or<double>(t, "init_scale", c.train.init_scale);
    }
    if (j.contains("tsp")) {
        const json& t = j.at("tsp");
        c.tsp.theta = field_or<double>(t, "theta", c.tsp.theta);
        c.tsp.beta = field_or<double>(t, "beta", c.tsp.beta);
        c.tsp.layers = field_or<int>(t, "layers", c.tsp.layers);
        c.tsp.max_order = field_or<int>(t, "max_order", c.tsp.max_order);
        c.tsp.mu = field_or<double>(t, "mu", c.tsp.mu);
        c.tsp.normalize_similarity = field_or<bool>(t, "normalize", c.tsp.normalize_similarity);
        const auto mode = field_or<std::string>(t, "mode", "unsigned");
        if (mode == "unsigned") {
            c.tsp.lifting_mode = LiftingMode::UnsignedMean;
        } else if (mode == "signed") {
            c.tsp.lifting_mode = LiftingMode::SignedBoundary;
        } else {
            throw ConfigError("tsp.mode must be 'unsigned' or 'signed', got '" + mode + "'");
        }
        const auto scope = field_or<std::string>(t, "scope", "all");
        if (scope == "all") {
            c.tsp.scope = NodeScope::AllNodes;
        } else if (scope == "items") {
            c.tsp.scope = NodeScope::ItemsOnly;
        } else {
            throw ConfigError("tsp.scope must be 'all' or 'items', got '" + scope + "'");
        }
        c.tsp.max_edges = field_or<std::size_t>(t, "max_edges", c.tsp.max_edges);
        c.tsp.max_simplices = field_or<std::size_t>(t, "max_simplices", c.tsp.max_simplices);
    }
    if (j.contains("eval")) {
        const json& e = j.at("eval");
        c.eval_k = field_or<int>(e, "k", c.eval_k);
        c.tail_fraction = field_or<double>(e, "tail_fraction", c.tail_fraction);
    }
    c.output_dir = field_or<std::string>(j, "output_dir", c.output_dir);
    return c;
}

void PipelineConfig::validate() const {
    if (dataset_path.empty()) throw ConfigError("dataset.path is required");
    if (!(train_frac > 0.0 && train_frac < 1.0)) throw ConfigError("split.train_frac must be in (0,1)");
    if (!(valid_frac > 0.0 && valid_frac < 1.0)) throw ConfigError("split.valid_frac must be in (0,1)");
    if (train_frac + valid_frac >= 1.0) throw ConfigError("split fractions must sum below 1");
    train.validate();
    tsp.validate();
    if (eval_k < 1) throw ConfigError("eval.k must be >= 1");
    if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) {
        throw ConfigError("eval.tail_fraction must be in (0,1]");
    }
    if (output_dir.empty()) throw ConfigError("output_dir is required");
}

std::string PipelineConfig::hash() const {
    Fnv1a h;
    h.update(dataset_path);
    h.update(static_cast<std::uint64_t>(dataset_format == FileFormat::Csv ? 0 : 1));
    h.update(train_frac).update(valid_frac).update(split_seed);
    h.update(static_cast<std::uint64_t>(train.layers)).update(static_cast<std::uint64_t>(train.dim));
    h.update(train.learning_rate).update(train.weight_decay);
    h.update(static_cast<std::uint64_t>(train.batch_size));
    h.update(static_cast<std::uint64_t>(train.max_epochs));
    h.update(static_cast<std::uint64_t>(train.patience));
    h.update(train.seed).update(train.init_scale);
    h.update(tsp.hash());
    h.update(static_cast<std::uint64_t>(eval_k)).update(tail_fraction);
    return h.hex();
}

namespace {

std::string out_path(const PipelineConfig& c, const char* name) {
    return (fs::path(c.output_dir) / name).string();
}

// run.json registry: artifact name -> {path, hash, producer}
json load_registry(const PipelineConfig& c) {
    const std::string path = out_path(c, artifact::kRegistry);
    if (!fs::exists(path)) return json::object();
    return read_json(path, "run registry");
}

void register_artifact(const PipelineConfig& c, json& registry, const char* name,
                       const char* producer) {
    const std::string path = out_path(c, name);
    registry[name] = {{"path", path}, {"hash", hash_file(path)}, {"producer", producer}};
}

void save_registry(const PipelineConfig& c, const json& registry) {
    std::ofstream out(out_path(c, artifact::kRegistry));
    if (!out) throw ConfigError("cannot write run registry in " + c.output_dir);
    out << registry.dump(2) << "\n";
}

// Verifies an upstream artifact exists and still matches its recorded hash.
std::string require_artifact(const PipelineConfig& c, const json& registry, const char* name,
                             const char* producer_cmd) {
    const std::string path = out_path(c, name);
    if (!registry.contains(name) || !fs::exists(path)) {
        throw ConfigError(std::string("missing artifact '") + name + "': run `tsp " +
                          producer_cmd + "` first");
    }
    const std::string recorded = registry.at(name).at("hash").get<std::string>();
    const std::string actual = hash_file(path);
    if (recorded != actual) {
        throw ConfigError(std::string("artifact '") + name +
                          "' does not match the run registry (stale or modified); rerun `tsp " +
                          producer_cmd + "`");
    }
    return path;
}

void ensure_output_dir(const PipelineConfig& c) {
    std::error_code ec;
    fs::create_directories(c.output_dir, ec);
    if (ec) throw ConfigError("cannot create output directory: " + c.output_dir);
}

SimplicialComplex build_complex_from_embeddings(const PipelineConfig& c, const Matrix& values,
                                                std::size_t num_users) {
    const SemanticGraph semantic =
        build_semantic_graph(values, c.tsp.theta, c.tsp.scope, c.tsp.normalize_similarity,
                             static_cast<Index>(num_users), c.tsp.max_edges);
    return lift_clique_complex(semantic, c.tsp.max_order, c.tsp.max_simplices);
}

std::size_t registry_num_users(const json& split_json) {
    return split_json.at("num_users").get<std::size_t>();
}

}  // namespace

void cmd_split(const PipelineConfig& config) {
    config.validate();
    ensure_output_dir(config);
    const InteractionDataset raw = load_interactions(config.dataset_path, config.dataset_format);
    const InteractionDataset split =
        unbiased_split(raw, config.train_frac, config.valid_frac, config.split_seed);
    write_split_manifest(split, out_path(config, artifact::kSplit));

    json registry = load_registry(config);
    registry["config_hash"] = config.hash();
    register_artifact(config, registry, artifact::kSplit, "split");
    save_registry(config, registry);
}

void cmd_train(const PipelineConfig& config) {
    config.validate();
    ensure_output_dir(config);
    json registry = load_registry(config);
    const std::string split_path = require_artifact(config, registry, artifact::kSplit, "split");

    const InteractionDataset dataset = read_split_manifest(split_path);
    const BipartiteGraph graph = build_bipartite_graph(dataset);
    const TrainResult result = bpr_train(dataset, graph, config.train);

    save_embeddings_binary(out_path(config, artifact::kEmbeddings), result.embeddings.values);
    save_embeddings_binary(out_path(config, artifact::kInitialEmbeddings),
                           result.embeddings.initial);
    {
        std::ofstream log(out_path(config, artifact::kTrainingLog));
        log << "epoch,loss,valid_recall\n";
        char buf[96];
        for (const auto& e : result.history) {
            std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g\n", e.epoch, e.loss, e.valid_recall);
            log << buf;
        }
    }
    register_artifact(config, registry, artifact::kEmbeddings, "train");
    register_artifact(config, registry, artifact::kInitialEmbeddings, "train");
    register_artifact(config, registry, artifact::kTrainingLog, "train");
    save_registry(config, registry);
}

void cmd_diagnose(const PipelineConfig& config) {
    config.validate();
    json registry = load_registry(config);
    const std::string split_path = require_artifact(config, registry, artifact::kSplit, "split");
    const std::string x0_path =
        require_artifact(config, registry, artifact::kInitialEmbeddings, "train");
    const std::string values_path =
        require_artifact(config, registry, artifact::kEmbeddings, "train");

    const InteractionDataset dataset = read_split_manifest(split_path);
    const BipartiteGraph graph = build_bipartite_graph(dataset);
    const Matrix x0 = load_embeddings_binary(x0_path);
    const Matrix values = load_embeddings_binary(values_path);

    EnergyConfig energy;
    energy.mu = config.tsp.mu;

    // One unit gradient step from X0 must reproduce one propagation layer.
    const Matrix stepped = gradient_descent_step(graph, x0, x0, energy);
    const Matrix propagated = propagate_layer(graph, x0);
    const double lemma1_dev = (stepped - propagated).cwiseAbs().maxCoeff();

    const Matrix x_star = resolvent_apply(graph.normalized_laplacian, energy.mu, x0,
                                          energy.solver());
    NodeDiagnostics norms = degree_norm_report(graph, x_star, x0);
    const NodeDiagnostics updates = verify_update_bound(graph, values);
    norms.update_sq = updates.update_sq;
    norms.max_update_excess = updates.max_update_excess;
    norms.update_bound_violations = updates.update_bound_violations;
    norms.write_csv(out_path(config, artifact::kDiagnostics));

    json checks;
    checks["config_hash"] = config.hash();
    checks["lemma1_max_abs_deviation"] = lemma1_dev;
    checks["lemma1_holds"] = lemma1_dev < 1e-12;
    checks["corollary"] = {{"constant", norms.corollary_constant},
                           {"violations", norms.corollary_violations},
                           {"spearman_degree_norm", norms.spearman_degree_norm},
                           {"degenerate_degrees", norms.degenerate_degrees}};
    checks["update_bound"] = {{"max_excess", norms.max_update_excess},
                              {"violations", norms.update_bound_violations}};
    std::ofstream out(out_path(config, artifact::kLemmaChecks));
    out << checks.dump(2) << "\n";

    register_artifact(config, registry, artifact::kDiagnostics, "diagnose");
    register_artifact(config, registry, artifact::kLemmaChecks, "diagnose");
    save_registry(config, registry);
}

void cmd_lift(const PipelineConfig& config) {
    config.validate();
    json registry = load_registry(config);
    const std::string split_path = require_artifact(config, registry, artifact::kSplit, "split");
    const std::string values_path =
        require_artifact(config, registry, artifact::kEmbeddings, "train");

    const json split_json = read_json(split_path, "split manifest");
    const Matrix values = load_embeddings_binary(values_path);
    const SimplicialComplex complex =
        build_complex_from_embeddings(config, values, registry_num_users(split_json));

    write_complex_manifest(complex, config.tsp.theta, out_path(config, artifact::kComplexManifest));
    for (int k = 1; k <= complex.top_order(); ++k) {
        const std::string name = "boundary_" + std::to_string(k) + ".txt";
        write_boundary_triplets(complex, k, out_path(config, name.c_str()));
    }

    register_artifact(config, registry, artifact::kComplexManifest, "lift");
    save_registry(config, registry);
}

void cmd_propagate(const PipelineConfig& config) {
    config.validate();
    json registry = load_registry(config);
    const std::string split_path = require_artifact(config, registry, artifact::kSplit, "split");
    const std::string values_path =
        require_artifact(config, registry, artifact::kEmbeddings, "train");
    const std::string manifest_path =
        require_artifact(config, registry, artifact::kComplexManifest, "lift");

    const json split_json = read_json(split_path, "split manifest");
    const Matrix values = load_embeddings_binary(values_path);
    const SimplicialComplex complex =
        build_complex_from_embeddings(config, values, registry_num_users(split_json));

    const json manifest = read_json(manifest_path, "complex manifest");
    if (manifest.at("content_hash").get<std::string>() != complex.content_hash()) {
        throw ConfigError("complex manifest does not match the current embeddings/config; "
                          "rerun `tsp lift`");
    }

    const FusedEmbedding fused = tsp_run(complex, values, config.tsp);
    save_embeddings_binary(out_path(config, artifact::kFused), fused.values);

    json prov;
    prov["config_hash"] = config.hash();
    prov["tsp_config_hash"] = fused.config_hash;
    prov["complex_hash"] = fused.complex_hash;
    json orders = json::array();
    for (const auto& t : fused.per_order) {
        orders.push_back({{"order", t.order},
                          {"simplex_count", t.simplex_count},
                          {"norm_before", t.norm_before},
                          {"norm_after", t.norm_after}});
    }
    prov["per_order"] = orders;
    std::ofstream out(out_path(config, artifact::kProvenance));
    out << prov.dump(2) << "\n";

    register_artifact(config, registry, artifact::kFused, "propagate");
    register_artifact(config, registry, artifact::kProvenance, "propagate");
    save_registry(config, registry);
}

void cmd_evaluate(const PipelineConfig& config) {
    config.validate();
    json registry = load_registry(config);
    const std::string split_path = require_artifact(config, registry, artifact::kSplit, "split");
    const std::string values_path =
        require_artifact(config, registry, artifact::kEmbeddings, "train");
    const std::string fused_path =
        require_artifact(config, registry, artifact::kFused, "propagate");

    const InteractionDataset dataset = read_split_manifest(split_path);
    const Matrix backbone = load_embeddings_binary(values_path);
    const Matrix fused = load_embeddings_binary(fused_path);

    const EvalReport backbone_report = evaluate(backbone, dataset, config.eval_k, config.tail_fraction);
    const EvalReport tsp_report = evaluate(fused, dataset, config.eval_k, config.tail_fraction);

    json j;
    j["config_hash"] = config.hash();
    j["backbone"] = json::parse(backbone_report.to_json());
    j["tsp"] = json::parse(tsp_report.to_json());
    std::ofstream out(out_path(config, artifact::kEvalJson));
    out << j.dump(2) << "\n";

    std::ofstream csv(out_path(config, artifact::kEvalCsv));
    csv << "model," << backbone_report.csv_header() << "\n";
    csv << "backbone," << backbone_report.csv_row() << "\n";
    csv << "tsp," << tsp_report.csv_row() << "\n";

    register_artifact(config, registry, artifact::kEvalJson, "evaluate");
    register_artifact(config, registry, artifact::kEvalCsv, "evaluate");
    save_registry(config, registry);
}

void cmd_pipeline(const PipelineConfig& config) {
    cmd_split(config);
    cmd_train(config);
    cmd_diagnose(config);
    cmd_lift(config);
    cmd_propagate(config);
    cmd_evaluate(config);
}

}  // namespace tsp
