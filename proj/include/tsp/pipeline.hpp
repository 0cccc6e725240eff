#pragma once

#include <string>
#include <vector>

#include "tsp/embedding.hpp"
#include "tsp/interaction_data.hpp"
#include "tsp/propagation.hpp"

namespace tsp {

// Everything one experiment run needs, loadable from a JSON config file.
// Command line flags override individual fields after loading.
struct PipelineConfig {
    std::string dataset_path;
    FileFormat dataset_format = FileFormat::Csv;
    double train_frac = 0.8;
    double valid_frac = 0.1;
    std::uint64_t split_seed = 7;
    TrainConfig train;
    TSPConfig tsp;
    int eval_k = 20;
    double tail_fraction = 0.2;
    std::string output_dir = "out";

    static PipelineConfig load(const std::string& path);
    void validate() const;
    std::string hash() const;
};

// Artifact file names inside the output directory.
namespace artifact {
inline constexpr const char* kSplit = "split.json";
inline constexpr const char* kEmbeddings = "backbone.emb";
inline constexpr const char* kInitialEmbeddings = "backbone_initial.emb";
inline constexpr const char* kTrainingLog = "training_log.csv";
inline constexpr const char* kDiagnostics = "node_diagnostics.csv";
inline constexpr const char* kLemmaChecks = "lemma_checks.json";
inline constexpr const char* kComplexManifest = "complex.json";
inline constexpr const char* kFused = "fused.emb";
inline constexpr const char* kProvenance = "provenance.json";
inline constexpr const char* kEvalJson = "eval_report.json";
inline constexpr const char* kEvalCsv = "eval_report.csv";
inline constexpr const char* kRegistry = "run.json";
}  // namespace artifact

// Each command writes its artifacts plus a registry entry (path -> content
// hash) that downstream commands verify before consuming.
void cmd_split(const PipelineConfig& config);
void cmd_train(const PipelineConfig& config);
void cmd_diagnose(const PipelineConfig& config);
void cmd_lift(const PipelineConfig& config);
void cmd_propagate(const PipelineConfig& config);
void cmd_evaluate(const PipelineConfig& config);
void cmd_pipeline(const PipelineConfig& config);

}  // namespace tsp
