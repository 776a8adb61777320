#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scpgcn/graph.hpp"
#include "scpgcn/model.hpp"
#include "scpgcn/training.hpp"

namespace scpgcn::eval {

/// Logistic-regression weights over flattened graph embeddings.
struct ClassifierModel {
  std::vector<double> weights;
  double bias = 0.0;

  bool operator==(const ClassifierModel& other) const = default;
};

/// Fits logistic regression with full-batch gradient descent on mean binary
/// cross entropy: zero initialization, fixed 500 iterations, learning rate
/// 0.1. Deterministic. Requires at least one example of each class.
ClassifierModel train_classifier(
    const std::vector<std::vector<double>>& embeddings,
    const std::vector<int>& labels);

/// Raw decision score w . g + b (positive means class 1).
double decision_value(const ClassifierModel& classifier,
                      const std::vector<double>& embedding);

/// Thresholds each decision value at zero.
std::vector<int> predict(const ClassifierModel& classifier,
                         const std::vector<std::vector<double>>& embeddings);

/// Fraction of matching entries. Inputs must be equal-length, non-empty and
/// binary.
double accuracy(const std::vector<int>& predictions,
                const std::vector<int>& labels);

/// Harmonic mean of precision and recall for positive class 1, defined as 0
/// when precision + recall is 0. Same input requirements as accuracy.
double f1_score(const std::vector<int>& predictions,
                const std::vector<int>& labels);

/// A named model variant: which training branches are enabled and which
/// network view feeds the propagation operator vs the feature matrix.
struct VariantSpec {
  std::string name;
  bool use_siamese = true;
  bool use_cp = true;
  graph::ViewKind view_structure = graph::ViewKind::structural;
  graph::ViewKind view_features = graph::ViewKind::functional;

  bool operator==(const VariantSpec& other) const = default;
};

/// Parses names like "GCN", "CP-GCN", "S-GCN", "SCP-GCN", optionally with a
/// view suffix "-fMRI", "-DTI", "-fMRI-DTI" or "-DTI-fMRI" (matching is
/// case-insensitive; the returned name is canonical). Without a suffix the
/// structure view is structural and the feature view functional.
VariantSpec parse_variant(const std::string& name);

/// Copies the variant's four switches onto the config.
training::TrainConfig apply_variant(training::TrainConfig config,
                                    const VariantSpec& variant);

/// The eight canonical variant names evaluated by the ablation command: the
/// four architecture ablations plus the four view assignments.
const std::vector<std::string>& ablation_variants();

/// Per-repeat values of one metric plus their mean and population standard
/// deviation.
struct MetricSummary {
  std::vector<double> per_repeat;
  double mean = 0.0;
  double stddev = 0.0;

  bool operator==(const MetricSummary& other) const = default;
};

struct ExperimentReport {
  std::string variant;
  int repeats = 0;
  double train_fraction = 0.0;
  std::vector<std::uint64_t> seeds;  // per-repeat seeds, derived from master
  MetricSummary accuracy;
  MetricSummary f1;
  training::TrainConfig config;  // snapshot with variant switches applied

  bool operator==(const ExperimentReport& other) const = default;
};

/// Flattened graph embedding of one instance under a trained model, using
/// the config's view flags.
std::vector<double> graph_embedding(const graph::NetworkInstance& instance,
                                    const model::ScpGcnModel& m,
                                    const training::TrainConfig& config);

/// Repeats (seeded split -> train -> embed -> classify -> score) `repeats`
/// times and aggregates. Repeat r uses the seed derived from (config.seed,
/// r + 1) for both the split and training, so runs with equal master seeds
/// see identical splits across variants. `jobs` > 1 runs repeats
/// concurrently without changing any result.
ExperimentReport run_experiment(
    const std::vector<graph::NetworkInstance>& instances,
    const std::string& variant, const training::TrainConfig& config,
    int repeats, double train_fraction = 0.8, int jobs = 1);

struct GridFoldScore {
  int fold = 0;
  double accuracy = 0.0;
  double f1 = 0.0;

  bool operator==(const GridFoldScore& other) const = default;
};

struct GridPointScore {
  double alpha = 0.0;
  double beta = 0.0;
  int communities = 0;
  std::vector<GridFoldScore> folds;
  double mean_accuracy = 0.0;
  double mean_f1 = 0.0;

  bool operator==(const GridPointScore& other) const = default;
};

struct GridSearchResult {
  double best_alpha = 0.0;
  double best_beta = 0.0;
  int best_communities = 0;
  double best_accuracy = 0.0;
  std::vector<GridPointScore> table;

  bool operator==(const GridSearchResult& other) const = default;
};

/// Index of the winning grid point: highest mean accuracy, ties broken by
/// smaller community count, then smaller alpha, then smaller beta.
std::size_t best_point_index(const std::vector<GridPointScore>& table);

/// Stratified k-fold cross-validation over the (alpha, beta, communities)
/// grid. Grids are sorted and deduplicated; fold membership and per-fold
/// training seeds depend only on base.seed, so every grid point sees the
/// same folds. Throws if any fold ends up single-class. `jobs` > 1 evaluates
/// grid cells concurrently without changing any result.
GridSearchResult grid_search(const std::vector<graph::NetworkInstance>& instances,
                             std::vector<double> alpha_grid,
                             std::vector<double> beta_grid,
                             std::vector<int> c_grid, int folds,
                             const training::TrainConfig& base, int jobs = 1);

/// Runs run_experiment for each of the eight ablation variants under one
/// master config, sharing split seeds so comparisons are paired.
std::vector<ExperimentReport> run_ablation(
    const std::vector<graph::NetworkInstance>& instances,
    const training::TrainConfig& config, int repeats,
    double train_fraction = 0.8, int jobs = 1);

// Deterministic writers (sorted-key JSON, fixed CSV headers, full-precision
// numbers), so identical results serialize to identical bytes.
void write_report_json(const ExperimentReport& report, const std::string& path);
void write_report_csv(const ExperimentReport& report, const std::string& path);
void write_grid_json(const GridSearchResult& result, const std::string& path);
void write_grid_csv(const GridSearchResult& result, const std::string& path);
void write_ablation_json(const std::vector<ExperimentReport>& reports,
                         const std::string& path);
void write_ablation_csv(const std::vector<ExperimentReport>& reports,
                        const std::string& path);

}  // namespace scpgcn::eval
