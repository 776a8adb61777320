#include "scpgcn/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "json.hpp"
#include "scpgcn/rng.hpp"
#include "scpgcn/synthdata.hpp"

namespace scpgcn::eval {

namespace {

double sigmoid(double s) { return 1.0 / (1.0 + std::exp(-s)); }

/// Runs fn(0..count-1), possibly on several threads. Each job writes only
/// its own output slot, so the combined result never depends on scheduling.
void parallel_for(std::size_t count, int jobs,
                  const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t k = 0; k < count; ++k) {
      fn(k);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const std::size_t workers =
      std::min<std::size_t>(count, static_cast<std::size_t>(jobs));
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&]() {
      while (true) {
        const std::size_t k = next.fetch_add(1);
        if (k >= count) {
          break;
        }
        try {
          fn(k);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) {
            first_error = std::current_exception();
          }
        }
      }
    });
  }
  for (auto& thread : threads) {
    thread.join();
  }
  if (first_error) {
    std::rethrow_exception(first_error);
  }
}

void require_binary(const std::vector<int>& predictions,
                    const std::vector<int>& labels, const char* op) {
  if (predictions.size() != labels.size()) {
    throw std::invalid_argument(std::string(op) +
                                ": predictions and labels differ in length");
  }
  if (predictions.empty()) {
    throw std::invalid_argument(std::string(op) + ": empty input");
  }
  for (int v : predictions) {
    if (v != 0 && v != 1) {
      throw std::invalid_argument(std::string(op) +
                                  ": predictions must be 0 or 1");
    }
  }
  for (int v : labels) {
    if (v != 0 && v != 1) {
      throw std::invalid_argument(std::string(op) + ": labels must be 0 or 1");
    }
  }
}

void fill_summary(MetricSummary& summary) {
  const auto count = static_cast<double>(summary.per_repeat.size());
  double total = 0.0;
  for (double v : summary.per_repeat) {
    total += v;
  }
  summary.mean = total / count;
  double variance = 0.0;
  for (double v : summary.per_repeat) {
    variance += (v - summary.mean) * (v - summary.mean);
  }
  summary.stddev = std::sqrt(variance / count);
}

std::string view_name(graph::ViewKind view) {
  return view == graph::ViewKind::structural ? "structural" : "functional";
}

nlohmann::json config_to_json(const training::TrainConfig& config) {
  return {{"alpha", config.alpha},
          {"beta", config.beta},
          {"margin", config.margin},
          {"learning_rate", config.learning_rate},
          {"epochs", config.epochs},
          {"communities", config.communities},
          {"hidden1", config.hidden1},
          {"hidden2", config.hidden2},
          {"embed_dim", config.embed_dim},
          {"view_structure", view_name(config.view_structure)},
          {"view_features", view_name(config.view_features)},
          {"use_siamese", config.use_siamese},
          {"use_cp", config.use_cp},
          {"normalize_structural", config.normalize_structural},
          {"seed", config.seed},
          {"adam_beta1", config.adam_beta1},
          {"adam_beta2", config.adam_beta2},
          {"adam_epsilon", config.adam_epsilon},
          {"activation", model::activation_name(config.activation)}};
}

void write_text(const std::string& text, const std::string& path,
                const char* op) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error(std::string(op) + ": cannot open " + path);
  }
  out << text;
  if (!out) {
    throw std::runtime_error(std::string(op) + ": write to " + path +
                             " failed");
  }
}

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

nlohmann::json report_to_json(const ExperimentReport& report) {
  return {{"variant", report.variant},
          {"repeats", report.repeats},
          {"train_fraction", report.train_fraction},
          {"seeds", report.seeds},
          {"accuracy",
           {{"mean", report.accuracy.mean},
            {"std", report.accuracy.stddev},
            {"per_repeat", report.accuracy.per_repeat}}},
          {"f1",
           {{"mean", report.f1.mean},
            {"std", report.f1.stddev},
            {"per_repeat", report.f1.per_repeat}}},
          {"config", config_to_json(report.config)}};
}

/// One train/evaluate round shared by run_experiment repeats and grid cells.
void score_split(const std::vector<graph::NetworkInstance>& instances,
                 const std::vector<std::size_t>& train_idx,
                 const std::vector<std::size_t>& test_idx,
                 const training::TrainConfig& config, double& accuracy_out,
                 double& f1_out) {
  std::vector<graph::NetworkInstance> train_instances;
  train_instances.reserve(train_idx.size());
  for (std::size_t idx : train_idx) {
    train_instances.push_back(instances[idx]);
  }

  const training::TrainResult result =
      training::train(train_instances, config);

  std::vector<std::vector<double>> train_embeddings;
  std::vector<int> train_labels;
  train_embeddings.reserve(train_idx.size());
  for (std::size_t idx : train_idx) {
    train_embeddings.push_back(
        graph_embedding(instances[idx], result.trained, config));
    train_labels.push_back(instances[idx].label);
  }

  const ClassifierModel classifier =
      train_classifier(train_embeddings, train_labels);

  std::vector<std::vector<double>> test_embeddings;
  std::vector<int> test_labels;
  test_embeddings.reserve(test_idx.size());
  for (std::size_t idx : test_idx) {
    test_embeddings.push_back(
        graph_embedding(instances[idx], result.trained, config));
    test_labels.push_back(instances[idx].label);
  }

  const std::vector<int> predictions = predict(classifier, test_embeddings);
  accuracy_out = accuracy(predictions, test_labels);
  f1_out = f1_score(predictions, test_labels);
}

}  // namespace

ClassifierModel train_classifier(
    const std::vector<std::vector<double>>& embeddings,
    const std::vector<int>& labels) {
  if (embeddings.empty() || embeddings.size() != labels.size()) {
    throw std::invalid_argument(
        "train_classifier: need one label per embedding");
  }
  const std::size_t dim = embeddings.front().size();
  if (dim == 0) {
    throw std::invalid_argument("train_classifier: empty embeddings");
  }
  bool saw[2] = {false, false};
  for (std::size_t k = 0; k < embeddings.size(); ++k) {
    if (embeddings[k].size() != dim) {
      throw std::invalid_argument(
          "train_classifier: embeddings differ in length");
    }
    if (labels[k] != 0 && labels[k] != 1) {
      throw std::invalid_argument("train_classifier: labels must be 0 or 1");
    }
    saw[labels[k]] = true;
  }
  if (!saw[0] || !saw[1]) {
    throw std::invalid_argument(
        "train_classifier: need at least one example of each class");
  }

  constexpr int kIterations = 500;
  constexpr double kLearningRate = 0.1;
  const auto count = static_cast<double>(embeddings.size());

  ClassifierModel classifier;
  classifier.weights.assign(dim, 0.0);
  std::vector<double> weight_grad(dim);
  for (int iter = 0; iter < kIterations; ++iter) {
    std::fill(weight_grad.begin(), weight_grad.end(), 0.0);
    double bias_grad = 0.0;
    for (std::size_t k = 0; k < embeddings.size(); ++k) {
      const double residual =
          sigmoid(decision_value(classifier, embeddings[k])) -
          static_cast<double>(labels[k]);
      const std::vector<double>& x = embeddings[k];
      for (std::size_t j = 0; j < dim; ++j) {
        weight_grad[j] += residual * x[j];
      }
      bias_grad += residual;
    }
    for (std::size_t j = 0; j < dim; ++j) {
      classifier.weights[j] -= kLearningRate * weight_grad[j] / count;
    }
    classifier.bias -= kLearningRate * bias_grad / count;
  }
  return classifier;
}

double decision_value(const ClassifierModel& classifier,
                      const std::vector<double>& embedding) {
  if (embedding.size() != classifier.weights.size()) {
    throw std::invalid_argument(
        "decision_value: embedding length does not match the classifier");
  }
  double s = classifier.bias;
  for (std::size_t j = 0; j < embedding.size(); ++j) {
    s += classifier.weights[j] * embedding[j];
  }
  return s;
}

std::vector<int> predict(const ClassifierModel& classifier,
                         const std::vector<std::vector<double>>& embeddings) {
  std::vector<int> predictions;
  predictions.reserve(embeddings.size());
  for (const auto& embedding : embeddings) {
    predictions.push_back(decision_value(classifier, embedding) >= 0.0 ? 1 : 0);
  }
  return predictions;
}

double accuracy(const std::vector<int>& predictions,
                const std::vector<int>& labels) {
  require_binary(predictions, labels, "accuracy");
  std::size_t correct = 0;
  for (std::size_t k = 0; k < predictions.size(); ++k) {
    if (predictions[k] == labels[k]) {
      ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

double f1_score(const std::vector<int>& predictions,
                const std::vector<int>& labels) {
  require_binary(predictions, labels, "f1_score");
  double tp = 0.0;
  double fp = 0.0;
  double fn = 0.0;
  for (std::size_t k = 0; k < predictions.size(); ++k) {
    if (predictions[k] == 1 && labels[k] == 1) {
      tp += 1.0;
    } else if (predictions[k] == 1 && labels[k] == 0) {
      fp += 1.0;
    } else if (predictions[k] == 0 && labels[k] == 1) {
      fn += 1.0;
    }
  }
  const double precision = tp + fp > 0.0 ? tp / (tp + fp) : 0.0;
  const double recall = tp + fn > 0.0 ? tp / (tp + fn) : 0.0;
  if (precision + recall == 0.0) {
    return 0.0;
  }
  return 2.0 * precision * recall / (precision + recall);
}

VariantSpec parse_variant(const std::string& name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return std::toupper(c); });

  struct Base {
    const char* token;
    const char* canonical;
    bool use_siamese;
    bool use_cp;
  };
  // Longest token first so "SCP-GCN" is not mistaken for "S-GCN"'s suffix.
  static const Base kBases[] = {{"SCP-GCN", "SCP-GCN", true, true},
                                {"CP-GCN", "CP-GCN", false, true},
                                {"S-GCN", "S-GCN", true, false},
                                {"GCN", "GCN", false, false}};
  struct View {
    const char* token;
    const char* canonical;
    graph::ViewKind structure;
    graph::ViewKind features;
  };
  // Two-part suffixes first, for the same reason.
  static const View kViews[] = {
      {"-FMRI-DTI", "-fMRI-DTI", graph::ViewKind::functional,
       graph::ViewKind::structural},
      {"-DTI-FMRI", "-DTI-fMRI", graph::ViewKind::structural,
       graph::ViewKind::functional},
      {"-FMRI", "-fMRI", graph::ViewKind::functional,
       graph::ViewKind::functional},
      {"-DTI", "-DTI", graph::ViewKind::structural,
       graph::ViewKind::structural}};

  for (const Base& base : kBases) {
    const std::string token(base.token);
    if (upper.rfind(token, 0) != 0) {
      continue;
    }
    VariantSpec spec;
    spec.use_siamese = base.use_siamese;
    spec.use_cp = base.use_cp;
    spec.name = base.canonical;
    const std::string rest = upper.substr(token.size());
    if (rest.empty()) {
      return spec;  // default views: structural operator, functional features
    }
    for (const View& view : kViews) {
      if (rest == view.token) {
        spec.view_structure = view.structure;
        spec.view_features = view.features;
        spec.name += view.canonical;
        return spec;
      }
    }
    break;
  }
  throw std::invalid_argument(
      "parse_variant: unknown variant '" + name +
      "' (expected GCN, CP-GCN, S-GCN or SCP-GCN, optionally followed by "
      "-fMRI, -DTI, -fMRI-DTI or -DTI-fMRI)");
}

training::TrainConfig apply_variant(training::TrainConfig config,
                                    const VariantSpec& variant) {
  config.use_siamese = variant.use_siamese;
  config.use_cp = variant.use_cp;
  config.view_structure = variant.view_structure;
  config.view_features = variant.view_features;
  return config;
}

const std::vector<std::string>& ablation_variants() {
  static const std::vector<std::string> kVariants = {
      "GCN",          "CP-GCN",       "S-GCN",           "SCP-GCN",
      "SCP-GCN-fMRI", "SCP-GCN-DTI", "SCP-GCN-fMRI-DTI", "SCP-GCN-DTI-fMRI"};
  return kVariants;
}

std::vector<double> graph_embedding(const graph::NetworkInstance& instance,
                                    const model::ScpGcnModel& m,
                                    const training::TrainConfig& config) {
  const training::PreparedInstance prepared =
      training::prepare_instance(instance, config, nullptr);
  return model::forward_trace(prepared.propagation, prepared.px, m)
      .z.entries();
}

ExperimentReport run_experiment(
    const std::vector<graph::NetworkInstance>& instances,
    const std::string& variant, const training::TrainConfig& config,
    int repeats, double train_fraction, int jobs) {
  if (repeats < 1) {
    throw std::invalid_argument("run_experiment: repeats must be at least 1");
  }
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument(
        "run_experiment: train fraction must lie in (0, 1)");
  }
  const VariantSpec spec = parse_variant(variant);
  const training::TrainConfig base = apply_variant(config, spec);
  training::validate(base);

  std::vector<int> labels;
  labels.reserve(instances.size());
  for (const auto& instance : instances) {
    labels.push_back(instance.label);
  }

  ExperimentReport report;
  report.variant = spec.name;
  report.repeats = repeats;
  report.train_fraction = train_fraction;
  report.config = base;
  report.seeds.resize(static_cast<std::size_t>(repeats));
  report.accuracy.per_repeat.resize(static_cast<std::size_t>(repeats));
  report.f1.per_repeat.resize(static_cast<std::size_t>(repeats));

  parallel_for(static_cast<std::size_t>(repeats), jobs, [&](std::size_t r) {
    const std::uint64_t seed_r = Rng::derive(base.seed, r + 1);
    const auto [train_idx, test_idx] =
        synthdata::split_dataset(labels, train_fraction, seed_r);
    training::TrainConfig repeat_config = base;
    repeat_config.seed = seed_r;
    score_split(instances, train_idx, test_idx, repeat_config,
                report.accuracy.per_repeat[r], report.f1.per_repeat[r]);
    report.seeds[r] = seed_r;
  });

  fill_summary(report.accuracy);
  fill_summary(report.f1);
  return report;
}

std::size_t best_point_index(const std::vector<GridPointScore>& table) {
  if (table.empty()) {
    throw std::invalid_argument("best_point_index: empty score table");
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < table.size(); ++k) {
    const GridPointScore& candidate = table[k];
    const GridPointScore& current = table[best];
    if (candidate.mean_accuracy > current.mean_accuracy) {
      best = k;
      continue;
    }
    if (candidate.mean_accuracy == current.mean_accuracy) {
      const auto candidate_key = std::make_tuple(
          candidate.communities, candidate.alpha, candidate.beta);
      const auto current_key =
          std::make_tuple(current.communities, current.alpha, current.beta);
      if (candidate_key < current_key) {
        best = k;
      }
    }
  }
  return best;
}

GridSearchResult grid_search(const std::vector<graph::NetworkInstance>& instances,
                             std::vector<double> alpha_grid,
                             std::vector<double> beta_grid,
                             std::vector<int> c_grid, int folds,
                             const training::TrainConfig& base, int jobs) {
  if (alpha_grid.empty() || beta_grid.empty() || c_grid.empty()) {
    throw std::invalid_argument("grid_search: grids must be non-empty");
  }
  if (folds < 2) {
    throw std::invalid_argument("grid_search: need at least 2 folds");
  }
  training::validate(base);
  auto sort_unique = [](auto& grid) {
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  };
  sort_unique(alpha_grid);
  sort_unique(beta_grid);
  sort_unique(c_grid);

  // Stratified fold assignment, fixed across all grid points: members of
  // each class are shuffled on a seed stream disjoint from the per-fold
  // training streams, then dealt round-robin.
  const std::size_t fold_count = static_cast<std::size_t>(folds);
  std::vector<int> fold_of(instances.size());
  {
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t k = 0; k < instances.size(); ++k) {
      by_class[instances[k].label].push_back(k);
    }
    for (auto& [label, members] : by_class) {
      Rng rng(Rng::derive(base.seed,
                          0x464F4C44u + static_cast<std::uint64_t>(label)));
      rng.shuffle(members);
      for (std::size_t pos = 0; pos < members.size(); ++pos) {
        fold_of[members[pos]] = static_cast<int>(pos % fold_count);
      }
    }
  }
  for (int f = 0; f < folds; ++f) {
    std::set<int> classes;
    for (std::size_t k = 0; k < instances.size(); ++k) {
      if (fold_of[k] == f) {
        classes.insert(instances[k].label);
      }
    }
    if (classes.size() < 2) {
      throw std::runtime_error("grid_search: fold " + std::to_string(f) +
                               " holds a single class; use fewer folds");
    }
  }

  GridSearchResult result;
  for (int c : c_grid) {
    for (double alpha : alpha_grid) {
      for (double beta : beta_grid) {
        GridPointScore point;
        point.alpha = alpha;
        point.beta = beta;
        point.communities = c;
        point.folds.resize(fold_count);
        result.table.push_back(std::move(point));
      }
    }
  }

  const std::size_t cells = result.table.size() * fold_count;
  parallel_for(cells, jobs, [&](std::size_t cell) {
    const std::size_t point_idx = cell / fold_count;
    const int fold = static_cast<int>(cell % fold_count);
    GridPointScore& point = result.table[point_idx];

    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> test_idx;
    for (std::size_t k = 0; k < instances.size(); ++k) {
      (fold_of[k] == fold ? test_idx : train_idx).push_back(k);
    }

    training::TrainConfig cell_config = base;
    cell_config.alpha = point.alpha;
    cell_config.beta = point.beta;
    cell_config.communities = point.communities;
    cell_config.seed = Rng::derive(base.seed, static_cast<std::uint64_t>(fold) + 1);

    GridFoldScore& score = point.folds[static_cast<std::size_t>(fold)];
    score.fold = fold;
    score_split(instances, train_idx, test_idx, cell_config, score.accuracy,
                score.f1);
  });

  for (GridPointScore& point : result.table) {
    double acc_total = 0.0;
    double f1_total = 0.0;
    for (const GridFoldScore& score : point.folds) {
      acc_total += score.accuracy;
      f1_total += score.f1;
    }
    point.mean_accuracy = acc_total / static_cast<double>(fold_count);
    point.mean_f1 = f1_total / static_cast<double>(fold_count);
  }

  const GridPointScore& best = result.table[best_point_index(result.table)];
  result.best_alpha = best.alpha;
  result.best_beta = best.beta;
  result.best_communities = best.communities;
  result.best_accuracy = best.mean_accuracy;
  return result;
}

std::vector<ExperimentReport> run_ablation(
    const std::vector<graph::NetworkInstance>& instances,
    const training::TrainConfig& config, int repeats, double train_fraction,
    int jobs) {
  std::vector<ExperimentReport> reports;
  reports.reserve(ablation_variants().size());
  for (const std::string& variant : ablation_variants()) {
    reports.push_back(run_experiment(instances, variant, config, repeats,
                                     train_fraction, jobs));
  }
  return reports;
}

void write_report_json(const ExperimentReport& report,
                       const std::string& path) {
  write_text(report_to_json(report).dump(2) + "\n", path, "write_report_json");
}

void write_report_csv(const ExperimentReport& report, const std::string& path) {
  std::string text = "repeat,seed,accuracy,f1\n";
  for (std::size_t r = 0; r < report.seeds.size(); ++r) {
    text += std::to_string(r + 1);
    text += ',';
    text += std::to_string(report.seeds[r]);
    text += ',';
    text += format_double(report.accuracy.per_repeat[r]);
    text += ',';
    text += format_double(report.f1.per_repeat[r]);
    text += '\n';
  }
  write_text(text, path, "write_report_csv");
}

void write_grid_json(const GridSearchResult& result, const std::string& path) {
  nlohmann::json table = nlohmann::json::array();
  for (const GridPointScore& point : result.table) {
    nlohmann::json folds = nlohmann::json::array();
    for (const GridFoldScore& score : point.folds) {
      folds.push_back({{"fold", score.fold},
                       {"accuracy", score.accuracy},
                       {"f1", score.f1}});
    }
    table.push_back({{"alpha", point.alpha},
                     {"beta", point.beta},
                     {"communities", point.communities},
                     {"mean_accuracy", point.mean_accuracy},
                     {"mean_f1", point.mean_f1},
                     {"folds", folds}});
  }
  const nlohmann::json doc = {{"best",
                               {{"alpha", result.best_alpha},
                                {"beta", result.best_beta},
                                {"communities", result.best_communities},
                                {"mean_accuracy", result.best_accuracy}}},
                              {"table", table}};
  write_text(doc.dump(2) + "\n", path, "write_grid_json");
}

void write_grid_csv(const GridSearchResult& result, const std::string& path) {
  std::string text = "alpha,beta,communities,fold,accuracy,f1\n";
  for (const GridPointScore& point : result.table) {
    for (const GridFoldScore& score : point.folds) {
      text += format_double(point.alpha);
      text += ',';
      text += format_double(point.beta);
      text += ',';
      text += std::to_string(point.communities);
      text += ',';
      text += std::to_string(score.fold);
      text += ',';
      text += format_double(score.accuracy);
      text += ',';
      text += format_double(score.f1);
      text += '\n';
    }
  }
  write_text(text, path, "write_grid_csv");
}

void write_ablation_json(const std::vector<ExperimentReport>& reports,
                         const std::string& path) {
  nlohmann::json variants = nlohmann::json::array();
  for (const ExperimentReport& report : reports) {
    variants.push_back(report_to_json(report));
  }
  const nlohmann::json doc = {{"variants", variants}};
  write_text(doc.dump(2) + "\n", path, "write_ablation_json");
}

void write_ablation_csv(const std::vector<ExperimentReport>& reports,
                        const std::string& path) {
  std::string text = "variant,mean_accuracy,std_accuracy,mean_f1,std_f1\n";
  for (const ExperimentReport& report : reports) {
    text += report.variant;
    text += ',';
    text += format_double(report.accuracy.mean);
    text += ',';
    text += format_double(report.accuracy.stddev);
    text += ',';
    text += format_double(report.f1.mean);
    text += ',';
    text += format_double(report.f1.stddev);
    text += '\n';
  }
  write_text(text, path, "write_ablation_csv");
}

}  // namespace scpgcn::eval
