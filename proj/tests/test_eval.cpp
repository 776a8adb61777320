#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "scpgcn/eval.hpp"
#include "scpgcn/rng.hpp"
#include "scpgcn/synthdata.hpp"

using namespace scpgcn;
using doctest::Approx;

TEST_SUITE_BEGIN("eval");

namespace {

// Independent full-batch logistic-regression trainer used as the oracle for
// train_classifier: same protocol, written straight from the update rule.
struct LogisticOracle {
  std::vector<double> w;
  double b = 0.0;

  explicit LogisticOracle(std::size_t dim) : w(dim, 0.0) {}

  double mean_loss(const std::vector<std::vector<double>>& xs,
                   const std::vector<int>& ys) const {
    double total = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      double s = b;
      for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * xs[k][j];
      const double y = ys[k];
      // Stable form of -y log p - (1-y) log(1-p).
      total += (s > 0.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s))) -
               y * s;
    }
    return total / static_cast<double>(xs.size());
  }

  void step(const std::vector<std::vector<double>>& xs,
            const std::vector<int>& ys, double lr) {
    std::vector<double> gw(w.size(), 0.0);
    double gb = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      double s = b;
      for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * xs[k][j];
      const double r = 1.0 / (1.0 + std::exp(-s)) - ys[k];
      for (std::size_t j = 0; j < w.size(); ++j) gw[j] += r * xs[k][j];
      gb += r;
    }
    const auto n = static_cast<double>(xs.size());
    for (std::size_t j = 0; j < w.size(); ++j) w[j] -= lr * gw[j] / n;
    b -= lr * gb / n;
  }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string temp_file(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::vector<graph::NetworkInstance> small_dataset() {
  synthdata::GeneratorConfig gen;
  gen.nodes = 16;
  gen.communities_true = 2;
  gen.p_in = 0.8;
  gen.p_out = 0.1;
  gen.per_class = 4;
  gen.signal = 0.6;
  gen.noise = 0.1;
  gen.seed = 19;
  return synthdata::generate_dataset(gen).instances;
}

training::TrainConfig small_config() {
  training::TrainConfig cfg;
  cfg.hidden1 = 6;
  cfg.hidden2 = 4;
  cfg.embed_dim = 3;
  cfg.epochs = 3;
  cfg.communities = 2;
  cfg.seed = 2;
  return cfg;
}

graph::NetworkInstance tiny_instance(std::string id, int label,
                                     std::uint64_t seed) {
  const std::size_t n = 6;
  Rng rng(seed);
  linalg::Matrix s(n, n);
  linalg::Matrix f(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    f(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double w = rng.uniform(0.0, 2.0);
      s(i, j) = w;
      s(j, i) = w;
      const double c = rng.uniform(-0.8, 0.8);
      f(i, j) = c;
      f(j, i) = c;
    }
  }
  return {std::move(id), std::move(s), std::move(f), label};
}

}  // namespace

TEST_CASE("classifier separates a linearly separable toy set perfectly") {
  const std::vector<std::vector<double>> points = {
      {-2.0, 0.3}, {-1.5, -0.2}, {-0.8, 0.5}, {2.0, 0.1}, {1.7, -0.4}, {0.9, 0.2}};
  const std::vector<int> labels = {0, 0, 0, 1, 1, 1};

  const auto classifier = eval::train_classifier(points, labels);
  const auto predictions = eval::predict(classifier, points);
  CHECK(eval::accuracy(predictions, labels) == 1.0);
  CHECK(eval::f1_score(predictions, labels) == 1.0);
}

TEST_CASE("flipping every label flips the sign of the decision values") {
  const std::vector<std::vector<double>> points = {
      {-1.2, 0.4}, {-0.7, -0.3}, {1.1, 0.2}, {0.8, -0.5}};
  const std::vector<int> labels = {0, 0, 1, 1};
  std::vector<int> flipped;
  for (int y : labels) flipped.push_back(1 - y);

  const auto original = eval::train_classifier(points, labels);
  const auto mirrored = eval::train_classifier(points, flipped);

  for (const auto& point : points) {
    const double a = eval::decision_value(original, point);
    const double b = eval::decision_value(mirrored, point);
    CHECK(b == Approx(-a).epsilon(1e-6));
  }
  const auto p_original = eval::predict(original, points);
  const auto p_mirrored = eval::predict(mirrored, points);
  for (std::size_t k = 0; k < points.size(); ++k) {
    CHECK(p_original[k] == 1 - p_mirrored[k]);
  }
}

TEST_CASE("classifier follows the hand-rolled gradient-descent oracle") {
  const std::vector<std::vector<double>> points = {
      {-1.0}, {-0.5}, {0.7}, {1.2}};
  const std::vector<int> labels = {0, 0, 1, 1};

  LogisticOracle oracle(1);
  double previous = oracle.mean_loss(points, labels);
  for (int iter = 0; iter < 500; ++iter) {
    oracle.step(points, labels, 0.1);
    const double current = oracle.mean_loss(points, labels);
    CHECK(current < previous);  // monotone descent at this step size
    previous = current;
  }

  const auto classifier = eval::train_classifier(points, labels);
  REQUIRE(classifier.weights.size() == 1);
  CHECK(std::fabs(classifier.weights[0] - oracle.w[0]) <= 1e-12);
  CHECK(std::fabs(classifier.bias - oracle.b) <= 1e-12);
}

TEST_CASE("classifier rejects degenerate inputs") {
  const std::vector<std::vector<double>> points = {{0.1}, {0.2}};
  CHECK_THROWS_AS(eval::train_classifier(points, {1, 1}),
                  std::invalid_argument);  // single class
  CHECK_THROWS_AS(eval::train_classifier(points, {0}), std::invalid_argument);
  CHECK_THROWS_AS(eval::train_classifier({{0.1}, {0.2, 0.3}}, {0, 1}),
                  std::invalid_argument);  // ragged embeddings
  CHECK_THROWS_AS(eval::train_classifier({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(eval::train_classifier(points, {0, 2}),
                  std::invalid_argument);
}

TEST_CASE("accuracy and F1 match the direct formulas") {
  SUBCASE("perfect predictions") {
    const std::vector<int> labels = {1, 0, 1, 0};
    CHECK(eval::accuracy(labels, labels) == 1.0);
    CHECK(eval::f1_score(labels, labels) == 1.0);
  }
  SUBCASE("two true positives, one false positive, one false negative") {
    const std::vector<int> labels = {1, 1, 1, 0, 0};
    const std::vector<int> predictions = {1, 1, 0, 1, 0};
    CHECK(eval::accuracy(predictions, labels) == Approx(0.6).epsilon(1e-15));
    // precision = recall = 2/3, so F1 = 2/3 as well
    CHECK(eval::f1_score(predictions, labels) ==
          Approx(2.0 / 3.0).epsilon(1e-15));
  }
  SUBCASE("no positive predictions while positives exist") {
    const std::vector<int> labels = {1, 1, 0};
    const std::vector<int> predictions = {0, 0, 0};
    CHECK(eval::f1_score(predictions, labels) == 0.0);
    CHECK(eval::accuracy(predictions, labels) ==
          Approx(1.0 / 3.0).epsilon(1e-15));
  }
  SUBCASE("malformed inputs") {
    CHECK_THROWS_AS(eval::accuracy({1, 0}, {1}), std::invalid_argument);
    CHECK_THROWS_AS(eval::f1_score({2, 0}, {1, 0}), std::invalid_argument);
    CHECK_THROWS_AS(eval::accuracy({}, {}), std::invalid_argument);
  }
}

TEST_CASE("variant names map onto the architecture and view switches") {
  const auto gcn = eval::parse_variant("GCN");
  CHECK(gcn.name == "GCN");
  CHECK_FALSE(gcn.use_siamese);
  CHECK_FALSE(gcn.use_cp);
  CHECK(gcn.view_structure == graph::ViewKind::structural);
  CHECK(gcn.view_features == graph::ViewKind::functional);

  const auto cp = eval::parse_variant("CP-GCN");
  CHECK_FALSE(cp.use_siamese);
  CHECK(cp.use_cp);

  const auto s = eval::parse_variant("S-GCN");
  CHECK(s.use_siamese);
  CHECK_FALSE(s.use_cp);

  const auto scp = eval::parse_variant("scp-gcn");  // case-insensitive
  CHECK(scp.name == "SCP-GCN");
  CHECK(scp.use_siamese);
  CHECK(scp.use_cp);

  const auto proposed = eval::parse_variant("SCP-GCN-DTI-fMRI");
  CHECK(proposed.name == "SCP-GCN-DTI-fMRI");
  CHECK(proposed.view_structure == graph::ViewKind::structural);
  CHECK(proposed.view_features == graph::ViewKind::functional);
  CHECK(proposed.use_siamese);
  CHECK(proposed.use_cp);

  const auto fmri = eval::parse_variant("SCP-GCN-fMRI");
  CHECK(fmri.view_structure == graph::ViewKind::functional);
  CHECK(fmri.view_features == graph::ViewKind::functional);

  const auto dti = eval::parse_variant("SCP-GCN-DTI");
  CHECK(dti.view_structure == graph::ViewKind::structural);
  CHECK(dti.view_features == graph::ViewKind::structural);

  const auto crossed = eval::parse_variant("SCP-GCN-fMRI-DTI");
  CHECK(crossed.view_structure == graph::ViewKind::functional);
  CHECK(crossed.view_features == graph::ViewKind::structural);

  for (const auto& name : eval::ablation_variants()) {
    CHECK_NOTHROW(eval::parse_variant(name));
    CHECK(eval::parse_variant(name).name == name);
  }
  CHECK(eval::ablation_variants().size() == 8);

  CHECK_THROWS_AS(eval::parse_variant("MLP"), std::invalid_argument);
  CHECK_THROWS_AS(eval::parse_variant("SCP-GCN-EEG"), std::invalid_argument);
  CHECK_THROWS_AS(eval::parse_variant(""), std::invalid_argument);
}

TEST_CASE("the ablation flag algebra holds on applied configs") {
  const auto base = small_config();

  auto scp = eval::apply_variant(base, eval::parse_variant("SCP-GCN"));
  auto s_gcn = eval::apply_variant(base, eval::parse_variant("S-GCN"));
  auto cp_gcn = eval::apply_variant(base, eval::parse_variant("CP-GCN"));
  auto gcn = eval::apply_variant(base, eval::parse_variant("GCN"));

  auto scp_no_cp = scp;
  scp_no_cp.use_cp = false;
  CHECK(scp_no_cp == s_gcn);

  auto scp_no_siamese = scp;
  scp_no_siamese.use_siamese = false;
  CHECK(scp_no_siamese == cp_gcn);

  auto scp_neither = scp;
  scp_neither.use_cp = false;
  scp_neither.use_siamese = false;
  CHECK(scp_neither == gcn);
}

TEST_CASE("run_experiment aggregates seeded repeats deterministically") {
  const auto instances = small_dataset();
  const auto cfg = small_config();

  const auto report =
      eval::run_experiment(instances, "SCP-GCN", cfg, 3, 0.75, 1);
  CHECK(report.variant == "SCP-GCN");
  CHECK(report.repeats == 3);
  REQUIRE(report.accuracy.per_repeat.size() == 3);
  REQUIRE(report.f1.per_repeat.size() == 3);
  REQUIRE(report.seeds.size() == 3);
  for (double v : report.accuracy.per_repeat) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  for (double v : report.f1.per_repeat) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  CHECK(report.seeds[0] == Rng::derive(cfg.seed, 1));
  CHECK(report.seeds[1] == Rng::derive(cfg.seed, 2));
  CHECK(report.config.use_siamese);
  CHECK(report.config.use_cp);

  // Mean/std consistency with the per-repeat values.
  double mean = 0.0;
  for (double v : report.accuracy.per_repeat) mean += v;
  mean /= 3.0;
  CHECK(report.accuracy.mean == Approx(mean).epsilon(1e-15));

  const auto again = eval::run_experiment(instances, "SCP-GCN", cfg, 3, 0.75, 1);
  CHECK(again == report);

  const auto parallel =
      eval::run_experiment(instances, "SCP-GCN", cfg, 3, 0.75, 4);
  CHECK(parallel == report);  // jobs must not change any value
}

TEST_CASE("experiments with one master seed share their splits across variants") {
  const auto instances = small_dataset();
  const auto cfg = small_config();
  const auto a = eval::run_experiment(instances, "SCP-GCN", cfg, 2, 0.75, 1);
  const auto b = eval::run_experiment(instances, "GCN", cfg, 2, 0.75, 1);
  CHECK(a.seeds == b.seeds);
}

TEST_CASE("run_experiment rejects bad repeat counts and fractions") {
  const auto instances = small_dataset();
  const auto cfg = small_config();
  CHECK_THROWS_AS(eval::run_experiment(instances, "GCN", cfg, 0, 0.75, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(eval::run_experiment(instances, "GCN", cfg, 2, 1.0, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(eval::run_experiment(instances, "nope", cfg, 2, 0.75, 1),
                  std::invalid_argument);
}

TEST_CASE("grid_search scores every point over fixed folds") {
  const auto instances = small_dataset();
  const auto cfg = small_config();

  SUBCASE("single-point grid returns that point") {
    const auto result =
        eval::grid_search(instances, {0.1}, {0.2}, {2}, 2, cfg, 1);
    CHECK(result.best_alpha == 0.1);
    CHECK(result.best_beta == 0.2);
    CHECK(result.best_communities == 2);
    REQUIRE(result.table.size() == 1);
    REQUIRE(result.table[0].folds.size() == 2);
    CHECK(result.best_accuracy == result.table[0].mean_accuracy);
    for (const auto& fold : result.table[0].folds) {
      CHECK(fold.accuracy >= 0.0);
      CHECK(fold.accuracy <= 1.0);
    }
  }

  SUBCASE("table enumerates the full grid, deduplicated and sorted") {
    const auto result = eval::grid_search(instances, {0.2, 0.1, 0.2}, {0.1},
                                          {3, 2}, 2, cfg, 1);
    REQUIRE(result.table.size() == 4);  // 2 alphas x 1 beta x 2 Cs
    CHECK(result.table[0].communities == 2);
    CHECK(result.table[0].alpha == 0.1);
    CHECK(result.table[1].alpha == 0.2);
    CHECK(result.table[2].communities == 3);
  }

  SUBCASE("deterministic, and jobs do not change results") {
    const auto serial =
        eval::grid_search(instances, {0.1, 0.3}, {0.1}, {2, 3}, 2, cfg, 1);
    const auto repeat =
        eval::grid_search(instances, {0.1, 0.3}, {0.1}, {2, 3}, 2, cfg, 1);
    const auto threaded =
        eval::grid_search(instances, {0.1, 0.3}, {0.1}, {2, 3}, 2, cfg, 4);
    CHECK(serial == repeat);
    CHECK(serial == threaded);
  }

  SUBCASE("invalid arguments") {
    CHECK_THROWS_AS(eval::grid_search(instances, {}, {0.1}, {2}, 2, cfg, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(eval::grid_search(instances, {0.1}, {0.1}, {2}, 1, cfg, 1),
                    std::invalid_argument);
  }
}

TEST_CASE("grid_search rejects folds that end up single-class") {
  std::vector<graph::NetworkInstance> instances;
  instances.push_back(tiny_instance("t-0", 0, 1));
  instances.push_back(tiny_instance("t-1", 0, 2));
  for (int k = 0; k < 4; ++k) {
    instances.push_back(tiny_instance("t-" + std::to_string(k + 2), 1,
                                      static_cast<std::uint64_t>(k + 3)));
  }
  auto cfg = small_config();
  cfg.epochs = 1;
  // Class 0 has 2 members; with 3 folds one fold necessarily misses it.
  CHECK_THROWS_WITH_AS(
      eval::grid_search(instances, {0.1}, {0.1}, {2}, 3, cfg, 1),
      doctest::Contains("fold"), std::runtime_error);
}

TEST_CASE("best_point_index prefers smaller C, then alpha, then beta on ties") {
  std::vector<eval::GridPointScore> table(4);
  table[0] = {0.5, 0.5, 6, {}, 0.80, 0.8};
  table[1] = {0.1, 0.9, 4, {}, 0.90, 0.9};
  table[2] = {0.9, 0.1, 3, {}, 0.90, 0.9};
  table[3] = {0.2, 0.2, 8, {}, 0.85, 0.8};
  CHECK(eval::best_point_index(table) == 2);  // tie on 0.90, C=3 < C=4

  table[2].communities = 4;  // now tie on C too; alpha 0.9 vs 0.1
  CHECK(eval::best_point_index(table) == 1);

  table[2].alpha = 0.1;  // tie on alpha; beta 0.1 < 0.9
  CHECK(eval::best_point_index(table) == 2);

  CHECK_THROWS_AS(eval::best_point_index({}), std::invalid_argument);
}

TEST_CASE("ablation evaluates all eight variants with shared seeds") {
  const auto instances = small_dataset();
  auto cfg = small_config();
  cfg.epochs = 2;

  const auto reports = eval::run_ablation(instances, cfg, 2, 0.75, 1);
  REQUIRE(reports.size() == 8);
  for (std::size_t k = 0; k < reports.size(); ++k) {
    CHECK(reports[k].variant == eval::ablation_variants()[k]);
    CHECK(reports[k].seeds == reports[0].seeds);
  }
}

TEST_CASE("report writers emit fixed headers and stable bytes") {
  const auto instances = small_dataset();
  auto cfg = small_config();
  cfg.epochs = 2;
  const auto report = eval::run_experiment(instances, "S-GCN", cfg, 2, 0.75, 1);

  const std::string json_path = temp_file("scpgcn_eval_report.json");
  const std::string csv_path = temp_file("scpgcn_eval_report.csv");
  eval::write_report_json(report, json_path);
  eval::write_report_csv(report, csv_path);

  const std::string json_text = slurp(json_path);
  CHECK(json_text.find("\"variant\": \"S-GCN\"") != std::string::npos);
  CHECK(json_text.find("\"per_repeat\"") != std::string::npos);
  CHECK(json_text.back() == '\n');

  std::istringstream csv(slurp(csv_path));
  std::string line;
  REQUIRE(std::getline(csv, line));
  CHECK(line == "repeat,seed,accuracy,f1");
  std::size_t rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 2);

  eval::write_report_json(report, json_path);  // rewrite: identical bytes
  CHECK(slurp(json_path) == json_text);

  const auto grid = eval::grid_search(instances, {0.1}, {0.1}, {2}, 2, cfg, 1);
  const std::string grid_csv = temp_file("scpgcn_eval_grid.csv");
  const std::string grid_json = temp_file("scpgcn_eval_grid.json");
  eval::write_grid_csv(grid, grid_csv);
  eval::write_grid_json(grid, grid_json);
  std::istringstream gcsv(slurp(grid_csv));
  REQUIRE(std::getline(gcsv, line));
  CHECK(line == "alpha,beta,communities,fold,accuracy,f1");
  rows = 0;
  while (std::getline(gcsv, line)) ++rows;
  CHECK(rows == 2);  // one point, two folds
  CHECK(slurp(grid_json).find("\"best\"") != std::string::npos);

  const std::vector<eval::ExperimentReport> reports = {report};
  const std::string ab_csv = temp_file("scpgcn_eval_ablation.csv");
  const std::string ab_json = temp_file("scpgcn_eval_ablation.json");
  eval::write_ablation_csv(reports, ab_csv);
  eval::write_ablation_json(reports, ab_json);
  std::istringstream acsv(slurp(ab_csv));
  REQUIRE(std::getline(acsv, line));
  CHECK(line == "variant,mean_accuracy,std_accuracy,mean_f1,std_f1");
  CHECK(slurp(ab_json).find("\"variants\"") != std::string::npos);

  for (const auto& path :
       {json_path, csv_path, grid_csv, grid_json, ab_csv, ab_json}) {
    std::filesystem::remove(path);
  }
}

TEST_SUITE_END();
