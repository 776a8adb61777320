// Acceptance suite: one pass/fail line per promised behavior, exit 0 only
// when everything passes. Expects the CLI binary path as argv[1] (used by
// the determinism check). Tolerances and runtime bounds are pinned inline.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "scpgcn/community.hpp"
#include "scpgcn/eval.hpp"
#include "scpgcn/graph.hpp"
#include "scpgcn/linalg.hpp"
#include "scpgcn/model.hpp"
#include "scpgcn/rng.hpp"
#include "scpgcn/synthdata.hpp"
#include "scpgcn/training.hpp"

namespace {

using namespace scpgcn;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

std::string g_cli_path;

double elapsed_seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.3g", value);
  return buffer;
}

int worker_jobs() {
  const unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::min(8u, std::max(1u, hw)));
}

// Symmetric non-negative weighted graph with a zero diagonal; roughly 40%
// of the off-diagonal pairs are zero and node 0 is occasionally isolated.
linalg::Matrix random_graph(Rng& rng, std::size_t n) {
  linalg::Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rng.uniform() < 0.6) {
        const double w = rng.uniform(0.1, 2.0);
        a(i, j) = w;
        a(j, i) = w;
      }
    }
  }
  if (n >= 3 && rng.uniform() < 0.3) {
    for (std::size_t j = 0; j < n; ++j) {
      a(0, j) = 0.0;
      a(j, 0) = 0.0;
    }
  }
  return a;
}

// ---------------------------------------------------------------------------
// 1. Graph operators against dense closed-form oracles
// ---------------------------------------------------------------------------

bool criterion1(std::string& detail) {
  const auto start = Clock::now();
  constexpr double kOperatorTol = 1e-12;
  constexpr double kEigenSlack = 1e-9;
  constexpr double kTimeLimit = 5.0;

  double max_error = 0.0;
  double min_eig = 1e300;
  double max_eig = -1e300;
  for (int trial = 0; trial < 50; ++trial) {
    Rng rng(Rng::derive(101, static_cast<std::uint64_t>(trial)));
    const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform_int(49));
    const linalg::Matrix a = random_graph(rng, n);

    // Oracle for the self-loop-renormalized operator.
    linalg::Matrix p_oracle(n, n);
    {
      std::vector<double> inv_sqrt(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        double degree = 1.0;  // self-loop
        for (std::size_t j = 0; j < n; ++j) {
          degree += a(i, j);
        }
        inv_sqrt[i] = 1.0 / std::sqrt(degree);
      }
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          const double hat = a(i, j) + (i == j ? 1.0 : 0.0);
          p_oracle(i, j) = inv_sqrt[i] * hat * inv_sqrt[j];
        }
      }
    }

    // Oracle for the symmetric normalized Laplacian with identity rows for
    // isolated nodes.
    linalg::Matrix l_oracle(n, n);
    {
      std::vector<double> degree(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          degree[i] += a(i, j);
        }
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (degree[i] == 0.0) {
          l_oracle(i, i) = 1.0;
          continue;
        }
        for (std::size_t j = 0; j < n; ++j) {
          double value = (i == j) ? 1.0 : 0.0;
          if (degree[j] > 0.0) {
            value -= a(i, j) / std::sqrt(degree[i] * degree[j]);
          }
          l_oracle(i, j) = value;
        }
      }
    }

    const linalg::Matrix p = graph::renormalized_propagation(a).matrix();
    const linalg::Matrix l = graph::normalized_laplacian(a);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        max_error = std::max(max_error, std::abs(p(i, j) - p_oracle(i, j)));
        max_error = std::max(max_error, std::abs(l(i, j) - l_oracle(i, j)));
      }
    }

    const linalg::EigenDecomposition eig =
        linalg::symmetric_eigendecomposition(l);
    for (double value : eig.eigenvalues) {
      min_eig = std::min(min_eig, value);
      max_eig = std::max(max_eig, value);
    }
  }

  const double seconds = elapsed_seconds(start);
  const bool ok = max_error <= kOperatorTol && min_eig >= -kEigenSlack &&
                  max_eig <= 2.0 + kEigenSlack && seconds < kTimeLimit;
  detail = "max operator error " + fmt(max_error) + ", Laplacian spectrum [" +
           fmt(min_eig) + ", " + fmt(max_eig) + "], " + fmt(seconds) + "s";
  return ok;
}

// ---------------------------------------------------------------------------
// 2. Eigensolver reconstruction and orthonormality
// ---------------------------------------------------------------------------

bool criterion2(std::string& detail) {
  const auto start = Clock::now();
  constexpr double kTol = 1e-8;
  constexpr double kTimeLimit = 60.0;

  double worst_recon = 0.0;
  double worst_ortho = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    Rng rng(Rng::derive(202, static_cast<std::uint64_t>(trial)));
    const std::size_t n =
        trial == 49 ? 200 : 2 + static_cast<std::size_t>(rng.uniform_int(199));
    linalg::Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        const double value = rng.normal() * 2.0;
        m(i, j) = value;
        m(j, i) = value;
      }
    }

    const linalg::EigenDecomposition eig =
        linalg::symmetric_eigendecomposition(m);
    const linalg::Matrix& v = eig.eigenvectors;

    // Reconstruction error ||V diag(w) V^T - M||_F relative to max(1, ||M||_F).
    linalg::Matrix vw(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        vw(i, j) = v(i, j) * eig.eigenvalues[j];
      }
    }
    const linalg::Matrix recon = linalg::matmul_a_bt(vw, v);
    double diff_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double d = recon(i, j) - m(i, j);
        diff_sq += d * d;
      }
    }
    const double scale = std::max(1.0, linalg::frobenius_norm(m));
    worst_recon = std::max(worst_recon, std::sqrt(diff_sq) / scale);

    const linalg::Matrix vtv = linalg::matmul_at_b(v, v);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double target = (i == j) ? 1.0 : 0.0;
        worst_ortho = std::max(worst_ortho, std::abs(vtv(i, j) - target));
      }
    }
  }

  const double seconds = elapsed_seconds(start);
  const bool ok = worst_recon <= kTol && worst_ortho <= kTol &&
                  seconds < kTimeLimit;
  detail = "worst reconstruction " + fmt(worst_recon) + ", worst orthonormality " +
           fmt(worst_ortho) + ", " + fmt(seconds) + "s";
  return ok;
}

// ---------------------------------------------------------------------------
// 3. Loss functions on closed-form cases
// ---------------------------------------------------------------------------

bool criterion3(std::string& detail) {
  constexpr double kTol = 1e-12;
  double worst = 0.0;
  auto record = [&worst](double actual, double expected) {
    worst = std::max(worst, std::abs(actual - expected));
  };

  const std::vector<double> g{0.3, -0.7, 0.2};
  record(model::contrastive_loss(g, g, 1, 0.5), 0.0);
  record(model::contrastive_loss(g, g, 0, 0.5), 0.125);
  const std::vector<double> g_i{0.0, 0.0};
  const std::vector<double> g_j{1.0, 0.0};
  record(model::contrastive_loss(g_i, g_j, 0, 0.5), 0.0);

  // Identical rows: both community terms vanish.
  linalg::Matrix z_same(4, 3);
  for (std::size_t i = 0; i < 4; ++i) {
    z_same(i, 0) = 0.5;
    z_same(i, 1) = -1.0;
    z_same(i, 2) = 2.0;
  }
  const community::CommunityAssignment two_groups =
      community::make_assignment({0, 1, 0, 1}, 2);
  record(model::community_preserving_loss(z_same, two_groups, 0.7, 0.3), 0.0);

  // Single community: no center pairs, so only the compactness term remains.
  linalg::Matrix z_line(2, 1);
  z_line(0, 0) = 0.0;
  z_line(1, 0) = 2.0;
  const community::CommunityAssignment one_group =
      community::make_assignment({0, 0}, 1);
  record(model::community_preserving_loss(z_line, one_group, 0.7, 0.3), 0.7);

  // Two singleton communities at distance 2: loss is -beta * 4.
  const community::CommunityAssignment singletons =
      community::make_assignment({0, 1}, 2);
  record(model::community_preserving_loss(z_line, singletons, 1.0, 1.0), -4.0);

  detail = "worst deviation " + fmt(worst);
  return worst <= kTol;
}

// ---------------------------------------------------------------------------
// 4. Analytic gradients against central finite differences
// ---------------------------------------------------------------------------

graph::NetworkInstance random_instance(const std::string& id, std::size_t n,
                                       int label, std::uint64_t seed) {
  Rng rng(seed);
  linalg::Matrix structural(n, n);
  linalg::Matrix functional(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    functional(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rng.uniform() >= 0.3) {
        const double w = rng.uniform(0.0, 2.0);
        structural(i, j) = w;
        structural(j, i) = w;
      }
      const double c = rng.uniform(-0.9, 0.9);
      functional(i, j) = c;
      functional(j, i) = c;
    }
  }
  return graph::NetworkInstance{id, structural, functional, label};
}

bool criterion4(std::string& detail) {
  const auto start = Clock::now();
  constexpr double kStep = 1e-5;
  constexpr double kTol = 1e-4;
  constexpr double kTimeLimit = 30.0;

  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::uint64_t seed = Rng::derive(404, static_cast<std::uint64_t>(trial));
    training::TrainConfig config;
    config.alpha = 0.2;
    config.beta = 0.15;
    config.communities = 2;
    config.hidden1 = 6;
    config.hidden2 = 5;
    config.embed_dim = 3;
    config.activation = model::Activation::tanh;
    config.seed = seed;
    const int y = trial % 2;
    config.margin = (y == 1) ? 0.5 : 8.0;  // engage the hinge on unlike pairs

    community::AssignmentCache cache;
    const std::vector<graph::NetworkInstance> raw{
        random_instance("a", 8, 1, Rng::derive(seed, 11)),
        random_instance("b", 8, y, Rng::derive(seed, 12)),
    };
    std::vector<training::PreparedInstance> prepared;
    prepared.push_back(training::prepare_instance(raw[0], config, &cache));
    prepared.push_back(training::prepare_instance(raw[1], config, &cache));

    model::ScpGcnModel m = model::init_model(8, 6, 5, 3, config.activation,
                                             Rng::derive(seed, 13));
    const model::InstancePair pair{0, 1, y};
    const training::PairLossBreakdown analytic =
        training::loss_gradients(pair, prepared, m, config);

    auto check_span = [&](std::span<double> params, std::span<const double> grads) {
      for (std::size_t k = 0; k < params.size(); ++k) {
        const double saved = params[k];
        params[k] = saved + kStep;
        const double plus =
            training::loss_gradients(pair, prepared, m, config).total;
        params[k] = saved - kStep;
        const double minus =
            training::loss_gradients(pair, prepared, m, config).total;
        params[k] = saved;
        const double fd = (plus - minus) / (2.0 * kStep);
        const double an = grads[k];
        const double denom = std::max({1e-4, std::abs(fd), std::abs(an)});
        worst = std::max(worst, std::abs(fd - an) / denom);
      }
    };
    check_span(m.theta0.entries(), analytic.gradients.theta0.entries());
    check_span(m.theta1.entries(), analytic.gradients.theta1.entries());
    check_span(m.fc_weights.entries(), analytic.gradients.fc_weights.entries());
    check_span(m.fc_bias, analytic.gradients.fc_bias);
  }

  const double seconds = elapsed_seconds(start);
  const bool ok = worst <= kTol && seconds < kTimeLimit;
  detail = "max relative gradient error " + fmt(worst) + ", " + fmt(seconds) + "s";
  return ok;
}

// ---------------------------------------------------------------------------
// 5. Community recovery on planted block models
// ---------------------------------------------------------------------------

bool criterion5(std::string& detail) {
  const auto start = Clock::now();
  constexpr double kTimeLimit = 30.0;
  const std::size_t n = 60;
  const int c_true = 3;
  const double p_in = 0.9;
  const double p_out = 0.05;

  std::vector<int> planted(n);
  for (std::size_t i = 0; i < n; ++i) {
    planted[i] = static_cast<int>(i / (n / c_true));
  }

  int hits = 0;
  double worst_hit_ari = 1.0;
  for (int s = 0; s < 20; ++s) {
    Rng rng(Rng::derive(505, static_cast<std::uint64_t>(s)));
    linalg::Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double p = planted[i] == planted[j] ? p_in : p_out;
        if (rng.uniform() < p) {
          a(i, j) = 1.0;
          a(j, i) = 1.0;
        }
      }
    }
    const community::CommunityAssignment found = community::spectral_communities(
        a, c_true, static_cast<std::uint64_t>(s));
    const double ari = community::adjusted_rand_index(found.membership, planted);
    if (ari >= 0.95) {
      ++hits;
      worst_hit_ari = std::min(worst_hit_ari, ari);
    }
  }

  // Three disjoint cliques must be recovered exactly.
  const std::vector<int> block_sizes{5, 6, 7};
  const std::size_t total = 18;
  linalg::Matrix cliques(total, total);
  std::vector<int> clique_labels(total);
  std::size_t offset = 0;
  int label = 0;
  for (int size : block_sizes) {
    for (std::size_t i = offset; i < offset + static_cast<std::size_t>(size); ++i) {
      clique_labels[i] = label;
      for (std::size_t j = i + 1; j < offset + static_cast<std::size_t>(size); ++j) {
        cliques(i, j) = 1.0;
        cliques(j, i) = 1.0;
      }
    }
    offset += static_cast<std::size_t>(size);
    ++label;
  }
  const community::CommunityAssignment clique_found =
      community::spectral_communities(cliques, 3, 1234);
  const double clique_ari =
      community::adjusted_rand_index(clique_found.membership, clique_labels);

  const double seconds = elapsed_seconds(start);
  const bool ok = hits >= 18 && clique_ari == 1.0 && seconds < kTimeLimit;
  detail = std::to_string(hits) + "/20 seeds at ARI >= 0.95, disjoint cliques ARI " +
           fmt(clique_ari) + ", " + fmt(seconds) + "s";
  return ok;
}

// ---------------------------------------------------------------------------
// Shared setup for the end-to-end experiments (criteria 6, 7, 8, 10)
// ---------------------------------------------------------------------------

synthdata::SyntheticDataset make_eval_dataset(double signal, std::uint64_t seed) {
  synthdata::GeneratorConfig config;
  config.nodes = 60;
  config.communities_true = 4;
  config.p_in = 0.7;
  config.p_out = 0.1;
  config.w_scale = 1.0;
  config.signal = signal;
  config.noise = 0.1;
  config.per_class = 20;
  config.seed = seed;
  return synthdata::generate_dataset(config);
}

// Deliberately light: a few epochs at moderate width keep every variant in
// a stable, non-degenerate regime so the comparisons below measure the
// architecture switches rather than optimization noise.
training::TrainConfig experiment_config() {
  training::TrainConfig config;
  config.alpha = 0.05;
  config.beta = 0.01;
  config.margin = 0.5;
  config.learning_rate = 0.01;
  config.epochs = 4;
  config.communities = 4;
  config.hidden1 = 16;
  config.hidden2 = 8;
  config.embed_dim = 8;
  config.activation = model::Activation::relu;
  config.seed = 2026;
  return config;
}

// One chain link "hi should not lose to lo": at most one repeat where hi is
// strictly below lo, and the means may differ by at most the slack.
bool ordering_holds(const eval::ExperimentReport& hi,
                    const eval::ExperimentReport& lo, double slack,
                    int max_violations, std::string& note) {
  int violations = 0;
  for (std::size_t r = 0; r < hi.accuracy.per_repeat.size(); ++r) {
    if (hi.accuracy.per_repeat[r] < lo.accuracy.per_repeat[r]) {
      ++violations;
    }
  }
  const bool mean_ok = hi.accuracy.mean >= lo.accuracy.mean - slack;
  note += hi.variant + ">=" + lo.variant + " (means " + fmt(hi.accuracy.mean) +
          " vs " + fmt(lo.accuracy.mean) + ", " + std::to_string(violations) +
          " flips) ";
  return mean_ok && violations <= max_violations;
}

bool criterion6(std::string& detail) {
  const auto start = Clock::now();
  constexpr double kTimeLimit = 900.0;
  constexpr double kSlack = 0.02;
  constexpr int kMaxViolations = 1;

  const synthdata::SyntheticDataset data = make_eval_dataset(0.4, 8080);
  const training::TrainConfig config = experiment_config();
  std::map<std::string, eval::ExperimentReport> reports;
  for (const char* variant : {"GCN", "CP-GCN", "S-GCN", "SCP-GCN"}) {
    reports[variant] = eval::run_experiment(data.instances, variant, config,
                                            10, 0.8, worker_jobs());
  }

  std::string note;
  bool ok = true;
  ok &= ordering_holds(reports["SCP-GCN"], reports["S-GCN"], kSlack,
                       kMaxViolations, note);
  ok &= ordering_holds(reports["S-GCN"], reports["GCN"], kSlack,
                       kMaxViolations, note);
  ok &= ordering_holds(reports["SCP-GCN"], reports["CP-GCN"], kSlack,
                       kMaxViolations, note);
  ok &= ordering_holds(reports["CP-GCN"], reports["GCN"], kSlack,
                       kMaxViolations, note);

  const double seconds = elapsed_seconds(start);
  ok = ok && seconds < kTimeLimit;
  detail = note + fmt(seconds) + "s";
  return ok;
}

bool criterion7(std::string& detail) {
  const auto start = Clock::now();
  constexpr double kTimeLimit = 900.0;
  constexpr double kGap = 0.05;

  const synthdata::SyntheticDataset data = make_eval_dataset(0.4, 8080);
  const training::TrainConfig config = experiment_config();
  const eval::ExperimentReport proposed = eval::run_experiment(
      data.instances, "SCP-GCN-DTI-fMRI", config, 10, 0.8, worker_jobs());
  const eval::ExperimentReport structural_only = eval::run_experiment(
      data.instances, "SCP-GCN-DTI", config, 10, 0.8, worker_jobs());

  const double seconds = elapsed_seconds(start);
  const bool ok = proposed.accuracy.mean >=
                      structural_only.accuracy.mean + kGap &&
                  seconds < kTimeLimit;
  detail = "structure+function " + fmt(proposed.accuracy.mean) +
           " vs structure-only " + fmt(structural_only.accuracy.mean) + ", " +
           fmt(seconds) + "s";
  return ok;
}

bool criterion8(std::string& detail) {
  const auto start = Clock::now();
  constexpr double kTimeLimit = 1200.0;

  // A subtle class signal on crisp four-block graphs, learned by the
  // community-regularized single-branch model. Matching the clustering
  // count to the planted blocks gives consistent assignments across
  // instances; mismatched counts merge or split blocks differently per
  // instance, which degrades the learned embedding.
  synthdata::GeneratorConfig gen;
  gen.nodes = 60;
  gen.communities_true = 4;
  gen.p_in = 0.8;
  gen.p_out = 0.05;
  gen.w_scale = 1.0;
  gen.signal = 0.15;
  gen.noise = 0.15;
  gen.per_class = 30;
  gen.seed = 7171;
  const synthdata::SyntheticDataset data = synthdata::generate_dataset(gen);

  training::TrainConfig base;
  base.alpha = 6.0;
  base.beta = 1.0;
  base.margin = 0.5;
  base.learning_rate = 0.01;
  base.epochs = 60;
  base.hidden1 = 16;
  base.hidden2 = 8;
  base.embed_dim = 8;
  base.use_siamese = false;
  base.activation = model::Activation::relu;

  const std::vector<double> alpha_grid{base.alpha};
  const std::vector<double> beta_grid{base.beta};
  const std::vector<int> c_grid{2, 3, 4, 5, 6, 7, 8, 9, 10};

  int hits = 0;
  std::map<int, int> histogram;
  for (int s = 1; s <= 10; ++s) {
    training::TrainConfig seeded = base;
    seeded.seed = static_cast<std::uint64_t>(s);
    const eval::GridSearchResult result = eval::grid_search(
        data.instances, alpha_grid, beta_grid, c_grid, 3, seeded, worker_jobs());
    ++histogram[result.best_communities];
    if (result.best_communities >= 3 && result.best_communities <= 5) {
      ++hits;
    }
  }

  std::string spread;
  for (const auto& [c, count] : histogram) {
    spread += "C=" + std::to_string(c) + ":" + std::to_string(count) + " ";
  }
  const double seconds = elapsed_seconds(start);
  const bool ok = hits >= 7 && seconds < kTimeLimit;
  detail = std::to_string(hits) + "/10 seeds picked C in {3,4,5} (" + spread +
           "), " + fmt(seconds) + "s";
  return ok;
}

// ---------------------------------------------------------------------------
// 9. CLI determinism: identical invocations give identical bytes
// ---------------------------------------------------------------------------

int run_cli(const std::string& args) {
  const std::string command = "\"" + g_cli_path + "\" " + args +
                              " > /dev/null 2>&1";
  return std::system(command.c_str());
}

bool directories_identical(const fs::path& a, const fs::path& b,
                           std::string& mismatch) {
  auto listing = [](const fs::path& root) {
    std::vector<std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
      if (entry.is_regular_file()) {
        files.push_back(fs::relative(entry.path(), root).generic_string());
      }
    }
    std::sort(files.begin(), files.end());
    return files;
  };
  const std::vector<std::string> files_a = listing(a);
  const std::vector<std::string> files_b = listing(b);
  if (files_a != files_b) {
    mismatch = "file lists differ";
    return false;
  }
  for (const std::string& file : files_a) {
    std::ifstream fa(a / file, std::ios::binary);
    std::ifstream fb(b / file, std::ios::binary);
    std::string ca((std::istreambuf_iterator<char>(fa)),
                   std::istreambuf_iterator<char>());
    std::string cb((std::istreambuf_iterator<char>(fb)),
                   std::istreambuf_iterator<char>());
    if (ca != cb) {
      mismatch = "content differs: " + file;
      return false;
    }
  }
  return true;
}

bool criterion9(std::string& detail) {
  const auto start = Clock::now();
  const fs::path root = fs::temp_directory_path() / "scpgcn-acceptance-cli";
  std::error_code ec;
  fs::remove_all(root, ec);
  fs::create_directories(root);

  bool all_ran = true;
  for (int round = 1; round <= 2; ++round) {
    const std::string r = (root / ("r" + std::to_string(round))).string();
    const std::string ds = r + "/ds";
    const std::string manifest = ds + "/manifest.json";
    const std::vector<std::string> invocations{
        "generate --n 12 --per-class 3 --communities 2 --p-in 0.8 --p-out 0.1"
        " --signal 0.6 --noise 0.1 --seed 5 --out " + ds,
        "cluster --manifest " + manifest + " --communities 2 --seed 3 --out " +
            r + "/cl",
        "train --manifest " + manifest + " --epochs 3 --hidden1 6 --hidden2 4"
        " --embed-dim 3 --communities 2 --seed 1 --out " + r + "/tr",
        "embed --manifest " + manifest + " --model " + r + "/tr/model.json" +
            " --out " + r + "/em",
        "evaluate --manifest " + manifest + " --variant scp-gcn --epochs 3"
        " --hidden1 6 --hidden2 4 --embed-dim 3 --communities 2 --repeats 2"
        " --jobs 2 --seed 2 --out " + r + "/ev",
        "gridsearch --manifest " + manifest + " --epochs 2 --hidden1 6"
        " --hidden2 4 --embed-dim 3 --alpha-grid 0.1 --beta-grid 0.1"
        " --c-grid 2,3 --folds 2 --jobs 2 --seed 4 --out " + r + "/gs",
        "ablate --manifest " + manifest + " --epochs 2 --hidden1 6 --hidden2 4"
        " --embed-dim 3 --communities 2 --repeats 2 --jobs 2 --seed 6 --out " +
            r + "/ab",
    };
    for (const std::string& args : invocations) {
      if (run_cli(args) != 0) {
        all_ran = false;
        detail = "command failed: " + args.substr(0, args.find(' '));
      }
    }
  }

  bool identical = false;
  std::string mismatch;
  if (all_ran) {
    identical = directories_identical(root / "r1", root / "r2", mismatch);
    if (!identical) {
      detail = mismatch;
    }
  }
  fs::remove_all(root, ec);

  const double seconds = elapsed_seconds(start);
  if (all_ran && identical) {
    detail = "7 subcommands, repeated runs byte-identical, " + fmt(seconds) + "s";
  }
  return all_ran && identical;
}

bool criterion10(std::string& detail) {
  const auto start = Clock::now();
  const synthdata::SyntheticDataset data = make_eval_dataset(0.0, 9090);
  const training::TrainConfig config = experiment_config();
  const eval::ExperimentReport report = eval::run_experiment(
      data.instances, "SCP-GCN", config, 10, 0.8, worker_jobs());

  const double mean = report.accuracy.mean;
  const double seconds = elapsed_seconds(start);
  const bool ok = mean >= 0.35 && mean <= 0.65;
  detail = "mean accuracy " + fmt(mean) + " on zero-signal data, " +
           fmt(seconds) + "s";
  return ok;
}

struct Criterion {
  int id;
  const char* name;
  bool (*run)(std::string&);
};

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <path-to-cli-binary> [--only id,id,...]\n";
    return 2;
  }
  g_cli_path = argv[1];
  if (!fs::exists(g_cli_path)) {
    std::cerr << "CLI binary not found: " << g_cli_path << "\n";
    return 2;
  }
  std::set<int> only;
  if (argc >= 4 && std::string(argv[2]) == "--only") {
    std::string list = argv[3];
    for (char& c : list) {
      if (c == ',') {
        c = ' ';
      }
    }
    std::istringstream stream(list);
    int id = 0;
    while (stream >> id) {
      only.insert(id);
    }
  }

  const std::vector<Criterion> criteria{
      {1, "graph operators match dense oracles", criterion1},
      {2, "eigensolver reconstructs and stays orthonormal", criterion2},
      {3, "losses match closed-form cases", criterion3},
      {4, "analytic gradients match finite differences", criterion4},
      {5, "spectral clustering recovers planted communities", criterion5},
      {6, "full model dominates its ablations", criterion6},
      {7, "structure+function beats structure-only views", criterion7},
      {8, "community-count sweep peaks near the true count", criterion8},
      {9, "CLI runs are byte-for-byte reproducible", criterion9},
      {10, "zero-signal data yields chance-level accuracy", criterion10},
  };

  int failures = 0;
  for (const Criterion& criterion : criteria) {
    if (!only.empty() && only.count(criterion.id) == 0) {
      continue;
    }
    std::string detail;
    bool ok = false;
    try {
      ok = criterion.run(detail);
    } catch (const std::exception& error) {
      detail = std::string("exception: ") + error.what();
    }
    if (!ok) {
      ++failures;
    }
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << criterion.id
              << ": " << criterion.name << " (" << detail << ")\n";
    std::cout.flush();
  }

  if (failures > 0) {
    std::cout << failures << " criteria failed\n";
    return 1;
  }
  std::cout << "all criteria passed\n";
  return 0;
}
