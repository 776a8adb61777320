#include "scpgcn/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>
#include <string>

#include "scpgcn/rng.hpp"

namespace scpgcn::synthdata {

namespace {

constexpr double kWithinBlockCorrelation = 0.6;
constexpr double kBetweenBlockCorrelation = 0.1;

std::vector<int> block_layout(std::size_t nodes, int blocks) {
  const std::size_t base = nodes / static_cast<std::size_t>(blocks);
  std::vector<int> membership(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    membership[i] = std::min(static_cast<int>(i / base), blocks - 1);
  }
  return membership;
}

linalg::Matrix structural_matrix(const GeneratorConfig& config,
                                 const std::vector<int>& blocks, Rng& rng) {
  const std::size_t n = config.nodes;
  linalg::Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double p = blocks[i] == blocks[j] ? config.p_in : config.p_out;
      if (rng.uniform() < p) {
        const double w = rng.uniform(0.0, config.w_scale);
        a(i, j) = w;
        a(j, i) = w;
      }
    }
  }
  return a;
}

linalg::Matrix functional_matrix(const GeneratorConfig& config,
                                 const std::vector<int>& blocks, int label,
                                 Rng& rng) {
  const std::size_t n = config.nodes;
  linalg::Matrix f(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    f(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      double base = blocks[i] == blocks[j] ? kWithinBlockCorrelation
                                           : kBetweenBlockCorrelation;
      // The planted class signal: class 1 strengthens the correlation
      // between the first two blocks.
      const bool designated_pair =
          (blocks[i] == 0 && blocks[j] == 1) || (blocks[i] == 1 && blocks[j] == 0);
      if (label == 1 && designated_pair) {
        base += config.signal;
      }
      const double value =
          std::clamp(base + config.noise * rng.normal(), -1.0, 1.0);
      f(i, j) = value;
      f(j, i) = value;
    }
  }
  return f;
}

}  // namespace

void validate(const GeneratorConfig& config) {
  if (!(config.p_out >= 0.0 && config.p_out < config.p_in && config.p_in <= 1.0)) {
    throw std::invalid_argument(
        "generator: edge probabilities must satisfy 0 <= p_out < p_in <= 1");
  }
  if (config.signal < 0.0 || config.noise < 0.0) {
    throw std::invalid_argument("generator: signal and noise must be non-negative");
  }
  if (config.communities_true < 1 ||
      config.nodes < static_cast<std::size_t>(config.communities_true)) {
    throw std::invalid_argument(
        "generator: need at least one planted community and nodes >= communities");
  }
  if (config.per_class < 1) {
    throw std::invalid_argument("generator: per_class must be at least 1");
  }
  if (config.w_scale <= 0.0) {
    throw std::invalid_argument("generator: w_scale must be positive");
  }
}

SyntheticDataset generate_dataset(const GeneratorConfig& config) {
  validate(config);
  SyntheticDataset dataset;
  dataset.planted_membership = block_layout(config.nodes, config.communities_true);

  const std::size_t total = 2 * config.per_class;
  dataset.instances.reserve(total);
  for (std::size_t k = 0; k < total; ++k) {
    const int label = k < config.per_class ? 0 : 1;
    Rng rng(Rng::derive(config.seed, k));

    graph::NetworkInstance instance;
    char name[32];
    std::snprintf(name, sizeof(name), "inst-%03zu", k);
    instance.id = name;
    instance.label = label;
    instance.structural = structural_matrix(config, dataset.planted_membership, rng);
    instance.functional =
        functional_matrix(config, dataset.planted_membership, label, rng);
    graph::validate(instance);
    dataset.instances.push_back(std::move(instance));
  }
  return dataset;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_dataset(
    const std::vector<int>& labels, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("split_dataset: train fraction must be in (0, 1)");
  }

  // Group indices per class, preserving ascending order before the shuffle.
  std::vector<int> classes;
  for (int label : labels) {
    if (std::find(classes.begin(), classes.end(), label) == classes.end()) {
      classes.push_back(label);
    }
  }
  std::sort(classes.begin(), classes.end());

  std::vector<std::vector<std::size_t>> groups(classes.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto c = static_cast<std::size_t>(
        std::find(classes.begin(), classes.end(), labels[i]) - classes.begin());
    groups[c].push_back(i);
  }
  for (std::size_t c = 0; c < groups.size(); ++c) {
    if (groups[c].size() < 2) {
      throw std::invalid_argument("split_dataset: class " +
                                  std::to_string(classes[c]) +
                                  " has fewer than 2 members");
    }
  }

  // Largest-remainder apportionment of the train budget across classes,
  // clamped so every class keeps at least one member on each side.
  const auto budget = static_cast<std::size_t>(
      std::floor(train_fraction * static_cast<double>(labels.size())));
  std::vector<std::size_t> take(groups.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < groups.size(); ++c) {
    const double ideal = train_fraction * static_cast<double>(groups[c].size());
    take[c] = static_cast<std::size_t>(std::floor(ideal));
    assigned += take[c];
    remainders.emplace_back(ideal - std::floor(ideal), c);
  }
  std::sort(remainders.begin(), remainders.end(),
            [](const auto& a, const auto& b) {
              if (a.first != b.first) {
                return a.first > b.first;  // biggest remainder first
              }
              return a.second < b.second;  // ties toward the earlier class
            });
  for (std::size_t r = 0; assigned < budget && r < remainders.size(); ++r) {
    ++take[remainders[r].second];
    ++assigned;
  }
  for (std::size_t c = 0; c < groups.size(); ++c) {
    take[c] = std::clamp(take[c], std::size_t{1}, groups[c].size() - 1);
  }

  std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split;
  for (std::size_t c = 0; c < groups.size(); ++c) {
    Rng rng(Rng::derive(seed, c));
    rng.shuffle(groups[c]);
    for (std::size_t k = 0; k < groups[c].size(); ++k) {
      (k < take[c] ? split.first : split.second).push_back(groups[c][k]);
    }
  }
  std::sort(split.first.begin(), split.first.end());
  std::sort(split.second.begin(), split.second.end());
  return split;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_dataset(
    const std::vector<graph::NetworkInstance>& instances, double train_fraction,
    std::uint64_t seed) {
  std::vector<int> labels(instances.size());
  for (std::size_t i = 0; i < instances.size(); ++i) {
    labels[i] = instances[i].label;
  }
  return split_dataset(labels, train_fraction, seed);
}

}  // namespace scpgcn::synthdata
