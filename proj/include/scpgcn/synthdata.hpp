#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "scpgcn/graph.hpp"

namespace scpgcn::synthdata {

/// Controls for the paired-network generator. Structural networks are
/// stochastic block models with planted communities; functional networks are
/// block-correlation matrices whose class signal lives in one designated
/// block pair.
struct GeneratorConfig {
  std::size_t nodes = 90;
  int communities_true = 4;
  double p_in = 0.7;
  double p_out = 0.1;
  double w_scale = 1.0;   // structural edge weights drawn from U(0, w_scale)
  double signal = 0.4;    // class-1 correlation shift on the designated block pair
  double noise = 0.1;     // per-entry std of the functional noise
  std::size_t per_class = 20;
  std::uint64_t seed = 0;
};

/// Throws std::invalid_argument unless 0 <= p_out < p_in <= 1, signal and
/// noise are non-negative, nodes >= communities_true >= 1, per_class >= 1,
/// and w_scale > 0.
void validate(const GeneratorConfig& config);

struct SyntheticDataset {
  std::vector<graph::NetworkInstance> instances;  // per_class of each label
  std::vector<int> planted_membership;            // shared block layout
};

/// Deterministic per (config, seed). Blocks are equal-sized with the
/// remainder going to the last block. Structural edges appear with
/// probability p_in inside blocks and p_out across, weighted U(0, w_scale),
/// zero diagonal. Functional matrices start from baseline correlations
/// (1 on the diagonal, 0.6 within blocks, 0.1 across) with the correlation
/// between blocks 0 and 1 shifted by +signal for class-1 instances, then
/// add symmetric Gaussian noise and clip to [-1, 1], restoring the unit
/// diagonal.
SyntheticDataset generate_dataset(const GeneratorConfig& config);

/// Seeded stratified split: every class lands in both sides, the train side
/// holds roughly train_fraction of each class (largest-remainder rounding
/// toward a total of floor(train_fraction * N)), and both index lists come
/// back sorted ascending. Throws if any class has fewer than 2 members.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_dataset(
    const std::vector<int>& labels, double train_fraction, std::uint64_t seed);

/// Convenience overload reading labels off the instances.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_dataset(
    const std::vector<graph::NetworkInstance>& instances, double train_fraction,
    std::uint64_t seed);

}  // namespace scpgcn::synthdata
