#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "scpgcn/community.hpp"
#include "scpgcn/graph.hpp"
#include "scpgcn/linalg.hpp"
#include "scpgcn/model.hpp"

namespace scpgcn::training {

/// Full training configuration. The view flags choose which network feeds
/// the propagation operator and which supplies node features; the ablation
/// flags turn the Siamese pairing and the community term on or off.
struct TrainConfig {
  double alpha = 0.1;
  double beta = 0.1;
  double margin = 0.5;
  double learning_rate = 0.01;
  int epochs = 200;
  int communities = 4;
  std::size_t hidden1 = 256;
  std::size_t hidden2 = 128;
  std::size_t embed_dim = 64;
  graph::ViewKind view_structure = graph::ViewKind::structural;
  graph::ViewKind view_features = graph::ViewKind::functional;
  bool use_siamese = true;
  bool use_cp = true;
  bool normalize_structural = false;
  std::uint64_t seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  model::Activation activation = model::Activation::relu;

  bool operator==(const TrainConfig& other) const = default;
};

/// Throws std::invalid_argument unless margin, learning_rate > 0,
/// epochs >= 1, communities >= 1, alpha, beta >= 0, and all widths > 0.
void validate(const TrainConfig& config);

/// Every unordered index pair over the labels, tagged y=1 when the labels
/// agree. Pairs come out in lexicographic (i, j) order; shuffling is the
/// training loop's job. Throws when fewer than 2 labels are given.
std::vector<model::InstancePair> make_pairs(const std::vector<int>& labels);

/// An instance readied for the encoder: the chosen structure view turned
/// into a propagation operator, the chosen feature view, the cached product
/// propagation * features, and (when community preservation is on) the
/// instance's community assignment.
struct PreparedInstance {
  std::string id;
  linalg::Matrix propagation;
  linalg::Matrix features;
  linalg::Matrix px;
  int label = 0;
  const community::CommunityAssignment* assignment = nullptr;
};

/// Builds a PreparedInstance per the config's view flags. When `cache` is
/// non-null the structure view is clustered into config.communities
/// communities (seeded by config.seed) through the cache; pass null when the
/// community term is unused.
PreparedInstance prepare_instance(const graph::NetworkInstance& instance,
                                  const TrainConfig& config,
                                  community::AssignmentCache* cache);

/// Gradients shaped like the model's parameters.
struct GradientSet {
  linalg::Matrix theta0;
  linalg::Matrix theta1;
  linalg::Matrix fc_weights;
  std::vector<double> fc_bias;
};

GradientSet zero_gradients(const model::ScpGcnModel& m);

/// Loss value and gradient of one pair's term of the training objective:
/// the contrastive loss between the two branch embeddings plus both
/// instances' community-preserving losses. Gradients from the two branches
/// accumulate into one set because the branches share parameters.
struct PairLossBreakdown {
  double total = 0.0;
  double contrastive = 0.0;
  double community = 0.0;
  GradientSet gradients;
};

/// Reverse-mode differentiation through both encoder branches. The ReLU
/// subgradient at 0 is taken as 0; a zero-distance different-class pair
/// contributes zero gradient from the hinge. Requires assignments on both
/// instances unless alpha and beta are both zero. Throws naming the
/// offending term if the loss turns non-finite.
PairLossBreakdown loss_gradients(const model::InstancePair& pair,
                                 const std::vector<PreparedInstance>& instances,
                                 const model::ScpGcnModel& m,
                                 const TrainConfig& config);

/// First and second moment estimates for one parameter tensor.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
};

/// Standard bias-corrected update, applied in place. `t` is the 1-based
/// step count shared by all tensors of one training run. The state vectors
/// are sized on first use and must keep matching afterwards.
void adam_step(std::span<double> params, std::span<const double> grads,
               AdamState& state, double learning_rate, double beta1,
               double beta2, double epsilon, long t);

/// Per-epoch means over the optimizer steps. The pairwise column carries
/// the contrastive loss in Siamese mode and the classification-head loss in
/// single-branch mode.
struct EpochStats {
  double mean_loss = 0.0;
  double mean_pairwise = 0.0;
  double mean_community = 0.0;
};

struct TrainResult {
  model::ScpGcnModel trained;
  std::vector<EpochStats> history;
  // Sigmoid classification head, trained jointly in single-branch mode
  // (empty weights in Siamese mode).
  std::vector<double> head_weights;
  double head_bias = 0.0;
};

/// Trains on the given instances (the caller picks the split). Siamese mode
/// walks all label pairs once per epoch in a seeded shuffled order, one
/// optimizer step per pair; single-branch mode walks instances the same way
/// under a jointly trained sigmoid head with binary cross entropy. With
/// use_cp off, alpha and beta are forced to zero and no clustering runs.
/// Deterministic: a fixed (instances, config) always yields identical
/// parameters and history.
TrainResult train(const std::vector<graph::NetworkInstance>& instances,
                  const TrainConfig& config);

/// Writes history as CSV with header epoch,mean_loss,mean_contrastive,mean_cp.
void write_history_csv(const std::vector<EpochStats>& history,
                       const std::string& path);

}  // namespace scpgcn::training
