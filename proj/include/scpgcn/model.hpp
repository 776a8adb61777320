#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "scpgcn/community.hpp"
#include "scpgcn/graph.hpp"
#include "scpgcn/linalg.hpp"

namespace scpgcn::model {

enum class Activation { relu, tanh };

Activation activation_from_name(const std::string& name);
std::string activation_name(Activation activation);

/// Two graph-convolution layers followed by one per-node fully connected
/// layer with shared weights. The FC output is the node embedding; no
/// activation is applied to it.
struct ScpGcnModel {
  linalg::Matrix theta0;        // input_dim x hidden1
  linalg::Matrix theta1;        // hidden1 x hidden2
  linalg::Matrix fc_weights;    // hidden2 x embed_dim
  std::vector<double> fc_bias;  // embed_dim
  Activation activation = Activation::relu;
};

/// Checks width consistency across layers and finiteness of every
/// parameter; throws std::invalid_argument on violation.
void validate(const ScpGcnModel& model);

/// Glorot-uniform initialization (bias starts at zero); deterministic for a
/// fixed seed.
ScpGcnModel init_model(std::size_t input_dim, std::size_t hidden1,
                       std::size_t hidden2, std::size_t embed_dim,
                       Activation activation, std::uint64_t seed);

/// Node embeddings plus their row-major concatenation into one vector that
/// represents the whole graph.
struct EmbeddingResult {
  linalg::Matrix node_embeddings;       // n x embed_dim
  std::vector<double> graph_embedding;  // length n * embed_dim
};

/// Intermediate activations kept for reverse-mode differentiation.
struct ForwardTrace {
  linalg::Matrix h1;   // conv1 output, n x hidden1
  linalg::Matrix ph1;  // propagated conv1 output, n x hidden1
  linalg::Matrix h2;   // conv2 output, n x hidden2
  linalg::Matrix z;    // fc output (node embeddings), n x embed_dim
};

/// Runs the encoder given the propagation operator applied to the features
/// (px = P * X, which callers may cache since X never changes per instance).
/// Throws naming the layer (conv1, conv2, fc) if any output is non-finite.
ForwardTrace forward_trace(const linalg::Matrix& p, const linalg::Matrix& px,
                           const ScpGcnModel& model);

/// Full encoder pass: conv1 and conv2 each propagate with P and apply the
/// model activation; the per-node FC layer then maps to embed_dim.
EmbeddingResult gcn_forward(const graph::PropagationMatrix& p,
                            const linalg::Matrix& x, const ScpGcnModel& model);

/// Derivative of the activation expressed through its output value (valid
/// for both supported activations; the ReLU subgradient at 0 is 0).
double activation_gradient_from_output(double output, Activation activation);

/// Pairwise metric loss: same-class pairs (y=1) pay half their squared
/// embedding distance; different-class pairs (y=0) pay half the squared
/// hinge shortfall below the margin. Always non-negative.
double contrastive_loss(std::span<const double> g_i, std::span<const double> g_j,
                        int y, double margin);

/// alpha * (mean squared distance of each node to its community center,
/// summed over communities) minus beta * (summed squared distances between
/// all unordered center pairs). May be negative.
double community_preserving_loss(const linalg::Matrix& z,
                                 const community::CommunityAssignment& assignment,
                                 double alpha, double beta);

/// One training pair: indices into a batch's instance list plus the
/// same-class indicator.
struct InstancePair {
  std::size_t i = 0;
  std::size_t j = 0;
  int y = 0;

  bool operator==(const InstancePair& other) const = default;
};

/// Sum of contrastive losses over the pairs plus one community-preserving
/// term per distinct instance appearing in the batch (an instance in many
/// pairs is still counted once). `assignments[k]` may be null only for
/// instances no pair references.
double total_loss(const std::vector<InstancePair>& pairs,
                  const std::vector<EmbeddingResult>& embeddings,
                  const std::vector<const community::CommunityAssignment*>& assignments,
                  double alpha, double beta, double margin);

/// JSON checkpoint holding widths, activation, and flattened parameters.
void save_model(const ScpGcnModel& model, const std::string& path);

/// Loads a checkpoint and re-validates all shape invariants.
ScpGcnModel load_model(const std::string& path);

}  // namespace scpgcn::model
