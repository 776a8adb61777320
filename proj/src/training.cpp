#include "scpgcn/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>

#include "scpgcn/rng.hpp"

namespace scpgcn::training {

namespace {

// Seed-stream layout for one training run: 0 = parameter init, 1 = head
// init, 2+e = the shuffle for epoch e.
constexpr std::uint64_t kInitStream = 0;
constexpr std::uint64_t kHeadStream = 1;
constexpr std::uint64_t kEpochStreamBase = 2;

double sigmoid(double s) { return 1.0 / (1.0 + std::exp(-s)); }

// log(1 + exp(s)) without overflow for large |s|.
double softplus(double s) {
  return s > 0.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
}

/// Adds the community-preserving gradient to dz and returns the loss value.
/// Both follow from differentiating the compactness and separation terms
/// through the community means (the mean's own dependence on each member
/// cancels inside the compactness term).
double add_community_gradient(const linalg::Matrix& z,
                              const community::CommunityAssignment& assignment,
                              double alpha, double beta, linalg::Matrix& dz) {
  const std::size_t d = z.cols();
  const linalg::Matrix centers = community_centers(z, assignment);
  const auto c_count = static_cast<std::size_t>(assignment.C);

  std::vector<double> center_sum(d, 0.0);
  for (std::size_t c = 0; c < c_count; ++c) {
    for (std::size_t k = 0; k < d; ++k) {
      center_sum[k] += centers(c, k);
    }
  }

  for (std::size_t c = 0; c < c_count; ++c) {
    const auto& members = assignment.sets[c];
    const auto size = static_cast<double>(members.size());
    const double* center = centers.row(c);
    for (int node : members) {
      const double* row = z.row(static_cast<std::size_t>(node));
      double* grad = dz.row(static_cast<std::size_t>(node));
      for (std::size_t k = 0; k < d; ++k) {
        grad[k] += alpha * (2.0 / size) * (row[k] - center[k]);
        grad[k] -= beta * (2.0 / size) *
                   (static_cast<double>(c_count) * center[k] - center_sum[k]);
      }
    }
  }

  return model::community_preserving_loss(z, assignment, alpha, beta);
}

/// Reverse pass through one encoder branch, accumulating into `grads`.
void backpropagate(const PreparedInstance& instance,
                   const model::ForwardTrace& trace, const linalg::Matrix& dz,
                   const model::ScpGcnModel& m, GradientSet& grads) {
  // fc layer: z = h2 * W + b
  {
    const linalg::Matrix dw = matmul_at_b(trace.h2, dz);
    for (std::size_t i = 0; i < dw.size(); ++i) {
      grads.fc_weights.entries()[i] += dw.entries()[i];
    }
    // Finish each branch's column sum before touching the accumulator so a
    // swapped pair adds the same two values in either order.
    std::vector<double> bias(dz.cols(), 0.0);
    for (std::size_t i = 0; i < dz.rows(); ++i) {
      const double* row = dz.row(i);
      for (std::size_t k = 0; k < dz.cols(); ++k) {
        bias[k] += row[k];
      }
    }
    for (std::size_t k = 0; k < bias.size(); ++k) {
      grads.fc_bias[k] += bias[k];
    }
  }
  linalg::Matrix dh2 = matmul_a_bt(dz, m.fc_weights);

  // conv2: h2 = act(ph1 * theta1)
  for (std::size_t i = 0; i < dh2.size(); ++i) {
    dh2.entries()[i] *= model::activation_gradient_from_output(
        trace.h2.entries()[i], m.activation);
  }
  {
    const linalg::Matrix dtheta1 = matmul_at_b(trace.ph1, dh2);
    for (std::size_t i = 0; i < dtheta1.size(); ++i) {
      grads.theta1.entries()[i] += dtheta1.entries()[i];
    }
  }
  const linalg::Matrix dph1 = matmul_a_bt(dh2, m.theta1);

  // propagation: ph1 = p * h1, and p is symmetric
  linalg::Matrix dh1 = matmul(instance.propagation, dph1);

  // conv1: h1 = act(px * theta0)
  for (std::size_t i = 0; i < dh1.size(); ++i) {
    dh1.entries()[i] *= model::activation_gradient_from_output(
        trace.h1.entries()[i], m.activation);
  }
  {
    const linalg::Matrix dtheta0 = matmul_at_b(instance.px, dh1);
    for (std::size_t i = 0; i < dtheta0.size(); ++i) {
      grads.theta0.entries()[i] += dtheta0.entries()[i];
    }
  }
}

struct OptimizerStates {
  AdamState theta0, theta1, fc_weights, fc_bias, head_weights, head_bias;
};

}  // namespace

void validate(const TrainConfig& config) {
  if (config.margin <= 0.0) {
    throw std::invalid_argument("train config: margin must be positive");
  }
  if (config.learning_rate <= 0.0) {
    throw std::invalid_argument("train config: learning rate must be positive");
  }
  if (config.epochs < 1) {
    throw std::invalid_argument("train config: epochs must be at least 1");
  }
  if (config.communities < 1) {
    throw std::invalid_argument("train config: community count must be at least 1");
  }
  if (config.alpha < 0.0 || config.beta < 0.0) {
    throw std::invalid_argument(
        "train config: community weights must be non-negative");
  }
  if (config.hidden1 == 0 || config.hidden2 == 0 || config.embed_dim == 0) {
    throw std::invalid_argument("train config: layer widths must be positive");
  }
}

std::vector<model::InstancePair> make_pairs(const std::vector<int>& labels) {
  if (labels.size() < 2) {
    throw std::invalid_argument("make_pairs: need at least 2 instances");
  }
  std::vector<model::InstancePair> pairs;
  pairs.reserve(labels.size() * (labels.size() - 1) / 2);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t j = i + 1; j < labels.size(); ++j) {
      pairs.push_back({i, j, labels[i] == labels[j] ? 1 : 0});
    }
  }
  return pairs;
}

PreparedInstance prepare_instance(const graph::NetworkInstance& instance,
                                  const TrainConfig& config,
                                  community::AssignmentCache* cache) {
  PreparedInstance prepared;
  prepared.id = instance.id;
  prepared.label = instance.label;

  const linalg::Matrix& structure_view =
      config.view_structure == graph::ViewKind::structural ? instance.structural
                                                           : instance.functional;
  linalg::Matrix structure = graph::as_structure(structure_view, config.view_structure);
  if (config.normalize_structural) {
    structure = graph::scale_to_unit_max(structure);
  }
  prepared.propagation = graph::renormalized_propagation(structure).matrix();

  prepared.features = config.view_features == graph::ViewKind::structural
                          ? instance.structural
                          : instance.functional;
  prepared.px = matmul(prepared.propagation, prepared.features);

  if (cache != nullptr) {
    prepared.assignment = &cache->get_or_compute(
        instance.id, structure, config.communities, config.seed);
  }
  return prepared;
}

GradientSet zero_gradients(const model::ScpGcnModel& m) {
  GradientSet grads;
  grads.theta0 = linalg::Matrix(m.theta0.rows(), m.theta0.cols());
  grads.theta1 = linalg::Matrix(m.theta1.rows(), m.theta1.cols());
  grads.fc_weights = linalg::Matrix(m.fc_weights.rows(), m.fc_weights.cols());
  grads.fc_bias.assign(m.fc_bias.size(), 0.0);
  return grads;
}

PairLossBreakdown loss_gradients(const model::InstancePair& pair,
                                 const std::vector<PreparedInstance>& instances,
                                 const model::ScpGcnModel& m,
                                 const TrainConfig& config) {
  if (pair.i >= instances.size() || pair.j >= instances.size()) {
    throw std::invalid_argument("loss_gradients: pair references a missing instance");
  }
  if (pair.i == pair.j) {
    throw std::invalid_argument("loss_gradients: pair references one instance twice");
  }
  const PreparedInstance& lhs = instances[pair.i];
  const PreparedInstance& rhs = instances[pair.j];
  const bool community_active = config.alpha != 0.0 || config.beta != 0.0;
  if (community_active &&
      (lhs.assignment == nullptr || rhs.assignment == nullptr)) {
    throw std::invalid_argument(
        "loss_gradients: community term requires assignments on both instances");
  }

  const model::ForwardTrace trace_i = forward_trace(lhs.propagation, lhs.px, m);
  const model::ForwardTrace trace_j = forward_trace(rhs.propagation, rhs.px, m);
  const std::vector<double>& g_i = trace_i.z.entries();
  const std::vector<double>& g_j = trace_j.z.entries();

  PairLossBreakdown out;
  out.gradients = zero_gradients(m);
  out.contrastive =
      model::contrastive_loss(g_i, g_j, pair.y, config.margin);
  if (!std::isfinite(out.contrastive)) {
    throw std::runtime_error("loss_gradients: contrastive term is non-finite");
  }

  // d(contrastive)/dg for both branches, written as n x d matrices.
  linalg::Matrix dz_i(trace_i.z.rows(), trace_i.z.cols());
  linalg::Matrix dz_j(trace_j.z.rows(), trace_j.z.cols());
  double dist_sq = 0.0;
  for (std::size_t k = 0; k < g_i.size(); ++k) {
    const double diff = g_i[k] - g_j[k];
    dist_sq += diff * diff;
  }
  if (pair.y == 1) {
    for (std::size_t k = 0; k < g_i.size(); ++k) {
      const double diff = g_i[k] - g_j[k];
      dz_i.entries()[k] = diff;
      dz_j.entries()[k] = -diff;
    }
  } else {
    const double dist = std::sqrt(dist_sq);
    const double shortfall = config.margin - dist;
    // Zero distance with the hinge active has no usable direction; the
    // gradient is defined as zero there.
    if (shortfall > 0.0 && dist > 0.0) {
      const double scale = -shortfall / dist;
      for (std::size_t k = 0; k < g_i.size(); ++k) {
        const double diff = g_i[k] - g_j[k];
        dz_i.entries()[k] = scale * diff;
        dz_j.entries()[k] = -scale * diff;
      }
    }
  }

  if (community_active) {
    out.community +=
        add_community_gradient(trace_i.z, *lhs.assignment, config.alpha,
                               config.beta, dz_i);
    out.community +=
        add_community_gradient(trace_j.z, *rhs.assignment, config.alpha,
                               config.beta, dz_j);
    if (!std::isfinite(out.community)) {
      throw std::runtime_error("loss_gradients: community term is non-finite");
    }
  }

  backpropagate(lhs, trace_i, dz_i, m, out.gradients);
  backpropagate(rhs, trace_j, dz_j, m, out.gradients);
  out.total = out.contrastive + out.community;
  return out;
}

void adam_step(std::span<double> params, std::span<const double> grads,
               AdamState& state, double learning_rate, double beta1,
               double beta2, double epsilon, long t) {
  if (params.size() != grads.size()) {
    throw std::invalid_argument("adam_step: gradient shape does not match parameters");
  }
  if (t < 1) {
    throw std::invalid_argument("adam_step: step count must be at least 1");
  }
  if (state.m.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw std::invalid_argument("adam_step: state shape does not match parameters");
  }

  const double m_correction = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double v_correction = 1.0 - std::pow(beta2, static_cast<double>(t));
  for (std::size_t k = 0; k < params.size(); ++k) {
    state.m[k] = beta1 * state.m[k] + (1.0 - beta1) * grads[k];
    state.v[k] = beta2 * state.v[k] + (1.0 - beta2) * grads[k] * grads[k];
    const double m_hat = state.m[k] / m_correction;
    const double v_hat = state.v[k] / v_correction;
    params[k] -= learning_rate * m_hat / (std::sqrt(v_hat) + epsilon);
  }
}

namespace {

struct StatsAccumulator {
  double loss = 0.0;
  double pairwise = 0.0;
  double community = 0.0;
  std::size_t steps = 0;

  void add(double total, double pair_term, double community_term) {
    loss += total;
    pairwise += pair_term;
    community += community_term;
    ++steps;
  }

  EpochStats mean() const {
    const auto count = static_cast<double>(steps == 0 ? 1 : steps);
    return {loss / count, pairwise / count, community / count};
  }
};

void step_model_tensors(model::ScpGcnModel& m, const GradientSet& grads,
                        OptimizerStates& states, const TrainConfig& config,
                        long t) {
  adam_step(m.theta0.entries(), grads.theta0.entries(), states.theta0,
            config.learning_rate, config.adam_beta1, config.adam_beta2,
            config.adam_epsilon, t);
  adam_step(m.theta1.entries(), grads.theta1.entries(), states.theta1,
            config.learning_rate, config.adam_beta1, config.adam_beta2,
            config.adam_epsilon, t);
  adam_step(m.fc_weights.entries(), grads.fc_weights.entries(),
            states.fc_weights, config.learning_rate, config.adam_beta1,
            config.adam_beta2, config.adam_epsilon, t);
  adam_step(m.fc_bias, grads.fc_bias, states.fc_bias, config.learning_rate,
            config.adam_beta1, config.adam_beta2, config.adam_epsilon, t);
}

}  // namespace

TrainResult train(const std::vector<graph::NetworkInstance>& instances,
                  const TrainConfig& config) {
  validate(config);
  if (instances.empty()) {
    throw std::invalid_argument("train: no instances given");
  }

  TrainConfig effective = config;
  if (!config.use_cp) {
    effective.alpha = 0.0;
    effective.beta = 0.0;
  }
  const bool community_active = effective.alpha != 0.0 || effective.beta != 0.0;

  community::AssignmentCache cache;
  std::vector<PreparedInstance> prepared;
  prepared.reserve(instances.size());
  for (const auto& instance : instances) {
    prepared.push_back(
        prepare_instance(instance, effective, community_active ? &cache : nullptr));
  }
  const std::size_t n = prepared.front().propagation.rows();

  TrainResult result;
  result.trained =
      model::init_model(prepared.front().features.cols(), effective.hidden1,
                        effective.hidden2, effective.embed_dim,
                        effective.activation, Rng::derive(effective.seed, kInitStream));
  model::ScpGcnModel& m = result.trained;

  OptimizerStates states;
  long step = 0;

  if (effective.use_siamese) {
    std::vector<int> labels(instances.size());
    for (std::size_t k = 0; k < instances.size(); ++k) {
      labels[k] = instances[k].label;
    }
    const std::vector<model::InstancePair> pairs = make_pairs(labels);

    for (int epoch = 0; epoch < effective.epochs; ++epoch) {
      std::vector<model::InstancePair> order = pairs;
      Rng shuffle_rng(Rng::derive(effective.seed, kEpochStreamBase +
                                                      static_cast<std::uint64_t>(epoch)));
      shuffle_rng.shuffle(order);

      StatsAccumulator stats;
      for (const auto& pair : order) {
        const PairLossBreakdown breakdown =
            loss_gradients(pair, prepared, m, effective);
        ++step;
        step_model_tensors(m, breakdown.gradients, states, effective, step);
        stats.add(breakdown.total, breakdown.contrastive, breakdown.community);
      }
      result.history.push_back(stats.mean());
    }
    return result;
  }

  // Single-branch mode: binary cross entropy through a sigmoid head on the
  // graph embedding, trained jointly with the encoder.
  const std::size_t g_len = n * effective.embed_dim;
  {
    Rng head_rng(Rng::derive(effective.seed, kHeadStream));
    const double limit = std::sqrt(6.0 / static_cast<double>(g_len + 1));
    result.head_weights.resize(g_len);
    for (double& w : result.head_weights) {
      w = head_rng.uniform(-limit, limit);
    }
    result.head_bias = 0.0;
  }

  std::vector<std::size_t> indices(prepared.size());
  std::iota(indices.begin(), indices.end(), std::size_t{0});

  for (int epoch = 0; epoch < effective.epochs; ++epoch) {
    std::vector<std::size_t> order = indices;
    Rng shuffle_rng(Rng::derive(effective.seed, kEpochStreamBase +
                                                    static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(order);

    StatsAccumulator stats;
    for (std::size_t idx : order) {
      const PreparedInstance& inst = prepared[idx];
      const model::ForwardTrace trace =
          forward_trace(inst.propagation, inst.px, m);
      const std::vector<double>& g = trace.z.entries();

      double s = result.head_bias;
      for (std::size_t k = 0; k < g_len; ++k) {
        s += result.head_weights[k] * g[k];
      }
      const double target = static_cast<double>(inst.label);
      const double bce = softplus(s) - target * s;
      if (!std::isfinite(bce)) {
        throw std::runtime_error("train: classification term is non-finite");
      }
      const double residual = sigmoid(s) - target;

      linalg::Matrix dz(trace.z.rows(), trace.z.cols());
      for (std::size_t k = 0; k < g_len; ++k) {
        dz.entries()[k] = residual * result.head_weights[k];
      }

      double community_term = 0.0;
      if (community_active) {
        community_term = add_community_gradient(trace.z, *inst.assignment,
                                                effective.alpha, effective.beta,
                                                dz);
        if (!std::isfinite(community_term)) {
          throw std::runtime_error("train: community term is non-finite");
        }
      }

      GradientSet grads = zero_gradients(m);
      backpropagate(inst, trace, dz, m, grads);

      std::vector<double> head_grad(g_len);
      for (std::size_t k = 0; k < g_len; ++k) {
        head_grad[k] = residual * g[k];
      }
      double bias_grad = residual;

      ++step;
      step_model_tensors(m, grads, states, effective, step);
      adam_step(result.head_weights, head_grad, states.head_weights,
                effective.learning_rate, effective.adam_beta1,
                effective.adam_beta2, effective.adam_epsilon, step);
      adam_step(std::span<double>(&result.head_bias, 1),
                std::span<const double>(&bias_grad, 1), states.head_bias,
                effective.learning_rate, effective.adam_beta1,
                effective.adam_beta2, effective.adam_epsilon, step);
      stats.add(bce + community_term, bce, community_term);
    }
    result.history.push_back(stats.mean());
  }
  return result;
}

void write_history_csv(const std::vector<EpochStats>& history,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("write_history_csv: cannot open " + path);
  }
  out << "epoch,mean_loss,mean_contrastive,mean_cp\n";
  char line[128];
  for (std::size_t e = 0; e < history.size(); ++e) {
    std::snprintf(line, sizeof(line), "%zu,%.17g,%.17g,%.17g\n", e + 1,
                  history[e].mean_loss, history[e].mean_pairwise,
                  history[e].mean_community);
    out << line;
  }
  if (!out) {
    throw std::runtime_error("write_history_csv: write to " + path + " failed");
  }
}

}  // namespace scpgcn::training
