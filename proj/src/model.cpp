#include "scpgcn/model.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "scpgcn/rng.hpp"

namespace scpgcn::model {

namespace {

double activate(double v, Activation activation) {
  if (activation == Activation::relu) {
    return v > 0.0 ? v : 0.0;
  }
  return std::tanh(v);
}

void apply_activation(linalg::Matrix& m, Activation activation) {
  for (double& v : m.entries()) {
    v = activate(v, activation);
  }
}

void require_finite(const linalg::Matrix& m, const char* layer) {
  if (!m.all_finite()) {
    throw std::runtime_error(std::string("gcn_forward: non-finite value in ") +
                             layer + " output");
  }
}

linalg::Matrix glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  linalg::Matrix m(fan_in, fan_out);
  for (double& v : m.entries()) {
    v = rng.uniform(-limit, limit);
  }
  return m;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    acc += diff * diff;
  }
  return acc;
}

}  // namespace

Activation activation_from_name(const std::string& name) {
  if (name == "relu") {
    return Activation::relu;
  }
  if (name == "tanh") {
    return Activation::tanh;
  }
  throw std::invalid_argument("unknown activation '" + name +
                              "' (expected relu or tanh)");
}

std::string activation_name(Activation activation) {
  return activation == Activation::relu ? "relu" : "tanh";
}

void validate(const ScpGcnModel& model) {
  if (model.theta0.cols() != model.theta1.rows()) {
    throw std::invalid_argument("model: conv1 output width " +
                                std::to_string(model.theta0.cols()) +
                                " does not feed conv2 input width " +
                                std::to_string(model.theta1.rows()));
  }
  if (model.theta1.cols() != model.fc_weights.rows()) {
    throw std::invalid_argument("model: conv2 output width " +
                                std::to_string(model.theta1.cols()) +
                                " does not feed fc input width " +
                                std::to_string(model.fc_weights.rows()));
  }
  if (model.fc_bias.size() != model.fc_weights.cols()) {
    throw std::invalid_argument("model: fc bias length " +
                                std::to_string(model.fc_bias.size()) +
                                " does not match fc output width " +
                                std::to_string(model.fc_weights.cols()));
  }
  if (!model.theta0.all_finite() || !model.theta1.all_finite() ||
      !model.fc_weights.all_finite()) {
    throw std::invalid_argument("model: non-finite parameter entry");
  }
  for (double v : model.fc_bias) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("model: non-finite fc bias entry");
    }
  }
}

ScpGcnModel init_model(std::size_t input_dim, std::size_t hidden1,
                       std::size_t hidden2, std::size_t embed_dim,
                       Activation activation, std::uint64_t seed) {
  if (input_dim == 0 || hidden1 == 0 || hidden2 == 0 || embed_dim == 0) {
    throw std::invalid_argument("init_model: all layer widths must be positive");
  }
  Rng rng(seed);
  ScpGcnModel model;
  model.theta0 = glorot_uniform(input_dim, hidden1, rng);
  model.theta1 = glorot_uniform(hidden1, hidden2, rng);
  model.fc_weights = glorot_uniform(hidden2, embed_dim, rng);
  model.fc_bias.assign(embed_dim, 0.0);
  model.activation = activation;
  return model;
}

ForwardTrace forward_trace(const linalg::Matrix& p, const linalg::Matrix& px,
                           const ScpGcnModel& model) {
  if (px.cols() != model.theta0.rows()) {
    throw std::invalid_argument("gcn_forward: feature width " +
                                std::to_string(px.cols()) +
                                " does not match conv1 input width " +
                                std::to_string(model.theta0.rows()));
  }
  if (p.rows() != px.rows()) {
    throw std::invalid_argument("gcn_forward: propagation operator covers " +
                                std::to_string(p.rows()) +
                                " nodes but features cover " +
                                std::to_string(px.rows()));
  }

  ForwardTrace trace;
  trace.h1 = matmul(px, model.theta0);
  apply_activation(trace.h1, model.activation);
  require_finite(trace.h1, "conv1");

  trace.ph1 = matmul(p, trace.h1);
  trace.h2 = matmul(trace.ph1, model.theta1);
  apply_activation(trace.h2, model.activation);
  require_finite(trace.h2, "conv2");

  trace.z = matmul(trace.h2, model.fc_weights);
  for (std::size_t i = 0; i < trace.z.rows(); ++i) {
    double* row = trace.z.row(i);
    for (std::size_t k = 0; k < trace.z.cols(); ++k) {
      row[k] += model.fc_bias[k];
    }
  }
  require_finite(trace.z, "fc");
  return trace;
}

EmbeddingResult gcn_forward(const graph::PropagationMatrix& p,
                            const linalg::Matrix& x, const ScpGcnModel& model) {
  validate(model);
  if (x.rows() != p.nodes()) {
    throw std::invalid_argument("gcn_forward: propagation operator covers " +
                                std::to_string(p.nodes()) +
                                " nodes but features cover " +
                                std::to_string(x.rows()));
  }
  const linalg::Matrix px = matmul(p.matrix(), x);
  ForwardTrace trace = forward_trace(p.matrix(), px, model);
  EmbeddingResult result;
  result.graph_embedding = trace.z.entries();
  result.node_embeddings = std::move(trace.z);
  return result;
}

double activation_gradient_from_output(double output, Activation activation) {
  if (activation == Activation::relu) {
    return output > 0.0 ? 1.0 : 0.0;
  }
  return 1.0 - output * output;
}

double contrastive_loss(std::span<const double> g_i, std::span<const double> g_j,
                        int y, double margin) {
  if (g_i.size() != g_j.size()) {
    throw std::invalid_argument("contrastive_loss: embeddings have different lengths");
  }
  if (margin <= 0.0) {
    throw std::invalid_argument("contrastive_loss: margin must be positive");
  }
  if (y != 0 && y != 1) {
    throw std::invalid_argument("contrastive_loss: pair label must be 0 or 1");
  }
  const double dist_sq = squared_distance(g_i, g_j);
  if (y == 1) {
    return 0.5 * dist_sq;
  }
  const double shortfall = margin - std::sqrt(dist_sq);
  return shortfall > 0.0 ? 0.5 * shortfall * shortfall : 0.0;
}

double community_preserving_loss(const linalg::Matrix& z,
                                 const community::CommunityAssignment& assignment,
                                 double alpha, double beta) {
  const linalg::Matrix centers = community_centers(z, assignment);
  const std::size_t d = z.cols();

  double intra = 0.0;
  for (int c = 0; c < assignment.C; ++c) {
    const auto& members = assignment.sets[static_cast<std::size_t>(c)];
    double sum = 0.0;
    for (int node : members) {
      const double* row = z.row(static_cast<std::size_t>(node));
      const double* center = centers.row(static_cast<std::size_t>(c));
      for (std::size_t k = 0; k < d; ++k) {
        const double diff = row[k] - center[k];
        sum += diff * diff;
      }
    }
    intra += sum / static_cast<double>(members.size());
  }

  double inter = 0.0;
  for (int c = 0; c < assignment.C; ++c) {
    for (int c2 = c + 1; c2 < assignment.C; ++c2) {
      const double* lhs = centers.row(static_cast<std::size_t>(c));
      const double* rhs = centers.row(static_cast<std::size_t>(c2));
      for (std::size_t k = 0; k < d; ++k) {
        const double diff = lhs[k] - rhs[k];
        inter += diff * diff;
      }
    }
  }

  return alpha * intra - beta * inter;
}

double total_loss(const std::vector<InstancePair>& pairs,
                  const std::vector<EmbeddingResult>& embeddings,
                  const std::vector<const community::CommunityAssignment*>& assignments,
                  double alpha, double beta, double margin) {
  if (assignments.size() != embeddings.size()) {
    throw std::invalid_argument(
        "total_loss: assignment list does not match embedding list");
  }
  double loss = 0.0;
  std::set<std::size_t> seen;
  for (const auto& pair : pairs) {
    if (pair.i >= embeddings.size() || pair.j >= embeddings.size()) {
      throw std::invalid_argument("total_loss: pair references a missing instance");
    }
    if (pair.i == pair.j) {
      throw std::invalid_argument("total_loss: pair references the same instance twice");
    }
    loss += contrastive_loss(embeddings[pair.i].graph_embedding,
                             embeddings[pair.j].graph_embedding, pair.y, margin);
    seen.insert(pair.i);
    seen.insert(pair.j);
  }
  for (std::size_t index : seen) {
    if (assignments[index] == nullptr) {
      throw std::invalid_argument("total_loss: instance " + std::to_string(index) +
                                  " has no community assignment");
    }
    loss += community_preserving_loss(embeddings[index].node_embeddings,
                                      *assignments[index], alpha, beta);
  }
  return loss;
}

void save_model(const ScpGcnModel& model, const std::string& path) {
  validate(model);
  nlohmann::json doc;
  doc["input_dim"] = model.theta0.rows();
  doc["hidden1"] = model.theta0.cols();
  doc["hidden2"] = model.theta1.cols();
  doc["embed_dim"] = model.fc_weights.cols();
  doc["activation"] = activation_name(model.activation);
  doc["theta0"] = model.theta0.entries();
  doc["theta1"] = model.theta1.entries();
  doc["fc_weights"] = model.fc_weights.entries();
  doc["fc_bias"] = model.fc_bias;

  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("save_model: cannot open " + path + " for writing");
  }
  out << doc.dump(2) << "\n";
  if (!out) {
    throw std::runtime_error("save_model: write to " + path + " failed");
  }
}

ScpGcnModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("load_model: cannot open " + path);
  }
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("load_model: " + path + " is not valid JSON: " +
                             e.what());
  }

  const auto require_array = [&](const char* key) -> std::vector<double> {
    if (!doc.contains(key) || !doc[key].is_array()) {
      throw std::runtime_error("load_model: " + path + " is missing array '" +
                               key + "'");
    }
    return doc[key].get<std::vector<double>>();
  };
  const auto require_count = [&](const char* key) -> std::size_t {
    if (!doc.contains(key) || !doc[key].is_number_unsigned()) {
      throw std::runtime_error("load_model: " + path + " is missing count '" +
                               key + "'");
    }
    return doc[key].get<std::size_t>();
  };

  const std::size_t input_dim = require_count("input_dim");
  const std::size_t hidden1 = require_count("hidden1");
  const std::size_t hidden2 = require_count("hidden2");
  const std::size_t embed_dim = require_count("embed_dim");

  ScpGcnModel model;
  try {
    model.theta0 = linalg::Matrix(input_dim, hidden1, require_array("theta0"));
    model.theta1 = linalg::Matrix(hidden1, hidden2, require_array("theta1"));
    model.fc_weights =
        linalg::Matrix(hidden2, embed_dim, require_array("fc_weights"));
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error("load_model: " + path + ": " + e.what());
  }
  model.fc_bias = require_array("fc_bias");
  model.activation =
      activation_from_name(doc.value("activation", std::string("relu")));
  validate(model);
  return model;
}

}  // namespace scpgcn::model
