#include "scpgcn/community.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "scpgcn/graph.hpp"

namespace scpgcn::community {

CommunityAssignment make_assignment(std::vector<int> membership, int C) {
  if (C < 1) {
    throw std::invalid_argument("make_assignment: community count must be at least 1");
  }
  CommunityAssignment out;
  out.n = static_cast<int>(membership.size());
  out.C = C;
  out.sets.resize(static_cast<std::size_t>(C));
  for (int node = 0; node < out.n; ++node) {
    const int c = membership[static_cast<std::size_t>(node)];
    if (c < 0 || c >= C) {
      throw std::invalid_argument("make_assignment: node " + std::to_string(node) +
                                  " has out-of-range community " + std::to_string(c));
    }
    out.sets[static_cast<std::size_t>(c)].push_back(node);
  }
  for (int c = 0; c < C; ++c) {
    if (out.sets[static_cast<std::size_t>(c)].empty()) {
      throw std::invalid_argument("make_assignment: community " + std::to_string(c) +
                                  " is empty");
    }
  }
  out.membership = std::move(membership);
  return out;
}

std::vector<int> canonical_relabel(const std::vector<int>& membership) {
  std::vector<int> mapping;  // old label -> new label, -1 = unseen
  int max_label = -1;
  for (int c : membership) {
    max_label = std::max(max_label, c);
  }
  mapping.assign(static_cast<std::size_t>(max_label + 1), -1);
  std::vector<int> out(membership.size());
  int next = 0;
  for (std::size_t i = 0; i < membership.size(); ++i) {
    int& slot = mapping[static_cast<std::size_t>(membership[i])];
    if (slot == -1) {
      slot = next++;
    }
    out[i] = slot;
  }
  return out;
}

CommunityAssignment spectral_communities(const linalg::Matrix& a_s, int C,
                                         std::uint64_t seed) {
  const std::size_t n = a_s.rows();
  if (C < 1) {
    throw std::invalid_argument("spectral_communities: community count must be at least 1");
  }
  if (static_cast<std::size_t>(C) > n) {
    throw std::invalid_argument("spectral_communities: community count " +
                                std::to_string(C) + " exceeds node count " +
                                std::to_string(n));
  }

  const linalg::Matrix laplacian = graph::normalized_laplacian(a_s);
  const auto eig = linalg::symmetric_eigendecomposition(laplacian);

  // Degree rescaling turns the symmetric eigenvectors into the random-walk
  // embedding; isolated nodes get zero rows.
  std::vector<double> dinvsqrt(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double degree = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      degree += a_s(i, j);
    }
    if (degree > 0.0) {
      dinvsqrt[i] = 1.0 / std::sqrt(degree);
    }
  }

  linalg::Matrix embedding(n, static_cast<std::size_t>(C));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < static_cast<std::size_t>(C); ++k) {
      embedding(i, k) = dinvsqrt[i] * eig.eigenvectors(i, k);
    }
  }

  std::vector<int> labels = linalg::kmeans(embedding, C, seed);
  return make_assignment(canonical_relabel(labels), C);
}

linalg::Matrix community_centers(const linalg::Matrix& z,
                                 const CommunityAssignment& assignment) {
  if (z.rows() != static_cast<std::size_t>(assignment.n)) {
    throw std::invalid_argument("community_centers: embedding has " +
                                std::to_string(z.rows()) +
                                " rows but the assignment covers " +
                                std::to_string(assignment.n) + " nodes");
  }
  const std::size_t d = z.cols();
  linalg::Matrix centers(static_cast<std::size_t>(assignment.C), d);
  for (int c = 0; c < assignment.C; ++c) {
    const auto& members = assignment.sets[static_cast<std::size_t>(c)];
    double* center = centers.row(static_cast<std::size_t>(c));
    for (int node : members) {
      const double* row = z.row(static_cast<std::size_t>(node));
      for (std::size_t k = 0; k < d; ++k) {
        center[k] += row[k];
      }
    }
    for (std::size_t k = 0; k < d; ++k) {
      center[k] /= static_cast<double>(members.size());
    }
  }
  return centers;
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("adjusted_rand_index: labelings have different lengths");
  }
  const std::size_t n = a.size();

  // Contingency table over the labels that actually occur.
  std::map<int, int> a_ids;
  std::map<int, int> b_ids;
  for (int label : a) {
    a_ids.emplace(label, static_cast<int>(a_ids.size()));
  }
  for (int label : b) {
    b_ids.emplace(label, static_cast<int>(b_ids.size()));
  }
  const std::size_t ra = a_ids.size();
  const std::size_t rb = b_ids.size();
  std::vector<long long> table(ra * rb, 0);
  std::vector<long long> a_sums(ra, 0);
  std::vector<long long> b_sums(rb, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ai = static_cast<std::size_t>(a_ids[a[i]]);
    const auto bi = static_cast<std::size_t>(b_ids[b[i]]);
    ++table[ai * rb + bi];
    ++a_sums[ai];
    ++b_sums[bi];
  }

  const auto choose2 = [](long long v) { return v * (v - 1) / 2; };
  double index = 0.0;
  for (long long cell : table) {
    index += static_cast<double>(choose2(cell));
  }
  double sum_a = 0.0;
  for (long long v : a_sums) {
    sum_a += static_cast<double>(choose2(v));
  }
  double sum_b = 0.0;
  for (long long v : b_sums) {
    sum_b += static_cast<double>(choose2(v));
  }
  const double total = static_cast<double>(choose2(static_cast<long long>(n)));
  if (total == 0.0) {
    return 1.0;  // zero or one node: any two labelings agree
  }
  const double expected = sum_a * sum_b / total;
  const double max_index = 0.5 * (sum_a + sum_b);
  const double denominator = max_index - expected;
  if (denominator == 0.0) {
    return 1.0;  // both partitions trivial in the same way
  }
  return (index - expected) / denominator;
}

const CommunityAssignment& AssignmentCache::get_or_compute(
    const std::string& id, const linalg::Matrix& structure, int C,
    std::uint64_t seed) {
  std::lock_guard<std::mutex> lock(mutex_);
  const auto key = std::make_tuple(id, C, seed);
  auto it = cache_.find(key);
  if (it == cache_.end()) {
    it = cache_.emplace(key, spectral_communities(structure, C, seed)).first;
  }
  return it->second;
}

std::size_t AssignmentCache::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return cache_.size();
}

}  // namespace scpgcn::community
