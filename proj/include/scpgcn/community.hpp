#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

#include "scpgcn/linalg.hpp"

namespace scpgcn::community {

/// A hard partition of n nodes into C non-empty communities. `sets[c]` lists
/// the members of community c in ascending node order.
struct CommunityAssignment {
  int n = 0;
  int C = 0;
  std::vector<int> membership;
  std::vector<std::vector<int>> sets;
};

/// Builds a CommunityAssignment from a membership vector whose labels must
/// cover {0, ..., C-1} with every community non-empty; throws otherwise.
CommunityAssignment make_assignment(std::vector<int> membership, int C);

/// Relabels communities by order of first appearance, so the community
/// containing node 0 is always labeled 0. Partition structure is unchanged.
std::vector<int> canonical_relabel(const std::vector<int>& membership);

/// Normalized-cut spectral clustering of a structural adjacency matrix:
/// eigenvectors of the C smallest normalized-Laplacian eigenvalues, each row
/// rescaled by the inverse square root of its node degree (zero for isolated
/// nodes), then k-means with the given seed, then canonical relabeling.
/// Deterministic for a fixed (input, C, seed).
CommunityAssignment spectral_communities(const linalg::Matrix& a_s, int C,
                                         std::uint64_t seed);

/// Row c is the arithmetic mean of the embedding rows in community c.
linalg::Matrix community_centers(const linalg::Matrix& z,
                                 const CommunityAssignment& assignment);

/// Chance-corrected partition agreement in [-1, 1]; 1.0 iff the two
/// labelings describe the same partition. Degenerate case (both partitions
/// trivial in the same way) is defined as 1.0.
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

/// Memoizes spectral_communities results keyed by (instance id, C, seed).
/// Lookups and computations are serialized by an internal mutex; returned
/// references stay valid for the cache's lifetime.
class AssignmentCache {
 public:
  const CommunityAssignment& get_or_compute(const std::string& id,
                                            const linalg::Matrix& structure,
                                            int C, std::uint64_t seed);

  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::tuple<std::string, int, std::uint64_t>, CommunityAssignment>
      cache_;
};

}  // namespace scpgcn::community
