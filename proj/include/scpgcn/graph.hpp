#pragma once

#include <cstddef>
#include <string>

#include "scpgcn/linalg.hpp"

namespace scpgcn::graph {

/// Which physical view a matrix came from. Structural networks are
/// non-negative fiber-strength graphs; functional networks are signed
/// correlation matrices in [-1, 1].
enum class ViewKind { structural, functional };

/// One subject: a paired structural/functional network over the same node
/// set, plus a binary class label (0 = control, 1 = patient).
struct NetworkInstance {
  std::string id;
  linalg::Matrix structural;
  linalg::Matrix functional;
  int label = 0;
};

/// Checks the NetworkInstance contract: both views square with the same node
/// count and symmetric within 1e-9; structural non-negative with a zero
/// diagonal; functional entries within [-1, 1]. Throws std::invalid_argument
/// naming the instance id on the first violation.
void validate(const NetworkInstance& instance);

/// Symmetric single-hop propagation operator built from an adjacency matrix:
/// with self-loops added, each entry is rescaled by the inverse square roots
/// of the augmented degrees. Constructed only by renormalized_propagation so
/// its guarantees (symmetry, spectrum within [-1, 1], positive diagonal)
/// hold by construction.
class PropagationMatrix {
 public:
  const linalg::Matrix& matrix() const { return matrix_; }
  std::size_t nodes() const { return matrix_.rows(); }

  bool operator==(const PropagationMatrix& other) const = default;

 private:
  friend PropagationMatrix renormalized_propagation(const linalg::Matrix& a);
  explicit PropagationMatrix(linalg::Matrix m) : matrix_(std::move(m)) {}
  linalg::Matrix matrix_;
};

/// L = I - D^(-1/2) A D^(-1/2). A zero-degree node contributes an identity
/// row (its D^(-1/2) entry is defined as 0). Input must be square, symmetric
/// within 1e-9, and non-negative; it is symmetrized exactly before use so
/// the result is exactly symmetric.
linalg::Matrix normalized_laplacian(const linalg::Matrix& a);

/// P = Dhat^(-1/2) (A + I) Dhat^(-1/2) with Dhat the row sums of A + I.
/// Same preconditions as normalized_laplacian. The self-loop keeps every
/// augmented degree at least 1, so no zero-degree special case arises.
PropagationMatrix renormalized_propagation(const linalg::Matrix& a);

/// Adapts a network view for use as graph structure. Functional views are
/// signed correlations, so they are mapped to entrywise absolute values with
/// the diagonal zeroed; structural views pass through unchanged.
linalg::Matrix as_structure(const linalg::Matrix& view, ViewKind kind);

/// Rescales a non-negative matrix so its largest entry is 1 (no-op on an
/// all-zero matrix). Offered for raw fiber-count structural inputs whose
/// scale is arbitrary; applied uniformly so symmetry is preserved.
linalg::Matrix scale_to_unit_max(const linalg::Matrix& m);

}  // namespace scpgcn::graph
