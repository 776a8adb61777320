#include "scpgcn/graph.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace scpgcn::graph {

namespace {

constexpr double kSymmetryTolerance = 1e-9;

void require_square_symmetric_nonnegative(const linalg::Matrix& a,
                                          const std::string& op) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument(op + ": matrix is not square");
  }
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (a(i, j) < 0.0) {
        throw std::invalid_argument(op + ": negative entry at (" +
                                    std::to_string(i) + "," +
                                    std::to_string(j) + ")");
      }
    }
    for (std::size_t j = i + 1; j < a.cols(); ++j) {
      if (std::abs(a(i, j) - a(j, i)) > kSymmetryTolerance) {
        throw std::invalid_argument(op + ": matrix is not symmetric");
      }
    }
  }
}

linalg::Matrix exact_symmetrize(const linalg::Matrix& a) {
  linalg::Matrix out = a;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = i + 1; j < a.cols(); ++j) {
      const double avg = 0.5 * (a(i, j) + a(j, i));
      out(i, j) = avg;
      out(j, i) = avg;
    }
  }
  return out;
}

void check_symmetric(const linalg::Matrix& m, const std::string& id,
                     const std::string& view) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("instance " + id + ": " + view +
                                " matrix is not square");
  }
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = i + 1; j < m.cols(); ++j) {
      if (std::abs(m(i, j) - m(j, i)) > kSymmetryTolerance) {
        throw std::invalid_argument("instance " + id + ": " + view +
                                    " matrix is not symmetric at (" +
                                    std::to_string(i) + "," +
                                    std::to_string(j) + ")");
      }
    }
  }
}

}  // namespace

void validate(const NetworkInstance& instance) {
  const std::string& id = instance.id;
  check_symmetric(instance.structural, id, "structural");
  check_symmetric(instance.functional, id, "functional");
  if (instance.structural.rows() != instance.functional.rows()) {
    throw std::invalid_argument(
        "instance " + id + ": structural is " +
        std::to_string(instance.structural.rows()) + " nodes but functional is " +
        std::to_string(instance.functional.rows()));
  }
  const std::size_t n = instance.structural.rows();
  for (std::size_t i = 0; i < n; ++i) {
    if (instance.structural(i, i) != 0.0) {
      throw std::invalid_argument("instance " + id +
                                  ": structural diagonal entry at node " +
                                  std::to_string(i) + " is not zero");
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (instance.structural(i, j) < 0.0) {
        throw std::invalid_argument("instance " + id +
                                    ": negative structural entry at (" +
                                    std::to_string(i) + "," +
                                    std::to_string(j) + ")");
      }
      const double f = instance.functional(i, j);
      if (f < -1.0 || f > 1.0) {
        throw std::invalid_argument("instance " + id +
                                    ": functional entry out of [-1,1] at (" +
                                    std::to_string(i) + "," +
                                    std::to_string(j) + ")");
      }
    }
  }
  if (instance.label != 0 && instance.label != 1) {
    throw std::invalid_argument("instance " + id + ": label must be 0 or 1");
  }
}

linalg::Matrix normalized_laplacian(const linalg::Matrix& a) {
  require_square_symmetric_nonnegative(a, "normalized_laplacian");
  const linalg::Matrix sym = exact_symmetrize(a);
  const std::size_t n = sym.rows();

  std::vector<double> dinvsqrt(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double degree = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      degree += sym(i, j);
    }
    dinvsqrt[i] = degree > 0.0 ? 1.0 / std::sqrt(degree) : 0.0;
  }

  linalg::Matrix l(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    l(i, i) = 1.0 - dinvsqrt[i] * sym(i, i) * dinvsqrt[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      // Fill both halves from one product so the result is exactly symmetric.
      const double scaled = dinvsqrt[i] * sym(i, j) * dinvsqrt[j];
      l(i, j) = -scaled;
      l(j, i) = -scaled;
    }
  }
  return l;
}

PropagationMatrix renormalized_propagation(const linalg::Matrix& a) {
  require_square_symmetric_nonnegative(a, "renormalized_propagation");
  const linalg::Matrix sym = exact_symmetrize(a);
  const std::size_t n = sym.rows();

  std::vector<double> dinvsqrt(n);
  for (std::size_t i = 0; i < n; ++i) {
    double degree = 1.0;  // self-loop
    for (std::size_t j = 0; j < n; ++j) {
      degree += sym(i, j);
    }
    dinvsqrt[i] = 1.0 / std::sqrt(degree);
  }

  linalg::Matrix p(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    p(i, i) = dinvsqrt[i] * (sym(i, i) + 1.0) * dinvsqrt[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      // Fill both halves from one product so the result is exactly symmetric.
      const double value = dinvsqrt[i] * sym(i, j) * dinvsqrt[j];
      p(i, j) = value;
      p(j, i) = value;
    }
  }
  return PropagationMatrix(std::move(p));
}

linalg::Matrix as_structure(const linalg::Matrix& view, ViewKind kind) {
  if (view.rows() != view.cols()) {
    throw std::invalid_argument("as_structure: matrix is not square");
  }
  if (kind == ViewKind::structural) {
    return view;
  }
  linalg::Matrix out(view.rows(), view.cols());
  for (std::size_t i = 0; i < view.rows(); ++i) {
    for (std::size_t j = 0; j < view.cols(); ++j) {
      out(i, j) = (i == j) ? 0.0 : std::abs(view(i, j));
    }
  }
  return out;
}

linalg::Matrix scale_to_unit_max(const linalg::Matrix& m) {
  double max_entry = 0.0;
  for (double v : m.entries()) {
    max_entry = std::max(max_entry, v);
  }
  if (max_entry <= 0.0) {
    return m;
  }
  linalg::Matrix out = m;
  for (double& v : out.entries()) {
    v /= max_entry;
  }
  return out;
}

}  // namespace scpgcn::graph
