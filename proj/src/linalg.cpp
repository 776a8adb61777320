#include "scpgcn/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "scpgcn/rng.hpp"

namespace scpgcn::linalg {

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), entries_(rows * cols, 0.0) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (entries_.size() != rows_ * cols_) {
    throw std::invalid_argument("Matrix: entry count " +
                                std::to_string(entries_.size()) +
                                " does not match " + std::to_string(rows_) +
                                "x" + std::to_string(cols_));
  }
  if (!all_finite()) {
    throw std::invalid_argument("Matrix: non-finite entry rejected");
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) = 1.0;
  }
  return m;
}

bool Matrix::all_finite() const {
  for (double v : entries_) {
    if (!std::isfinite(v)) {
      return false;
    }
  }
  return true;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument(
        "matmul: inner dimensions " + std::to_string(a.cols()) + " and " +
        std::to_string(b.rows()) + " do not match");
  }
  Matrix out(a.rows(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* out_row = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) {
        continue;  // ReLU activations leave many exact zeros
      }
      const double* b_row = b.row(k);
      for (std::size_t j = 0; j < n; ++j) {
        out_row[j] += aik * b_row[j];
      }
    }
  }
  return out;
}

Matrix matmul_at_b(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw std::invalid_argument("matmul_at_b: row counts do not match");
  }
  Matrix out(a.cols(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* b_row = b.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) {
        continue;
      }
      double* out_row = out.row(k);
      for (std::size_t j = 0; j < n; ++j) {
        out_row[j] += aik * b_row[j];
      }
    }
  }
  return out;
}

Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw std::invalid_argument("matmul_a_bt: column counts do not match");
  }
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* a_row = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const double* b_row = b.row(j);
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) {
        acc += a_row[k] * b_row[k];
      }
      out(i, j) = acc;
    }
  }
  return out;
}

Matrix transpose(const Matrix& m) {
  Matrix out(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      out(j, i) = m(i, j);
    }
  }
  return out;
}

double frobenius_norm(const Matrix& m) {
  double acc = 0.0;
  for (double v : m.entries()) {
    acc += v * v;
  }
  return std::sqrt(acc);
}

namespace {

double offdiagonal_norm(const Matrix& a) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (i != j) {
        acc += a(i, j) * a(i, j);
      }
    }
  }
  return std::sqrt(acc);
}

}  // namespace

EigenDecomposition symmetric_eigendecomposition(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("symmetric_eigendecomposition: matrix is not square");
  }
  const std::size_t n = m.rows();
  double max_abs = 0.0;
  for (double v : m.entries()) {
    max_abs = std::max(max_abs, std::abs(v));
  }
  const double sym_tol = 1e-10 * std::max(1.0, max_abs);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(m(i, j) - m(j, i)) > sym_tol) {
        throw std::invalid_argument(
            "symmetric_eigendecomposition: matrix is not symmetric");
      }
    }
  }

  // Work on an exactly symmetric copy so rotations preserve symmetry.
  Matrix a = m;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double avg = 0.5 * (a(i, j) + a(j, i));
      a(i, j) = avg;
      a(j, i) = avg;
    }
  }
  Matrix v = Matrix::identity(n);

  const double stop = 1e-12 * frobenius_norm(a);
  for (int sweep = 0; sweep < 100; ++sweep) {
    if (offdiagonal_norm(a) <= stop) {
      break;
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) {
          continue;
        }
        const double app = a(p, p);
        const double aqq = a(q, q);
        const double tau = (aqq - app) / (2.0 * apq);
        double t;
        if (std::abs(tau) > 1e150) {
          t = 1.0 / (2.0 * tau);  // avoid overflow in tau*tau
        } else {
          t = ((tau >= 0.0) ? 1.0 : -1.0) /
              (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        }
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) {
            continue;
          }
          const double akp = a(k, p);
          const double akq = a(k, q);
          const double new_kp = c * akp - s * akq;
          const double new_kq = s * akp + c * akq;
          a(k, p) = new_kp;
          a(p, k) = new_kp;
          a(k, q) = new_kq;
          a(q, k) = new_kq;
        }
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;

        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&a](std::size_t x, std::size_t y) {
    return a(x, x) < a(y, y);
  });

  EigenDecomposition result;
  result.eigenvalues.resize(n);
  result.eigenvectors = Matrix(n, n);
  for (std::size_t idx = 0; idx < n; ++idx) {
    const std::size_t src = order[idx];
    result.eigenvalues[idx] = a(src, src);
    for (std::size_t k = 0; k < n; ++k) {
      result.eigenvectors(k, idx) = v(k, src);
    }
  }
  return result;
}

namespace {

double squared_distance(const double* a, const double* b, std::size_t dim) {
  double acc = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    const double diff = a[i] - b[i];
    acc += diff * diff;
  }
  return acc;
}

std::vector<int> kmeans_impl(const Matrix& points, int k, std::uint64_t seed,
                             std::vector<double>* inertia_trace) {
  const std::size_t n = points.rows();
  const std::size_t dim = points.cols();
  if (k < 1) {
    throw std::invalid_argument("kmeans: k must be at least 1");
  }
  if (static_cast<std::size_t>(k) > n) {
    throw std::invalid_argument("kmeans: k " + std::to_string(k) +
                                " exceeds point count " + std::to_string(n));
  }

  Rng rng(seed);
  Matrix centers(static_cast<std::size_t>(k), dim);
  std::vector<bool> is_center(n, false);

  // k-means++ seeding
  {
    const int first = rng.uniform_int(static_cast<int>(n));
    std::copy_n(points.row(first), dim, centers.row(0));
    is_center[first] = true;
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = squared_distance(points.row(i), centers.row(0), dim);
    }
    for (int c = 1; c < k; ++c) {
      double total = 0.0;
      for (double w : d2) {
        total += w;
      }
      std::size_t chosen = n;
      if (total > 0.0) {
        const double target = rng.uniform() * total;
        double cum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          cum += d2[i];
          if (cum > target) {
            chosen = i;
            break;
          }
        }
        if (chosen == n) {
          chosen = n - 1;  // target landed on the last positive mass
        }
      } else {
        // all remaining points coincide with chosen centers
        for (std::size_t i = 0; i < n; ++i) {
          if (!is_center[i]) {
            chosen = i;
            break;
          }
        }
        if (chosen == n) {
          chosen = 0;
        }
      }
      std::copy_n(points.row(chosen), dim, centers.row(c));
      is_center[chosen] = true;
      for (std::size_t i = 0; i < n; ++i) {
        d2[i] = std::min(d2[i], squared_distance(points.row(i), centers.row(c), dim));
      }
    }
  }

  std::vector<int> assignment(n, -1);
  std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);

  for (int iter = 0; iter < 300; ++iter) {
    bool changed = false;
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d2 = squared_distance(points.row(i), centers.row(0), dim);
      for (int c = 1; c < k; ++c) {
        const double d = squared_distance(points.row(i), centers.row(c), dim);
        if (d < best_d2) {  // ties keep the lowest center index
          best_d2 = d;
          best = c;
        }
      }
      if (assignment[i] != best) {
        assignment[i] = best;
        changed = true;
      }
      inertia += best_d2;
    }
    if (inertia_trace != nullptr) {
      inertia_trace->push_back(inertia);
    }
    if (!changed && iter > 0) {
      break;
    }

    std::fill(counts.begin(), counts.end(), std::size_t{0});
    for (std::size_t i = 0; i < n; ++i) {
      ++counts[static_cast<std::size_t>(assignment[i])];
    }

    // Re-seed empty clusters to the point farthest from its assigned center.
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        continue;
      }
      std::size_t farthest = 0;
      double far_d2 = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[static_cast<std::size_t>(assignment[i])] <= 1) {
          continue;  // do not empty a singleton cluster
        }
        const double d = squared_distance(
            points.row(i), centers.row(static_cast<std::size_t>(assignment[i])), dim);
        if (d > far_d2) {
          far_d2 = d;
          farthest = i;
        }
      }
      if (far_d2 < 0.0) {
        continue;  // nothing movable; leave the cluster empty
      }
      --counts[static_cast<std::size_t>(assignment[farthest])];
      assignment[farthest] = c;
      counts[static_cast<std::size_t>(c)] = 1;
      changed = true;
    }

    for (int c = 0; c < k; ++c) {
      double* center = centers.row(static_cast<std::size_t>(c));
      std::fill(center, center + dim, 0.0);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double* p = points.row(i);
      double* center = centers.row(static_cast<std::size_t>(assignment[i]));
      for (std::size_t j = 0; j < dim; ++j) {
        center[j] += p[j];
      }
    }
    for (int c = 0; c < k; ++c) {
      const std::size_t count = counts[static_cast<std::size_t>(c)];
      if (count == 0) {
        continue;
      }
      double* center = centers.row(static_cast<std::size_t>(c));
      for (std::size_t j = 0; j < dim; ++j) {
        center[j] /= static_cast<double>(count);
      }
    }
  }

  return assignment;
}

}  // namespace

std::vector<int> kmeans(const Matrix& points, int k, std::uint64_t seed) {
  return kmeans_impl(points, k, seed, nullptr);
}

std::vector<int> kmeans(const Matrix& points, int k, std::uint64_t seed,
                        std::vector<double>* inertia_trace) {
  return kmeans_impl(points, k, seed, inertia_trace);
}

}  // namespace scpgcn::linalg
