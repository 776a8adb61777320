#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace scpgcn::linalg {

/// Dense real matrix, row-major storage. Constructors that accept entry data
/// reject NaN/Inf.
class Matrix {
 public:
  Matrix() = default;

  /// Zero-filled rows x cols matrix.
  Matrix(std::size_t rows, std::size_t cols);

  /// Takes ownership of row-major entries; throws if the length does not
  /// equal rows*cols or any entry is non-finite.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return entries_.size(); }

  double& operator()(std::size_t i, std::size_t j) {
    return entries_[i * cols_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    return entries_[i * cols_ + j];
  }

  const std::vector<double>& entries() const { return entries_; }
  std::vector<double>& entries() { return entries_; }

  const double* row(std::size_t i) const { return entries_.data() + i * cols_; }
  double* row(std::size_t i) { return entries_.data() + i * cols_; }

  bool all_finite() const;

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> entries_;
};

/// C = A * B. Throws on inner-dimension mismatch.
Matrix matmul(const Matrix& a, const Matrix& b);

/// C = A^T * B without materializing the transpose.
Matrix matmul_at_b(const Matrix& a, const Matrix& b);

/// C = A * B^T without materializing the transpose.
Matrix matmul_a_bt(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& m);

double frobenius_norm(const Matrix& m);

/// Eigenvalues ascending; eigenvector column i pairs with eigenvalue i.
struct EigenDecomposition {
  std::vector<double> eigenvalues;
  Matrix eigenvectors;
};

/// Cyclic Jacobi eigendecomposition for symmetric matrices. Converges when
/// the off-diagonal Frobenius mass drops below 1e-12 * ||M||_F, capped at
/// 100 sweeps. Input must be square and symmetric within 1e-10 relative
/// tolerance. Deterministic for a fixed input.
EigenDecomposition symmetric_eigendecomposition(const Matrix& m);

/// Lloyd's k-means over row vectors with k-means++ seeding. Deterministic
/// for a fixed seed. Nearest-center ties break toward the lowest center
/// index; a cluster that empties is re-seeded to the point farthest from its
/// assigned center. Stops when assignments stop changing, capped at 300
/// iterations. Throws if k < 1 or k > number of rows.
std::vector<int> kmeans(const Matrix& points, int k, std::uint64_t seed);

/// Same as kmeans but records the within-cluster sum of squares after each
/// assignment step.
std::vector<int> kmeans(const Matrix& points, int k, std::uint64_t seed,
                        std::vector<double>* inertia_trace);

}  // namespace scpgcn::linalg
