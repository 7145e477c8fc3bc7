#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

#include "klframe/error.hpp"

namespace klframe {

/// Real vector with finite entries.
class DenseVector {
 public:
  DenseVector() = default;
  explicit DenseVector(std::size_t n, double fill = 0.0);
  DenseVector(std::initializer_list<double> values);
  explicit DenseVector(std::vector<double> values);

  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  const std::vector<double>& vec() const noexcept { return data_; }

  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  static DenseVector basis(std::size_t n, std::size_t k);

  DenseVector& operator+=(const DenseVector& o);
  DenseVector& operator-=(const DenseVector& o);
  DenseVector& operator*=(double s);

  friend bool operator==(const DenseVector&, const DenseVector&) = default;

 private:
  std::vector<double> data_;
};

DenseVector operator+(DenseVector a, const DenseVector& b);
DenseVector operator-(DenseVector a, const DenseVector& b);
DenseVector operator*(double s, DenseVector a);

double dot(const DenseVector& a, const DenseVector& b);
double norm(const DenseVector& a);
double max_abs(const DenseVector& a);
DenseVector normalized(const DenseVector& a);

/// Row-major real matrix with finite entries.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> row_major);
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static DenseMatrix identity(std::size_t n);
  static DenseMatrix diagonal(const DenseVector& d);
  /// Matrix whose columns are the given vectors.
  static DenseMatrix from_columns(std::span<const DenseVector> cols);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const double> entries() const noexcept { return data_; }
  std::span<double> entries() noexcept { return data_; }

  DenseVector row(std::size_t r) const;
  DenseVector col(std::size_t c) const;
  DenseMatrix transpose() const;

  double max_abs() const;
  double frobenius() const;

  DenseMatrix& operator+=(const DenseMatrix& o);
  DenseMatrix& operator-=(const DenseMatrix& o);
  DenseMatrix& operator*=(double s);

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator*(double s, DenseMatrix a);
DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);
DenseVector operator*(const DenseMatrix& a, const DenseVector& x);

/// Largest elementwise |a - b|; throws DimMismatch on shape mismatch.
double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);
double max_abs_diff(const DenseVector& a, const DenseVector& b);

/// Eigenpairs of a symmetric matrix, eigenvalues in descending order.
/// Eigenvector k is paired with eigenvalue k; the first component of each
/// eigenvector with |x| > 1e-12 is positive.
struct SpectralData {
  std::vector<double> eigenvalues;
  std::vector<DenseVector> eigenvectors;

  std::size_t size() const noexcept { return eigenvalues.size(); }
  /// Sum of lambda_k |phi_k><phi_k|.
  DenseMatrix reconstruct() const;
};

inline constexpr double kJacobiTolerance = 1e-12;
inline constexpr int kJacobiSweepLimit = 100;

/// Cyclic Jacobi eigendecomposition. `tol` bounds the off-diagonal Frobenius
/// norm relative to ||a||_F at convergence.
SpectralData symmetric_eigen(const DenseMatrix& a, double tol = kJacobiTolerance);

/// Orthonormal basis of R^dim from a seeded Gaussian matrix (Gram-Schmidt).
std::vector<DenseVector> random_onb(std::size_t dim, std::uint64_t seed);

double trace(const DenseMatrix& a);

/// The operator |u><v| : w -> <v|w> u.
DenseMatrix rank_one(const DenseVector& u, const DenseVector& v);

/// Solves a x = b by LU with partial pivoting. Throws Singular.
DenseVector solve(const DenseMatrix& a, const DenseVector& b);
DenseMatrix inverse(const DenseMatrix& a);
double determinant(const DenseMatrix& a);

/// Modified Gram-Schmidt; drops vectors whose residual norm falls below
/// `drop_tol` times their original norm.
std::vector<DenseVector> orthonormalize(std::span<const DenseVector> vectors,
                                        double drop_tol = 1e-10);

/// Max |<u_i|u_j> - delta_ij|.
double orthonormality_defect(std::span<const DenseVector> vectors);

/// Seeded engine for stream `index` of a run seeded with `seed`. Streams with
/// different indices are statistically independent for practical purposes.
std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index);

/// Random symmetric matrix with standard normal entries (symmetrized).
DenseMatrix random_symmetric(std::size_t dim, std::mt19937_64& rng);
/// Random PSD matrix B B^T with B of shape dim x rank (rank 0 means dim).
DenseMatrix random_psd(std::size_t dim, std::mt19937_64& rng, std::size_t rank = 0);
DenseVector random_gaussian(std::size_t dim, std::mt19937_64& rng);

}  // namespace klframe
