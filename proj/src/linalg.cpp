#include "klframe/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace klframe {

namespace {

void require_finite(std::span<const double> xs, const char* what) {
  for (double x : xs) {
    if (!std::isfinite(x)) throw Error(Errc::NonFinite, std::string(what) + " has a non-finite entry");
  }
}

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw Error(Errc::DimMismatch,
                std::string(what) + ": " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

void require_same_shape(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(Errc::DimMismatch, "matrix shapes differ");
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void fix_sign(DenseVector& v) {
  for (double x : v) {
    if (std::abs(x) > 1e-12) {
      if (x < 0) v *= -1.0;
      return;
    }
  }
}

struct LU {
  DenseMatrix lu;
  std::vector<std::size_t> perm;
  int sign = 1;
  bool singular = false;
};

LU lu_decompose(const DenseMatrix& a) {
  if (!a.is_square()) throw Error(Errc::NonSquare, "LU needs a square matrix");
  const std::size_t n = a.rows();
  LU out{a, std::vector<std::size_t>(n), 1, false};
  std::iota(out.perm.begin(), out.perm.end(), 0);
  DenseMatrix& m = out.lu;
  const double scale = std::max(a.max_abs(), 1e-300);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(m(i, k)) > std::abs(m(piv, k))) piv = i;
    }
    if (std::abs(m(piv, k)) <= 1e-14 * scale) {
      out.singular = true;
      continue;
    }
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m(k, j), m(piv, j));
      std::swap(out.perm[k], out.perm[piv]);
      out.sign = -out.sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = m(i, k) / m(k, k);
      m(i, k) = f;
      for (std::size_t j = k + 1; j < n; ++j) m(i, j) -= f * m(k, j);
    }
  }
  return out;
}

DenseVector lu_solve(const LU& f, const DenseVector& b) {
  const std::size_t n = f.lu.rows();
  DenseVector x(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[f.perm[i]];
    for (std::size_t j = 0; j < i; ++j) s -= f.lu(i, j) * x[j];
    x[i] = s;
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = x[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= f.lu(i, j) * x[j];
    x[i] = s / f.lu(i, i);
  }
  return x;
}

}  // namespace

// ---------------------------------------------------------------- DenseVector

DenseVector::DenseVector(std::size_t n, double fill) : data_(n, fill) {
  require_finite(data_, "vector");
}

DenseVector::DenseVector(std::initializer_list<double> values) : data_(values) {
  require_finite(data_, "vector");
}

DenseVector::DenseVector(std::vector<double> values) : data_(std::move(values)) {
  require_finite(data_, "vector");
}

DenseVector DenseVector::basis(std::size_t n, std::size_t k) {
  DenseVector e(n);
  e[k] = 1.0;
  return e;
}

DenseVector& DenseVector::operator+=(const DenseVector& o) {
  require_same_size(size(), o.size(), "vector add");
  for (std::size_t i = 0; i < size(); ++i) data_[i] += o.data_[i];
  return *this;
}

DenseVector& DenseVector::operator-=(const DenseVector& o) {
  require_same_size(size(), o.size(), "vector subtract");
  for (std::size_t i = 0; i < size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

DenseVector& DenseVector::operator*=(double s) {
  for (double& x : data_) x *= s;
  return *this;
}

DenseVector operator+(DenseVector a, const DenseVector& b) { return a += b; }
DenseVector operator-(DenseVector a, const DenseVector& b) { return a -= b; }
DenseVector operator*(double s, DenseVector a) { return a *= s; }

double dot(const DenseVector& a, const DenseVector& b) {
  require_same_size(a.size(), b.size(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const DenseVector& a) { return std::sqrt(dot(a, a)); }

double max_abs(const DenseVector& a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

DenseVector normalized(const DenseVector& a) {
  const double n = norm(a);
  if (n == 0.0) throw Error(Errc::DimMismatch, "cannot normalize the zero vector");
  return (1.0 / n) * a;
}

// ---------------------------------------------------------------- DenseMatrix

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
  require_same_size(data_.size(), rows * cols, "matrix entries");
  require_finite(data_, "matrix");
}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    require_same_size(r.size(), cols_, "ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
  require_finite(data_, "matrix");
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::diagonal(const DenseVector& d) {
  DenseMatrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

DenseMatrix DenseMatrix::from_columns(std::span<const DenseVector> cols) {
  if (cols.empty()) return {};
  DenseMatrix m(cols[0].size(), cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    require_same_size(cols[j].size(), m.rows(), "column length");
    for (std::size_t i = 0; i < m.rows(); ++i) m(i, j) = cols[j][i];
  }
  return m;
}

DenseVector DenseMatrix::row(std::size_t r) const {
  return DenseVector(std::vector<double>(data_.begin() + static_cast<std::ptrdiff_t>(r * cols_),
                                         data_.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols_)));
}

DenseVector DenseMatrix::col(std::size_t c) const {
  DenseVector v(rows_);
  for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, c);
  return v;
}

DenseMatrix DenseMatrix::transpose() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double DenseMatrix::max_abs() const {
  double m = 0.0;
  for (double x : data_) m = std::max(m, std::abs(x));
  return m;
}

double DenseMatrix::frobenius() const {
  double s = 0.0;
  for (double x : data_) s += x * x;
  return std::sqrt(s);
}

DenseMatrix& DenseMatrix::operator+=(const DenseMatrix& o) {
  require_same_shape(*this, o);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

DenseMatrix& DenseMatrix::operator-=(const DenseMatrix& o) {
  require_same_shape(*this, o);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

DenseMatrix& DenseMatrix::operator*=(double s) {
  for (double& x : data_) x *= s;
  return *this;
}

DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b) { return a += b; }
DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b) { return a -= b; }
DenseMatrix operator*(double s, DenseMatrix a) { return a *= s; }

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_size(a.cols(), b.rows(), "matrix product");
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

DenseVector operator*(const DenseMatrix& a, const DenseVector& x) {
  require_same_size(a.cols(), x.size(), "matrix-vector product");
  DenseVector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_shape(a, b);
  double m = 0.0;
  for (std::size_t i = 0; i < a.entries().size(); ++i)
    m = std::max(m, std::abs(a.entries()[i] - b.entries()[i]));
  return m;
}

double max_abs_diff(const DenseVector& a, const DenseVector& b) {
  require_same_size(a.size(), b.size(), "vector difference");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// ---------------------------------------------------------------- spectral

DenseMatrix SpectralData::reconstruct() const {
  if (eigenvectors.empty()) return {};
  const std::size_t n = eigenvectors[0].size();
  DenseMatrix m(n, n);
  for (std::size_t k = 0; k < size(); ++k) {
    const DenseVector& v = eigenvectors[k];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m(i, j) += eigenvalues[k] * v[i] * v[j];
  }
  return m;
}

SpectralData symmetric_eigen(const DenseMatrix& a, double tol) {
  if (!a.is_square()) throw Error(Errc::NonSquare, "eigendecomposition needs a square matrix");
  const std::size_t n = a.rows();
  const double amax = a.max_abs();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(a(i, j) - a(j, i)) > 1e-9 * amax) {
        throw Error(Errc::NotSymmetric, "asymmetry at (" + std::to_string(i) + "," +
                                            std::to_string(j) + ") exceeds 1e-9*||a||");
      }
    }
  }

  DenseMatrix m = a;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) m(i, j) = m(j, i) = 0.5 * (a(i, j) + a(j, i));
  DenseMatrix v = DenseMatrix::identity(n);

  const double target = tol * a.frobenius();
  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * m(i, j) * m(i, j);
    return std::sqrt(s);
  };

  int sweep = 0;
  while (off_norm() > target) {
    if (++sweep > kJacobiSweepLimit) {
      throw Error(Errc::NoConvergence, "Jacobi sweep limit reached");
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = m(p, q);
        if (apq == 0.0) continue;
        const double theta = (m(q, q) - m(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);
        m(p, p) -= t * apq;
        m(q, q) += t * apq;
        m(p, q) = m(q, p) = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double arp = m(r, p);
          const double arq = m(r, q);
          m(r, p) = m(p, r) = arp - s * (arq + tau * arp);
          m(r, q) = m(q, r) = arq + s * (arp - tau * arq);
        }
        for (std::size_t r = 0; r < n; ++r) {
          const double vrp = v(r, p);
          const double vrq = v(r, q);
          v(r, p) = vrp - s * (vrq + tau * vrp);
          v(r, q) = vrq + s * (vrp - tau * vrq);
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return m(x, x) > m(y, y); });

  SpectralData out;
  out.eigenvalues.reserve(n);
  out.eigenvectors.reserve(n);
  for (std::size_t k : order) {
    out.eigenvalues.push_back(m(k, k));
    DenseVector vec = v.col(k);
    fix_sign(vec);
    out.eigenvectors.push_back(std::move(vec));
  }
  return out;
}

// ---------------------------------------------------------------- misc

std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ (index * 0xd1b54a32d192ed03ULL)));
}

DenseVector random_gaussian(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  DenseVector v(dim);
  for (double& x : v) x = gauss(rng);
  return v;
}

std::vector<DenseVector> random_onb(std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw Error(Errc::ZeroDim, "random_onb needs dim >= 1");
  std::mt19937_64 rng = substream(seed, 0);
  for (;;) {
    std::vector<DenseVector> cols;
    cols.reserve(dim);
    for (std::size_t k = 0; k < dim; ++k) cols.push_back(random_gaussian(dim, rng));
    auto onb = orthonormalize(cols, 1e-8);
    // A rank-deficient Gaussian draw has probability zero; redraw if it happens.
    if (onb.size() == dim) {
      // Second pass removes the residual loss of orthogonality of one pass.
      return orthonormalize(onb);
    }
  }
}

DenseMatrix random_symmetric(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  DenseMatrix m(dim, dim);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = i; j < dim; ++j) m(i, j) = m(j, i) = gauss(rng);
  return m;
}

DenseMatrix random_psd(std::size_t dim, std::mt19937_64& rng, std::size_t rank) {
  if (rank == 0) rank = dim;
  std::normal_distribution<double> gauss(0.0, 1.0);
  DenseMatrix b(dim, rank);
  for (double& x : b.entries()) x = gauss(rng);
  DenseMatrix g = b * b.transpose();
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = i + 1; j < dim; ++j) g(j, i) = g(i, j);
  return g;
}

double trace(const DenseMatrix& a) {
  if (!a.is_square()) throw Error(Errc::NonSquare, "trace needs a square matrix");
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) s += a(i, i);
  return s;
}

DenseMatrix rank_one(const DenseVector& u, const DenseVector& v) {
  require_same_size(u.size(), v.size(), "rank_one");
  DenseMatrix m(u.size(), v.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) m(i, j) = u[i] * v[j];
  return m;
}

DenseVector solve(const DenseMatrix& a, const DenseVector& b) {
  require_same_size(a.rows(), b.size(), "solve right-hand side");
  LU f = lu_decompose(a);
  if (f.singular) throw Error(Errc::Singular, "matrix is numerically singular");
  return lu_solve(f, b);
}

DenseMatrix inverse(const DenseMatrix& a) {
  LU f = lu_decompose(a);
  if (f.singular) throw Error(Errc::Singular, "matrix is numerically singular");
  const std::size_t n = a.rows();
  DenseMatrix inv(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    DenseVector x = lu_solve(f, DenseVector::basis(n, j));
    for (std::size_t i = 0; i < n; ++i) inv(i, j) = x[i];
  }
  return inv;
}

double determinant(const DenseMatrix& a) {
  if (a.rows() == 0 && a.cols() == 0) return 1.0;
  LU f = lu_decompose(a);
  if (f.singular) return 0.0;
  double d = f.sign;
  for (std::size_t i = 0; i < a.rows(); ++i) d *= f.lu(i, i);
  return d;
}

std::vector<DenseVector> orthonormalize(std::span<const DenseVector> vectors, double drop_tol) {
  std::vector<DenseVector> out;
  for (const DenseVector& v : vectors) {
    const double original = norm(v);
    if (original == 0.0) continue;
    DenseVector w = v;
    for (const DenseVector& q : out) w -= dot(q, w) * q;
    const double r = norm(w);
    if (r <= drop_tol * original) continue;
    out.push_back((1.0 / r) * w);
  }
  return out;
}

double orthonormality_defect(std::span<const DenseVector> vectors) {
  double worst = 0.0;
  for (std::size_t i = 0; i < vectors.size(); ++i)
    for (std::size_t j = i; j < vectors.size(); ++j)
      worst = std::max(worst, std::abs(dot(vectors[i], vectors[j]) - (i == j ? 1.0 : 0.0)));
  return worst;
}

}  // namespace klframe
