#include "klframe/splitoff.hpp"

#include <algorithm>
#include <cmath>

namespace klframe {

namespace {

constexpr std::size_t kRateWindow = 50;

void fix_sign(DenseVector& v) {
  for (double x : v) {
    if (std::abs(x) > 1e-12) {
      if (x < 0) v *= -1.0;
      return;
    }
  }
}

/// Unit vector in the direction of v with the first significant entry positive.
/// The max-norm division first keeps large powers from overflowing.
DenseVector rescale(DenseVector v) {
  const double m = max_abs(v);
  if (m == 0.0) return v;
  v *= 1.0 / m;
  v *= 1.0 / norm(v);
  fix_sign(v);
  return v;
}

struct PowerState {
  DenseVector left;
  DenseVector right;
  std::vector<double> steps;
};

/// Smallest-but-one singular value of a I - T, from the eigenvalues of
/// (aI - T)(aI - T)^T.
double second_smallest_singular(const DenseMatrix& t, double a) {
  const std::size_t n = t.rows();
  DenseMatrix b = a * DenseMatrix::identity(n) - t;
  DenseMatrix bbt = b * b.transpose();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) bbt(j, i) = bbt(i, j);
  const auto ev = symmetric_eigen(bbt).eigenvalues;
  return std::sqrt(std::max(ev[n - 2], 0.0));
}

}  // namespace

SplitOffResult split_off(const DenseMatrix& t, std::size_t max_iter, double tol) {
  if (!t.is_square()) throw Error(Errc::NonSquare, "split_off needs a square matrix");
  const std::size_t n = t.rows();
  const double t_scale = t.max_abs();
  if (n == 0 || t_scale == 0.0) throw Error(Errc::ZeroOperator, "operator is zero");
  const DenseMatrix tt = t.transpose();

  // Phase 1: power iteration for the left and right dominant eigenvectors.
  auto rng = substream(0x5eedULL, n);
  PowerState s{rescale(random_gaussian(n, rng)), rescale(random_gaussian(n, rng)), {}};
  bool converged = false;
  for (std::size_t k = 0; k < max_iter; ++k) {
    DenseVector left = rescale(tt * s.left);
    DenseVector right = rescale(t * s.right);
    if (max_abs(left) == 0.0 || max_abs(right) == 0.0) {
      throw Error(Errc::NoDominantGap, "iterate collapsed to zero (nilpotent part)");
    }
    const double step = std::max(max_abs_diff(left, s.left), max_abs_diff(right, s.right));
    s.left = std::move(left);
    s.right = std::move(right);
    s.steps.push_back(step);
    if (step < tol) {
      converged = true;
      break;
    }
    if (s.steps.size() > 2 * kRateWindow) {
      const double old = s.steps[s.steps.size() - 1 - kRateWindow];
      const double rate = std::pow(step / old, 1.0 / kRateWindow);
      if (rate > 1.0 - 1e-6 && step > 1e3 * tol) {
        throw Error(Errc::NoDominantGap, "power iteration does not contract (|lambda_2/a| ~ 1 or complex pair)");
      }
    }
  }
  if (!converged) throw Error(Errc::MaxIterExceeded, "power iteration did not settle");

  SplitOffResult r;
  r.w1 = s.left;
  // Two-sided Rayleigh quotient: error quadratic in the eigenvector errors.
  const double overlap = dot(s.right, r.w1);
  if (std::abs(overlap) <= 1e-10) throw Error(Errc::NoDominantGap, "left and right eigenvectors are orthogonal");
  r.a = dot(r.w1, t * s.right) / overlap;
  if (std::abs(r.a) <= 1e-14 * t_scale) throw Error(Errc::NoDominantGap, "dominant eigenvalue is zero");

  if (n > 1 && second_smallest_singular(t, r.a) <= 1e-6 * std::max(std::abs(r.a), t_scale)) {
    throw Error(Errc::NoDominantGap, "eigenvalue a is not simple: dim R(a-T)^perp > 1");
  }

  r.xi = (1.0 / overlap) * s.right;
  r.limit = rank_one(r.xi, r.w1);
  r.range_residual = std::abs(dot(r.xi - r.w1, r.w1));

  // Phase 2: the matrix powers a^-n T^n.
  const DenseMatrix scaled = (1.0 / r.a) * t;
  DenseMatrix power = DenseMatrix::identity(n);
  const double settle = tol * std::max(1.0, r.limit.max_abs());
  for (std::size_t k = 1;; ++k) {
    if (k > max_iter) throw Error(Errc::MaxIterExceeded, "a^-n T^n did not settle");
    DenseMatrix next = scaled * power;
    const double change = max_abs_diff(next, power);
    power = std::move(next);
    r.history.push_back(max_abs_diff(power, r.limit));
    if (change < settle) {
      r.iterations = k;
      break;
    }
  }
  r.residual = r.history.back();
  return r;
}

double convergence_slope(const std::vector<double>& history, double floor) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t m = 0;
  for (std::size_t i = 0; i < history.size(); ++i) {
    if (!(history[i] > floor)) continue;
    const double x = static_cast<double>(i + 1);
    const double y = std::log(history[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m < 2) return 0.0;
  const double denom = m * sxx - sx * sx;
  return (m * sxy - sx * sy) / denom;
}

BlockDecomposition block_decomposition(const DenseMatrix& t, const DenseVector& w1) {
  if (!t.is_square()) throw Error(Errc::NonSquare, "block_decomposition needs a square matrix");
  if (w1.size() != t.rows()) throw Error(Errc::DimMismatch, "w1 dimension differs from operator");
  if (std::abs(norm(w1) - 1.0) > 1e-10) throw Error(Errc::NotUnitVector, "w1 must be a unit vector");
  const std::size_t n = t.rows();

  BlockDecomposition b;
  b.a = dot(w1, t * w1);
  const DenseVector left = t.transpose() * w1;
  if (max_abs_diff(left, b.a * w1) > 1e-7 * std::max({std::abs(b.a), t.max_abs(), 1e-300})) {
    throw Error(Errc::NotLeftEigenvector, "T^T w1 is not parallel to w1");
  }
  const DenseMatrix q_perp = DenseMatrix::identity(n) - rank_one(w1, w1);
  b.eta_perp = q_perp * (t * w1);
  b.g_restricted = q_perp * t * q_perp;
  return b;
}

DenseVector block_xi(const BlockDecomposition& block, const DenseVector& w1) {
  const std::size_t n = w1.size();
  const DenseMatrix shifted = block.a * DenseMatrix::identity(n) - block.g_restricted;
  return w1 + solve(shifted, block.eta_perp);
}

}  // namespace klframe
