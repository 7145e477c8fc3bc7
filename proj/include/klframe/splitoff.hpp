#pragma once

#include <cstddef>
#include <vector>

#include "klframe/linalg.hpp"

namespace klframe {

/// Dominant rank-one part of a bounded operator T:
///   lim a^-n T^n = |xi><w1|,  T^T w1 = a w1,  T xi = a xi,  <xi|w1> = 1.
struct SplitOffResult {
  double a = 0.0;
  DenseVector w1;
  DenseVector xi;
  DenseMatrix limit;
  /// Matrix-power iterations until successive a^-n T^n differed by < tol * max(1, ‖limit‖_max).
  std::size_t iterations = 0;
  /// ||a^-N T^N - limit||_max at termination.
  double residual = 0.0;
  /// |<xi - w1|w1>|: component of xi - w1 along null(T^T - a).
  double range_residual = 0.0;
  /// history[n-1] = ||a^-n T^n - limit||_max.
  std::vector<double> history;
};

inline constexpr std::size_t kSplitOffMaxIter = 10000;
inline constexpr double kSplitOffTol = 1e-12;

/// Power iteration on T and T^T for (a, w1, xi), then the matrix powers
/// a^-n T^n until they settle. Real dominant eigenvalues only.
SplitOffResult split_off(const DenseMatrix& t, std::size_t max_iter = kSplitOffMaxIter, double tol = kSplitOffTol);

/// Least-squares slope of log(history[n]) against n over entries above
/// `floor`; approximates log|lambda_2 / a|.
double convergence_slope(const std::vector<double>& history, double floor = 1e-11);

/// Block form of T relative to C w1 (+) w1^perp:
///   T = a |w1><w1| + |eta_perp><w1| + G,  G = Q1perp T Q1perp.
struct BlockDecomposition {
  double a = 0.0;
  DenseVector eta_perp;
  /// T compressed to w1^perp, as an operator on the full space (G w1 = 0).
  DenseMatrix g_restricted;
};

BlockDecomposition block_decomposition(const DenseMatrix& t, const DenseVector& w1);

/// xi = w1 + (a - G)^-1 eta_perp.
DenseVector block_xi(const BlockDecomposition& block, const DenseVector& w1);

}  // namespace klframe
