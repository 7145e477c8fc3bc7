#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "klframe/frames.hpp"
#include "klframe/linalg.hpp"

namespace klframe {

// Entropies in this module are in nats (natural logarithm). The coding module
// measures Shannon entropy in bits.

/// beta(t) = t log t, continued by beta(0) = 0.
double beta(double t);

/// Eigenbasis of a PSD operator ordered by descending eigenvalue.
struct KLBasis {
  SpectralData spectral;
  /// rho subtracted from G before analysis (G - rho I); zero unless requested.
  double shift = 0.0;
};

/// KL basis of `g`. With `shift_to_min`, analyses G - lambda_min I instead,
/// which has the same eigenvectors.
KLBasis kl_basis(const DenseMatrix& g, bool shift_to_min = false);

/// g / trace(g).
DenseMatrix normalize_trace(const DenseMatrix& g);

/// <psi_i|G psi_i> for every basis vector, in basis order.
std::vector<double> diagonal_elements(const DenseMatrix& g, std::span<const DenseVector> onb);

/// values[n-1] = E_n = tr(G) - sum_{i<=n} <psi_i|G psi_i>, n = 1..dim.
struct ErrorSequence {
  std::vector<double> values;
};

/// values[n-1] = S_n = -sum_{k<=n} beta(d_k), diagonals sorted descending.
struct EntropySequence {
  std::vector<double> values;
};

ErrorSequence error_sequence(const DenseMatrix& g, std::span<const DenseVector> onb);

/// Error terms from their definition, sum_alpha w_alpha ||f_alpha - Q_n f_alpha||^2.
ErrorSequence frame_error_sequence(const WeightedFrame& wf, std::span<const DenseVector> onb);

/// E_{n,m} = sum_{i=n+1..m} <psi_i|G psi_i>.
double relative_error(const DenseMatrix& g, std::span<const DenseVector> onb, std::size_t n, std::size_t m);

EntropySequence entropy_sequence(const DenseMatrix& g, std::span<const DenseVector> onb);

/// -sum lambda_k log lambda_k over the spectrum of a density operator.
double von_neumann_entropy(const DenseMatrix& g);

struct Violation {
  std::string kind;  // "error", "ky_fan", or "entropy"
  std::size_t trial = 0;
  std::size_t n = 0;
  double margin = 0.0;
};

/// Comparison of the KL error sequence against random orthonormal bases.
struct ErrorOptimalityReport {
  std::size_t dim = 0;
  std::size_t trials = 0;
  /// min over trials and n of E_n^psi - E_n^KL.
  double worst_margin = 0.0;
  /// min over trials and n of sum_{k<=n} lambda_k - sum_{k<=n} d_k (sorted).
  double worst_ky_fan_margin = 0.0;
  std::vector<double> kl_errors;
  std::vector<double> psi_min;
  std::vector<double> psi_max;
  std::vector<Violation> violations;

  std::size_t count(const std::string& kind) const;
};

/// Comparison of the KL entropy sequence against random orthonormal bases.
struct EntropyOptimalityReport {
  std::size_t dim = 0;
  std::size_t trials = 0;
  /// min over trials of S_dim^psi - S_dim^KL.
  double worst_margin = 0.0;
  /// Count of (trial, n < dim) with S_n^psi < S_n^KL - 1e-9; measured only.
  std::size_t partial_violations = 0;
  std::size_t partial_comparisons = 0;
  std::vector<double> kl_entropies;
  std::vector<Violation> violations;
};

ErrorOptimalityReport kl_error_optimality(const DenseMatrix& g, std::size_t trials, std::uint64_t seed);
EntropyOptimalityReport kl_entropy_optimality(const DenseMatrix& g, std::size_t trials, std::uint64_t seed);

/// {operator_dim, trials, worst_margin_error, worst_margin_entropy, violations}.
std::string optimality_json(const ErrorOptimalityReport& err, const EntropyOptimalityReport& ent);
/// Rows n, E_n^KL, min E_n^psi, max E_n^psi.
std::string error_csv(const ErrorOptimalityReport& err);

/// Both sides of S_m^psi(G_v) >= sum_n v_n^2 S_m^psi(G_{h_n}).
struct LocalizationTerms {
  double combined = 0.0;
  double averaged = 0.0;
};

LocalizationTerms localization_terms(const Frame& base, const DenseVector& v, std::span<const DenseVector> onb,
                                     std::size_t m);
bool localization_inequality_check(const Frame& base, const DenseVector& v, std::span<const DenseVector> onb,
                                   std::size_t m);

/// Covariance E(X_t X_s) = (t^2H + s^2H - |t-s|^2H) / 2 of H-fractional
/// Brownian motion sampled on an increasing grid of nonnegative times.
class CovarianceKernel {
 public:
  CovarianceKernel(double hurst, std::vector<double> grid);
  /// Grid {1/n, 2/n, ..., 1}.
  static CovarianceKernel uniform(double hurst, std::size_t n);

  double hurst() const noexcept { return hurst_; }
  const std::vector<double>& grid() const noexcept { return grid_; }
  double operator()(double t, double s) const;

 private:
  double hurst_;
  std::vector<double> grid_;
};

DenseMatrix fbm_covariance(const CovarianceKernel& kernel);

/// Spectrum of the integral operator with this kernel on [0, grid.back()],
/// discretized with trapezoidal weights on the grid (with t = 0 as the left
/// endpoint). Eigenvalues approximate the continuous KL eigenvalues.
SpectralData integral_operator_spectrum(const CovarianceKernel& kernel);

/// Paths sum_{j<=k} sqrt(lambda_j) Z_j phi_j over the covariance matrix
/// eigenpairs, Z_j independent standard normal. One vector per path.
std::vector<DenseVector> kl_expand_process(const CovarianceKernel& kernel, std::size_t k, std::uint64_t seed,
                                           std::size_t paths);

}  // namespace klframe
