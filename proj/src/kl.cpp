#include "klframe/kl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace klframe {

namespace {

constexpr double kOrthonormalTol = 1e-9;
constexpr double kNormalizedTol = 1e-6;

void check_onb(const DenseMatrix& g, std::span<const DenseVector> onb) {
  if (!g.is_square()) throw Error(Errc::NonSquare, "operator must be square");
  if (onb.size() != g.rows()) {
    throw Error(Errc::DimMismatch, "basis has " + std::to_string(onb.size()) + " vectors for a " +
                                       std::to_string(g.rows()) + "-dimensional operator");
  }
  for (const DenseVector& v : onb) {
    if (v.size() != g.rows()) throw Error(Errc::DimMismatch, "basis vector dimension differs from operator");
  }
  if (orthonormality_defect(onb) > kOrthonormalTol) throw Error(Errc::NotOrthonormal, "basis is not orthonormal");
}

void check_normalized(const DenseMatrix& g) {
  const double tr = trace(g);
  if (std::abs(tr - 1.0) > kNormalizedTol) {
    throw Error(Errc::NotNormalized, "trace is " + std::to_string(tr) + ", expected 1");
  }
}

double quadratic_form(const DenseMatrix& g, const DenseVector& x) { return dot(x, g * x); }

/// Clamp entropy arguments into [0,1]; reject values outside by more than 1e-9.
double clamp_unit(double d) {
  if (d < -1e-9 || d > 1.0 + 1e-9) {
    throw Error(Errc::NotNormalized, "diagonal element " + std::to_string(d) + " outside [0,1]");
  }
  return std::clamp(d, 0.0, 1.0);
}

/// -sum_{i<m} beta(<psi_i|G psi_i>) in basis order, beta on [0, inf).
double partial_entropy(const DenseMatrix& g, std::span<const DenseVector> onb, std::size_t m) {
  double s = 0.0;
  for (std::size_t i = 0; i < m; ++i) s -= beta(std::max(quadratic_form(g, onb[i]), 0.0));
  return s;
}

std::vector<double> sorted_descending(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end(), std::greater<>());
  return xs;
}

}  // namespace

double beta(double t) {
  if (t <= 0.0 || t == 1.0) return 0.0;
  return t * std::log(t);
}

KLBasis kl_basis(const DenseMatrix& g, bool shift_to_min) {
  SpectralData s = symmetric_eigen(g);
  const double top = s.eigenvalues.empty() ? 0.0 : s.eigenvalues.front();
  const double bottom = s.eigenvalues.empty() ? 0.0 : s.eigenvalues.back();
  if (bottom < -1e-9 * std::max(std::abs(top), std::numeric_limits<double>::min())) {
    throw Error(Errc::NotPSD, "operator has eigenvalue " + std::to_string(bottom));
  }
  KLBasis kl{std::move(s), 0.0};
  if (shift_to_min) {
    kl.shift = bottom;
    for (double& l : kl.spectral.eigenvalues) l -= bottom;
  }
  return kl;
}

DenseMatrix normalize_trace(const DenseMatrix& g) {
  const double tr = trace(g);
  if (tr == 0.0) throw Error(Errc::NotNormalized, "cannot normalize an operator with zero trace");
  return (1.0 / tr) * g;
}

std::vector<double> diagonal_elements(const DenseMatrix& g, std::span<const DenseVector> onb) {
  check_onb(g, onb);
  std::vector<double> d;
  d.reserve(onb.size());
  for (const DenseVector& psi : onb) d.push_back(quadratic_form(g, psi));
  return d;
}

ErrorSequence error_sequence(const DenseMatrix& g, std::span<const DenseVector> onb) {
  const std::vector<double> d = diagonal_elements(g, onb);
  const double tr = trace(g);
  ErrorSequence e;
  double captured = 0.0;
  for (double di : d) {
    captured += di;
    e.values.push_back(tr - captured);
  }
  return e;
}

ErrorSequence frame_error_sequence(const WeightedFrame& wf, std::span<const DenseVector> onb) {
  const Frame& base = wf.base();
  if (onb.size() != base.dim()) throw Error(Errc::DimMismatch, "basis size differs from frame dimension");
  if (orthonormality_defect(onb) > kOrthonormalTol) throw Error(Errc::NotOrthonormal, "basis is not orthonormal");
  ErrorSequence e;
  for (std::size_t n = 1; n <= onb.size(); ++n) {
    double total = 0.0;
    for (std::size_t a = 0; a < base.size(); ++a) {
      DenseVector residual = base[a];
      for (std::size_t i = 0; i < n; ++i) residual -= dot(onb[i], base[a]) * onb[i];
      total += wf.weights()[a] * dot(residual, residual);
    }
    e.values.push_back(total);
  }
  return e;
}

double relative_error(const DenseMatrix& g, std::span<const DenseVector> onb, std::size_t n, std::size_t m) {
  if (!(n < m) || m > onb.size()) {
    throw Error(Errc::BadRange, "need n < m <= dim, got n=" + std::to_string(n) + " m=" + std::to_string(m));
  }
  const std::vector<double> d = diagonal_elements(g, onb);
  double s = 0.0;
  for (std::size_t i = n; i < m; ++i) s += d[i];
  return s;
}

EntropySequence entropy_sequence(const DenseMatrix& g, std::span<const DenseVector> onb) {
  check_normalized(g);
  std::vector<double> d = diagonal_elements(g, onb);
  for (double& x : d) x = clamp_unit(x);
  d = sorted_descending(std::move(d));
  EntropySequence s;
  double acc = 0.0;
  for (double x : d) {
    acc -= beta(x);
    s.values.push_back(acc);
  }
  return s;
}

double von_neumann_entropy(const DenseMatrix& g) {
  check_normalized(g);
  const KLBasis kl = kl_basis(g);
  double s = 0.0;
  for (double l : kl.spectral.eigenvalues) s -= beta(clamp_unit(l));
  return s;
}

// ---------------------------------------------------------------- optimality

std::size_t ErrorOptimalityReport::count(const std::string& kind) const {
  return static_cast<std::size_t>(
      std::count_if(violations.begin(), violations.end(), [&](const Violation& v) { return v.kind == kind; }));
}

ErrorOptimalityReport kl_error_optimality(const DenseMatrix& g, std::size_t trials, std::uint64_t seed) {
  const KLBasis kl = kl_basis(g);
  const std::size_t dim = g.rows();
  const double tr = trace(g);
  const double tol = 1e-9 * std::max(std::abs(tr), std::numeric_limits<double>::min());
  const auto& lambda = kl.spectral.eigenvalues;

  ErrorOptimalityReport r;
  r.dim = dim;
  r.trials = trials;
  r.kl_errors = error_sequence(g, kl.spectral.eigenvectors).values;
  r.psi_min.assign(dim, std::numeric_limits<double>::infinity());
  r.psi_max.assign(dim, -std::numeric_limits<double>::infinity());
  r.worst_margin = std::numeric_limits<double>::infinity();
  r.worst_ky_fan_margin = std::numeric_limits<double>::infinity();

  for (std::size_t t = 0; t < trials; ++t) {
    const auto onb = random_onb(dim, substream(seed, t)());
    const std::vector<double> psi_errors = error_sequence(g, onb).values;
    const std::vector<double> d = sorted_descending(diagonal_elements(g, onb));
    double lambda_sum = 0.0, d_sum = 0.0;
    for (std::size_t n = 0; n < dim; ++n) {
      r.psi_min[n] = std::min(r.psi_min[n], psi_errors[n]);
      r.psi_max[n] = std::max(r.psi_max[n], psi_errors[n]);
      const double margin = psi_errors[n] - r.kl_errors[n];
      r.worst_margin = std::min(r.worst_margin, margin);
      if (margin < -tol) r.violations.push_back({"error", t, n + 1, margin});

      lambda_sum += lambda[n];
      d_sum += d[n];
      const double ky_fan = lambda_sum - d_sum;
      r.worst_ky_fan_margin = std::min(r.worst_ky_fan_margin, ky_fan);
      if (ky_fan < -tol) r.violations.push_back({"ky_fan", t, n + 1, ky_fan});
    }
  }
  return r;
}

EntropyOptimalityReport kl_entropy_optimality(const DenseMatrix& g, std::size_t trials, std::uint64_t seed) {
  check_normalized(g);
  const KLBasis kl = kl_basis(g);
  const std::size_t dim = g.rows();

  EntropyOptimalityReport r;
  r.dim = dim;
  r.trials = trials;
  double acc = 0.0;
  for (double l : kl.spectral.eigenvalues) {
    acc -= beta(clamp_unit(l));
    r.kl_entropies.push_back(acc);
  }
  r.worst_margin = std::numeric_limits<double>::infinity();

  for (std::size_t t = 0; t < trials; ++t) {
    const auto onb = random_onb(dim, substream(seed, t)());
    const std::vector<double> s = entropy_sequence(g, onb).values;
    const double margin = s.back() - r.kl_entropies.back();
    r.worst_margin = std::min(r.worst_margin, margin);
    if (margin < -1e-9) r.violations.push_back({"entropy", t, dim, margin});
    for (std::size_t n = 0; n + 1 < dim; ++n) {
      ++r.partial_comparisons;
      if (s[n] < r.kl_entropies[n] - 1e-9) ++r.partial_violations;
    }
  }
  return r;
}

std::string optimality_json(const ErrorOptimalityReport& err, const EntropyOptimalityReport& ent) {
  using nlohmann::json;
  auto finite_or_null = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
  json doc;
  doc["operator_dim"] = err.dim;
  doc["trials"] = err.trials;
  doc["worst_margin_error"] = finite_or_null(err.worst_margin);
  doc["worst_margin_ky_fan"] = finite_or_null(err.worst_ky_fan_margin);
  doc["worst_margin_entropy"] = finite_or_null(ent.worst_margin);
  doc["partial_entropy_comparisons"] = ent.partial_comparisons;
  doc["partial_entropy_violations"] = ent.partial_violations;
  doc["violations"] = json::array();
  auto emit = [&](const Violation& v) {
    doc["violations"].push_back({{"kind", v.kind}, {"trial", v.trial}, {"n", v.n}, {"margin", v.margin}});
  };
  for (const auto& v : err.violations) emit(v);
  for (const auto& v : ent.violations) emit(v);
  return doc.dump(2);
}

std::string error_csv(const ErrorOptimalityReport& err) {
  std::ostringstream out;
  out.precision(17);
  out << "n,E_n_KL,E_n_psi_min,E_n_psi_max\n";
  for (std::size_t n = 0; n < err.dim; ++n) {
    out << n + 1 << ',' << err.kl_errors[n] << ',' << err.psi_min[n] << ',' << err.psi_max[n] << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------- localization

LocalizationTerms localization_terms(const Frame& base, const DenseVector& v, std::span<const DenseVector> onb,
                                     std::size_t m) {
  if (v.size() != base.size()) throw Error(Errc::DimMismatch, "weight vector length differs from frame size");
  if (std::abs(norm(v) - 1.0) > 1e-10) throw Error(Errc::NotUnitWeights, "weight vector must have unit l2 norm");
  if (m > base.dim()) throw Error(Errc::BadRange, "m exceeds the dimension");
  const std::size_t dim = base.dim();
  DenseMatrix g_v(dim, dim);
  for (std::size_t n = 0; n < base.size(); ++n) g_v += (v[n] * v[n]) * rank_one(base[n], base[n]);
  check_onb(g_v, onb);

  LocalizationTerms terms;
  terms.combined = partial_entropy(g_v, onb, m);
  for (std::size_t n = 0; n < base.size(); ++n) {
    if (v[n] == 0.0) continue;
    terms.averaged += v[n] * v[n] * partial_entropy(rank_one(base[n], base[n]), onb, m);
  }
  return terms;
}

bool localization_inequality_check(const Frame& base, const DenseVector& v, std::span<const DenseVector> onb,
                                   std::size_t m) {
  const LocalizationTerms t = localization_terms(base, v, onb, m);
  return t.combined >= t.averaged - 1e-9;
}

// ---------------------------------------------------------------- fBm

CovarianceKernel::CovarianceKernel(double hurst, std::vector<double> grid) : hurst_(hurst), grid_(std::move(grid)) {
  if (!(hurst_ > 0.0 && hurst_ < 1.0)) throw Error(Errc::BadKernel, "Hurst index must lie in (0,1)");
  if (grid_.empty()) throw Error(Errc::BadKernel, "grid is empty");
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    if (!std::isfinite(grid_[i]) || grid_[i] < 0.0) throw Error(Errc::BadKernel, "grid times must be finite and >= 0");
    if (i > 0 && !(grid_[i] > grid_[i - 1])) throw Error(Errc::BadKernel, "grid must be strictly increasing");
  }
}

CovarianceKernel CovarianceKernel::uniform(double hurst, std::size_t n) {
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) grid[i] = static_cast<double>(i + 1) / static_cast<double>(n);
  return CovarianceKernel(hurst, std::move(grid));
}

double CovarianceKernel::operator()(double t, double s) const {
  const double e = 2.0 * hurst_;
  return 0.5 * (std::pow(t, e) + std::pow(s, e) - std::pow(std::abs(t - s), e));
}

DenseMatrix fbm_covariance(const CovarianceKernel& kernel) {
  const auto& t = kernel.grid();
  const std::size_t n = t.size();
  DenseMatrix k(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) k(i, j) = k(j, i) = kernel(t[i], t[j]);
  const auto spec = symmetric_eigen(k);
  if (spec.eigenvalues.back() < -1e-8 * spec.eigenvalues.front()) {
    throw Error(Errc::NotPSD, "discretized kernel is indefinite beyond tolerance");
  }
  return k;
}

SpectralData integral_operator_spectrum(const CovarianceKernel& kernel) {
  const auto& t = kernel.grid();
  const std::size_t n = t.size();
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double left = i == 0 ? (t[0] > 0 ? 0.0 : t[0]) : t[i - 1];
    const double right = i + 1 < n ? t[i + 1] : t[i];
    w[i] = 0.5 * (right - left);
  }
  DenseMatrix k = fbm_covariance(kernel);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) k(i, j) *= std::sqrt(w[i] * w[j]);
  return symmetric_eigen(k);
}

std::vector<DenseVector> kl_expand_process(const CovarianceKernel& kernel, std::size_t k, std::uint64_t seed,
                                           std::size_t paths) {
  const std::size_t n = kernel.grid().size();
  if (k > n) throw Error(Errc::BadRange, "truncation exceeds grid size");
  std::vector<DenseVector> out(paths, DenseVector(n));
  if (k == 0) return out;
  const KLBasis kl = kl_basis(fbm_covariance(kernel));
  std::vector<double> scale(k);
  for (std::size_t j = 0; j < k; ++j) scale[j] = std::sqrt(std::max(kl.spectral.eigenvalues[j], 0.0));
  for (std::size_t p = 0; p < paths; ++p) {
    auto rng = substream(seed, p);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t j = 0; j < k; ++j) out[p] += (scale[j] * gauss(rng)) * kl.spectral.eigenvectors[j];
  }
  return out;
}

}  // namespace klframe
