#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "json.hpp"
#include "klframe/kl.hpp"

using namespace klframe;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::Io;
}

std::vector<DenseVector> standard_onb(std::size_t n) { return Frame::standard(n).vectors(); }

std::vector<DenseVector> rotated45() {
  const double r = 1.0 / std::sqrt(2.0);
  return {{r, r}, {r, -r}};
}

DenseMatrix random_density(std::size_t dim, std::mt19937_64& rng) {
  return normalize_trace(random_psd(dim, rng, 1 + rng() % dim));
}

}  // namespace

TEST_CASE("beta continuation") {
  CHECK(beta(0.0) == 0.0);
  CHECK(beta(1.0) == 0.0);
  CHECK(beta(0.5) == doctest::Approx(0.5 * std::log(0.5)));
}

TEST_CASE("kl_basis") {
  for (double l : kl_basis(DenseMatrix::identity(4)).spectral.eigenvalues) CHECK(l == doctest::Approx(1.0));
  CHECK(kl_basis(DenseMatrix::diagonal({5, 2, 2, 1})).spectral.eigenvalues == std::vector<double>{5, 2, 2, 1});
  auto lambda = kl_basis(frame_operator(Frame({{1, 0}, {1, 1}}))).spectral.eigenvalues;
  CHECK(lambda[0] == doctest::Approx((3 + std::sqrt(5.0)) / 2).epsilon(1e-14));
  CHECK(lambda[1] == doctest::Approx((3 - std::sqrt(5.0)) / 2).epsilon(1e-14));

  auto rng = substream(31, 0);
  DenseMatrix g = random_psd(6, rng);
  const double top = kl_basis(g).spectral.eigenvalues.front();
  for (int i = 0; i < 200; ++i) {
    DenseVector x = normalized(random_gaussian(6, rng));
    CHECK(dot(x, g * x) <= top * (1 + 1e-8));
  }

  CHECK(code_of([] { kl_basis(DenseMatrix::diagonal({1, -1})); }) == Errc::NotPSD);
  CHECK(code_of([] { kl_basis(DenseMatrix{{1, 2}, {0, 1}}); }) == Errc::NotSymmetric);

  KLBasis shifted = kl_basis(DenseMatrix::diagonal({5, 2, 3}), true);
  CHECK(shifted.shift == doctest::Approx(2.0));
  CHECK(shifted.spectral.eigenvalues == std::vector<double>{3, 1, 0});
}

TEST_CASE("error_sequence") {
  auto onb = random_onb(4, 3);
  auto e = error_sequence(DenseMatrix::identity(4), onb).values;
  for (std::size_t n = 1; n <= 4; ++n) CHECK(e[n - 1] == doctest::Approx(4.0 - n).epsilon(1e-12));

  DenseMatrix g = DenseMatrix::diagonal({3, 1});
  CHECK(error_sequence(g, standard_onb(2)).values == std::vector<double>{1, 0});
  auto rot = error_sequence(g, rotated45()).values;
  CHECK(rot[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(std::abs(rot[1]) < 1e-14);

  CHECK(code_of([&] { error_sequence(g, standard_onb(3)); }) == Errc::DimMismatch);
  std::vector<DenseVector> skew{{1, 0}, {1, 1}};
  CHECK(code_of([&] { error_sequence(g, skew); }) == Errc::NotOrthonormal);
}

TEST_CASE("relative_error") {
  DenseMatrix g = DenseMatrix::diagonal({3, 1, 2});
  auto onb = standard_onb(3);
  CHECK(relative_error(g, onb, 0, 3) == doctest::Approx(trace(g)));
  CHECK(relative_error(g, onb, 1, 3) == 3.0);
  CHECK(code_of([&] { relative_error(g, onb, 2, 2); }) == Errc::BadRange);
  CHECK(code_of([&] { relative_error(g, onb, 0, 4); }) == Errc::BadRange);

  auto rng = substream(32, 0);
  DenseMatrix h = random_psd(5, rng);
  auto psi = random_onb(5, 9);
  auto e = error_sequence(h, psi).values;
  for (std::size_t n = 1; n < 5; ++n)
    for (std::size_t m = n + 1; m <= 5; ++m)
      CHECK(std::abs(relative_error(h, psi, n, m) - (e[n - 1] - e[m - 1])) <= 1e-12 * trace(h));
}

TEST_CASE("entropy_sequence") {
  for (std::size_t d = 1; d <= 5; ++d) {
    auto s = entropy_sequence((1.0 / d) * DenseMatrix::identity(d), random_onb(d, d)).values;
    for (std::size_t n = 1; n <= d; ++n)
      CHECK(s[n - 1] == doctest::Approx(static_cast<double>(n) / d * std::log(static_cast<double>(d))).epsilon(1e-10));
  }
  CHECK(entropy_sequence(DenseMatrix::diagonal({1, 0}), standard_onb(2)).values == std::vector<double>{0, 0});
  auto s = entropy_sequence(DenseMatrix::diagonal({0.5, 0.5}), rotated45()).values;
  CHECK(s[1] == doctest::Approx(std::log(2.0)).epsilon(1e-14));

  CHECK(code_of([] { entropy_sequence(DenseMatrix::identity(2), standard_onb(2)); }) == Errc::NotNormalized);
  CHECK(code_of([] { entropy_sequence(DenseMatrix::diagonal({1.5, -0.5}), standard_onb(2)); }) ==
        Errc::NotNormalized);
}

TEST_CASE("von_neumann_entropy") {
  CHECK(von_neumann_entropy(DenseMatrix::diagonal({1, 0, 0})) == 0.0);
  for (std::size_t d = 1; d <= 6; ++d)
    CHECK(von_neumann_entropy((1.0 / d) * DenseMatrix::identity(d)) ==
          doctest::Approx(std::log(static_cast<double>(d))).epsilon(1e-12));
  // (3/4) log(4/3) + (1/4) log 4
  CHECK(von_neumann_entropy(DenseMatrix::diagonal({0.75, 0.25})) == doctest::Approx(0.5623351446188083).epsilon(1e-14));
  CHECK(code_of([] { von_neumann_entropy(DenseMatrix::identity(2)); }) == Errc::NotNormalized);
}

TEST_CASE("error identity computed three ways") {
  auto rng = substream(33, 0);
  for (int t = 0; t < 100; ++t) {
    const std::size_t dim = 2 + t % 6;
    std::vector<DenseVector> hs;
    for (std::size_t i = 0; i < dim + 2; ++i) hs.push_back(random_gaussian(dim, rng));
    WeightedFrame wf = WeightedFrame::from_frame(Frame(hs));
    DenseMatrix g = weighted_frame_operator(wf);
    auto onb = random_onb(dim, 500 + t);
    const double tr = trace(g);
    auto e = error_sequence(g, onb).values;
    auto e_def = frame_error_sequence(wf, onb).values;
    for (std::size_t n = 1; n <= dim; ++n) {
      std::vector<DenseVector> head(onb.begin(), onb.begin() + static_cast<std::ptrdiff_t>(n));
      DenseMatrix q = projection_onto(head);
      double via_frame = 0.0;
      for (std::size_t a = 0; a < wf.base().size(); ++a) {
        DenseVector qf = q * wf.base()[a];
        via_frame += wf.weights()[a] * dot(qf, qf);
      }
      const double via_product = trace(g * q);
      const double via_error = tr - e[n - 1];
      CHECK(std::abs(via_frame - via_product) <= 1e-9 * tr);
      CHECK(std::abs(via_product - via_error) <= 1e-9 * tr);
      CHECK(std::abs(e[n - 1] - e_def[n - 1]) <= 1e-9 * tr);
    }
    CHECK(std::abs(e.back()) <= 1e-8 * tr);
  }
}

TEST_CASE("sequence monotonicity") {
  auto rng = substream(34, 0);
  for (int t = 0; t < 100; ++t) {
    const std::size_t dim = 2 + t % 7;
    DenseMatrix g = random_density(dim, rng);
    auto onb = random_onb(dim, 700 + t);
    auto e = error_sequence(g, onb).values;
    auto s = entropy_sequence(g, onb).values;
    for (std::size_t n = 1; n < dim; ++n) {
      CHECK(e[n] <= e[n - 1] + 1e-15);
      CHECK(s[n] >= s[n - 1]);
    }
    for (double x : e) CHECK(x >= -1e-9);
    for (double x : s) CHECK(x >= 0.0);
  }
}

TEST_CASE("majorization of sorted diagonals by eigenvalues") {
  auto rng = substream(35, 0);
  for (int t = 0; t < 200; ++t) {
    const std::size_t dim = 2 + t % 10;
    DenseMatrix g = random_psd(dim, rng);
    auto lambda = kl_basis(g).spectral.eigenvalues;
    auto d = diagonal_elements(g, random_onb(dim, 900 + t));
    std::sort(d.begin(), d.end(), std::greater<>());
    double sl = 0, sd = 0;
    for (std::size_t n = 0; n < dim; ++n) {
      sl += lambda[n];
      sd += d[n];
      CHECK(sd <= sl + 1e-9 * trace(g));
    }
  }
}

TEST_CASE("kl_error_optimality") {
  auto id = kl_error_optimality(DenseMatrix::identity(4), 50, 1);
  CHECK(id.violations.empty());
  CHECK(std::abs(id.worst_margin) < 1e-12);
  for (std::size_t n = 0; n < 4; ++n) {
    CHECK(id.psi_min[n] == doctest::Approx(id.kl_errors[n]));
    CHECK(id.psi_max[n] == doctest::Approx(id.kl_errors[n]));
  }

  DenseMatrix g = DenseMatrix::diagonal({3, 1});
  auto kl = error_sequence(g, kl_basis(g).spectral.eigenvectors).values;
  auto rot = error_sequence(g, rotated45()).values;
  CHECK(kl[0] == doctest::Approx(1.0));
  CHECK(rot[0] == doctest::Approx(2.0));

  auto rng = substream(36, 0);
  DenseMatrix h = random_psd(8, rng);
  auto report = kl_error_optimality(h, 1000, 77);
  CHECK(report.violations.empty());
  CHECK(report.worst_margin >= -1e-9 * trace(h));
  CHECK(report.worst_ky_fan_margin >= -1e-9 * trace(h));

  // KL errors are the eigenvalue tails.
  auto lambda = kl_basis(h).spectral.eigenvalues;
  for (std::size_t n = 0; n < 8; ++n) {
    double tail = 0;
    for (std::size_t k = n + 1; k < 8; ++k) tail += lambda[k];
    CHECK(std::abs(report.kl_errors[n] - tail) <= 1e-9 * trace(h));
  }

  // Determinism: depends only on inputs and seed.
  auto again = kl_error_optimality(h, 30, 77);
  auto first = kl_error_optimality(h, 30, 77);
  CHECK(again.psi_min == first.psi_min);
  CHECK(again.worst_margin == first.worst_margin);
}

TEST_CASE("kl_entropy_optimality") {
  auto flat = kl_entropy_optimality(0.25 * DenseMatrix::identity(4), 30, 2);
  CHECK(flat.violations.empty());
  CHECK(std::abs(flat.worst_margin) < 1e-12);
  CHECK(flat.kl_entropies.back() == doctest::Approx(std::log(4.0)));

  DenseMatrix g = DenseMatrix::diagonal({0.75, 0.25});
  const double s_kl = entropy_sequence(g, kl_basis(g).spectral.eigenvectors).values.back();
  const double s_rot = entropy_sequence(g, rotated45()).values.back();
  CHECK(s_kl == doctest::Approx(0.5623351446188083).epsilon(1e-14));
  CHECK(s_rot == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(s_kl < s_rot);

  auto rng = substream(37, 0);
  DenseMatrix rho = random_density(8, rng);
  auto report = kl_entropy_optimality(rho, 1000, 78);
  CHECK(report.violations.empty());
  CHECK(report.worst_margin >= -1e-9);
  CHECK(report.partial_comparisons == 1000 * 7);

  CHECK(code_of([] { kl_entropy_optimality(DenseMatrix::identity(2), 1, 1); }) == Errc::NotNormalized);
}

TEST_CASE("optimality report serialization") {
  auto rng = substream(38, 0);
  DenseMatrix rho = random_density(3, rng);
  auto err = kl_error_optimality(rho, 5, 1);
  auto ent = kl_entropy_optimality(rho, 5, 1);
  auto doc = nlohmann::json::parse(optimality_json(err, ent));
  CHECK(doc["operator_dim"] == 3);
  CHECK(doc["trials"] == 5);
  CHECK(doc["violations"].is_array());
  CHECK(doc.contains("worst_margin_error"));
  CHECK(doc.contains("worst_margin_entropy"));
  std::string csv = error_csv(err);
  CHECK(csv.rfind("n,E_n_KL,E_n_psi_min,E_n_psi_max\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
}

TEST_CASE("localization inequality") {
  Frame single({{0.6, 0.8}});
  auto t = localization_terms(single, {1.0}, random_onb(2, 4), 2);
  CHECK(t.combined == doctest::Approx(t.averaged).epsilon(1e-14));

  Frame f({{1, 0.5, 0}, {0.2, -1, 0.3}, {0, 0.4, 0.9}, {0.7, 0.7, 0.1}});
  auto onb = random_onb(3, 5);
  DenseVector eps{0, 0, 1, 0};
  for (std::size_t m = 1; m <= 3; ++m) {
    auto terms = localization_terms(f, eps, onb, m);
    double direct = 0;
    for (std::size_t i = 0; i < m; ++i) direct -= beta(std::pow(dot(onb[i], f[2]), 2));
    CHECK(terms.combined == doctest::Approx(direct).epsilon(1e-13));
    CHECK(terms.averaged == doctest::Approx(direct).epsilon(1e-13));
  }

  auto rng = substream(39, 0);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t dim = 2 + trial % 6;
    std::vector<DenseVector> hs;
    const std::size_t count = 1 + rng() % 8;
    for (std::size_t i = 0; i < count; ++i) hs.push_back(random_gaussian(dim, rng));
    Frame frame(hs);
    DenseVector v = normalized(random_gaussian(count, rng));
    const std::size_t m = 1 + rng() % dim;
    CHECK(localization_inequality_check(frame, v, random_onb(dim, rng()), m));
  }

  CHECK(code_of([&] { localization_inequality_check(f, {1, 1, 0, 0}, onb, 2); }) == Errc::NotUnitWeights);
}

TEST_CASE("fbm_covariance") {
  auto rng = substream(40, 0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> grid;
    double t = 0;
    for (int i = 0; i < 12; ++i) grid.push_back(t += std::uniform_real_distribution<double>(0.01, 0.5)(rng));
    DenseMatrix k = fbm_covariance(CovarianceKernel(0.5, grid));
    for (std::size_t i = 0; i < grid.size(); ++i)
      for (std::size_t j = 0; j < grid.size(); ++j) CHECK(std::abs(k(i, j) - std::min(grid[i], grid[j])) <= 1e-12);
  }
  for (double h : {0.1, 0.3, 0.7, 0.95}) CHECK(fbm_covariance(CovarianceKernel(h, {1.0}))(0, 0) == doctest::Approx(1.0));

  CHECK(code_of([] { CovarianceKernel(1.0, {1.0}); }) == Errc::BadKernel);
  CHECK(code_of([] { CovarianceKernel(0.5, {0.5, 0.5}); }) == Errc::BadKernel);
  CHECK(code_of([] { CovarianceKernel(0.5, {}); }) == Errc::BadKernel);
}

TEST_CASE("Brownian KL eigenvalues") {
  // Continuous KL spectrum of min(s,t) on [0,1]: 1/((k-1/2)^2 pi^2).
  auto spec = integral_operator_spectrum(CovarianceKernel::uniform(0.5, 128));
  for (int k = 1; k <= 5; ++k) {
    const double exact = 1.0 / (std::pow(k - 0.5, 2) * std::numbers::pi * std::numbers::pi);
    CHECK(std::abs(spec.eigenvalues[k - 1] - exact) <= 0.02 * exact);
  }
}

TEST_CASE("kl_expand_process") {
  auto kernel = CovarianceKernel::uniform(0.5, 16);
  for (const auto& p : kl_expand_process(kernel, 0, 1, 5)) CHECK(max_abs(p) == 0.0);
  CHECK(code_of([&] { kl_expand_process(kernel, 17, 1, 1); }) == Errc::BadRange);

  const std::size_t paths = 10000;
  auto xs = kl_expand_process(kernel, 16, 2024, paths);
  DenseMatrix k = fbm_covariance(kernel);
  DenseMatrix emp(16, 16);
  for (const auto& x : xs) emp += rank_one(x, x);
  emp *= 1.0 / paths;
  CHECK(max_abs_diff(emp, k) <= 0.05 * k.max_abs());
  CHECK(emp(15, 15) == doctest::Approx(1.0).epsilon(0.05));

  CHECK(kl_expand_process(kernel, 4, 9, 3) == kl_expand_process(kernel, 4, 9, 3));
}
