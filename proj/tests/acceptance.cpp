// Acceptance suite: one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "klframe/coding.hpp"
#include "klframe/frames.hpp"
#include "klframe/kl.hpp"
#include "klframe/pipeline.hpp"
#include "klframe/splitoff.hpp"
#include "klframe/wavelet.hpp"

using namespace klframe;

namespace {

const std::string kData = KLFRAME_TEST_DATA;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail << "first failure: " << what << "; ";
    pass = pass && ok;
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void criterion(const std::string& name, const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto t0 = Clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail << "exception: " << e.what() << "; ";
  }
  const double secs = seconds_since(t0);
  std::printf("%s  %s  (%s%.2f s)\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.str().c_str(), secs);
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

std::vector<DenseVector> random_vectors(std::mt19937_64& rng, std::size_t count, std::size_t dim) {
  std::vector<DenseVector> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(random_gaussian(dim, rng));
  return out;
}

/// Full-span frame: an orthonormal basis scaled randomly, plus random extras.
Frame random_frame(std::mt19937_64& rng, std::size_t dim) {
  std::uniform_real_distribution<double> scale(0.2, 2.0);
  auto vs = random_onb(dim, rng());
  for (auto& v : vs) v *= scale(rng);
  for (auto& v : random_vectors(rng, 1 + rng() % (2 * dim), dim)) vs.push_back(std::move(v));
  return Frame(std::move(vs));
}

DenseMatrix random_density(std::mt19937_64& rng, std::size_t dim) {
  const std::size_t rank = 1 + rng() % dim;
  return normalize_trace(random_psd(dim, rng, rank));
}

PgmImage textured_image(std::size_t h, std::size_t w, std::uint64_t seed) {
  auto rng = substream(seed, 0);
  std::normal_distribution<double> g(0.0, 6.0);
  ImageMatrix m(h, w);
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c)
      m(r, c) = std::clamp(std::round(128 + 60 * std::sin(0.2 * r) * std::cos(0.13 * c) + g(rng)), 0.0, 255.0);
  return {m, 255};
}

}  // namespace

int main() {
  criterion("KL error optimality: 1050 PSD operators (dims 2-16) x 20 ONBs, E_n^KL <= E_n^psi + 1e-9 tr G, Ky Fan",
            [](Outcome& o) {
              const auto t0 = Clock::now();
              std::size_t operators = 0, err_v = 0, kf_v = 0;
              double worst = INFINITY, worst_kf = INFINITY;
              for (std::size_t i = 0; i < 1050; ++i) {
                const std::size_t dim = 2 + i % 15;
                auto rng = substream(1001, i);
                const std::size_t rank = (i % 3 == 0) ? 1 + rng() % dim : 0;
                const auto rep = kl_error_optimality(random_psd(dim, rng, rank), 20, 5000 + i);
                err_v += rep.count("error");
                kf_v += rep.count("ky_fan");
                worst = std::min(worst, rep.worst_margin);
                worst_kf = std::min(worst_kf, rep.worst_ky_fan_margin);
                ++operators;
              }
              const double secs = seconds_since(t0);
              o.detail << operators << " operators, error violations " << err_v << ", Ky Fan violations " << kf_v
                       << ", worst margins " << worst << " / " << worst_kf << "; ";
              o.require(err_v == 0, "error-sequence violation");
              o.require(kf_v == 0, "Ky Fan violation");
              o.require(secs < 60.0, "runtime >= 60 s");
            });

  criterion("KL entropy optimality: 1050 density operators (dims 2-16) x 20 ONBs, S_dim^KL <= S_dim^psi + 1e-9",
            [](Outcome& o) {
              const auto t0 = Clock::now();
              std::size_t violations = 0, partial_v = 0, partial_n = 0;
              double worst = INFINITY;
              for (std::size_t i = 0; i < 1050; ++i) {
                const std::size_t dim = 2 + i % 15;
                auto rng = substream(1002, i);
                const auto rep = kl_entropy_optimality(random_density(rng, dim), 20, 7000 + i);
                violations += rep.violations.size();
                partial_v += rep.partial_violations;
                partial_n += rep.partial_comparisons;
                worst = std::min(worst, rep.worst_margin);
              }
              const double secs = seconds_since(t0);
              o.detail << "violations " << violations << ", worst margin " << worst << ", partial-n comparisons "
                       << partial_n << " with " << partial_v << " violations (logged, not asserted); ";
              o.require(violations == 0, "full-entropy violation");
              o.require(secs < 60.0, "runtime >= 60 s");
            });

  criterion("Localization inequality: 500 random (frame, v, ONB, m), 1e-9 slack", [](Outcome& o) {
    std::size_t violations = 0;
    double worst = INFINITY;
    for (std::size_t i = 0; i < 500; ++i) {
      auto rng = substream(1003, i);
      const std::size_t dim = 2 + i % 9;
      const std::size_t count = 1 + rng() % (2 * dim);
      Frame frame(random_vectors(rng, count, dim));
      const DenseVector v = normalized(random_gaussian(count, rng));
      const std::size_t m = 1 + rng() % dim;
      const auto onb = random_onb(dim, rng());
      const auto t = localization_terms(frame, v, onb, m);
      worst = std::min(worst, t.combined - t.averaged);
      if (!localization_inequality_check(frame, v, onb, m)) ++violations;
    }
    o.detail << "violations " << violations << ", worst margin " << worst << "; ";
    o.require(violations == 0, "localization violation");
  });

  criterion("Weighted-frame trace bound: 500 frames, tr G_v <= c2 + 1e-9, tr G_v = sum v^2 |h|^2 to 1e-12", [](Outcome& o) {
    std::size_t bound_v = 0, identity_v = 0;
    double worst_rel = 0.0;
    for (std::size_t i = 0; i < 500; ++i) {
      auto rng = substream(1004, i);
      const std::size_t dim = 2 + i % 11;
      const Frame f = random_frame(rng, dim);
      const DenseVector v = normalized(random_gaussian(f.size(), rng));
      const double tr = trace(weighted_frame_operator(WeightedFrame::from_sequence(f, v)));
      double expected = 0.0;
      for (std::size_t n = 0; n < f.size(); ++n) expected += v[n] * v[n] * dot(f[n], f[n]);
      const double c2 = frame_bounds(f).c2;
      if (!(tr <= c2 + 1e-9)) ++bound_v;
      const double rel = std::abs(tr - expected) / expected;
      worst_rel = std::max(worst_rel, rel);
      if (rel > 1e-12) ++identity_v;
    }
    o.detail << "bound violations " << bound_v << ", identity violations " << identity_v << ", worst relative "
             << worst_rel << "; ";
    o.require(bound_v == 0, "trace exceeds c2");
    o.require(identity_v == 0, "trace identity off");
  });

  criterion("Duality bounds: 500 (frame, density), c1 tr rho <= tr(rho G) <= c2 tr rho, 1e-9 relative", [](Outcome& o) {
    std::size_t violations = 0;
    for (std::size_t i = 0; i < 500; ++i) {
      auto rng = substream(1005, i);
      const std::size_t dim = 2 + i % 11;
      const Frame f = random_frame(rng, dim);
      if (!duality_bounds_check(frame_operator(f), random_density(rng, dim), frame_bounds(f))) ++violations;
    }
    o.detail << "violations " << violations << "; ";
    o.require(violations == 0, "duality violation");
  });

  criterion("Rank-one split-off: [[2,0],[1,1]] limit, slope, invariants; 200 random diagonalizable, paths agree",
            [](Outcome& o) {
              const DenseMatrix t{{2, 0}, {1, 1}};
              const auto r = split_off(t);
              const double limit_err = max_abs_diff(r.limit, DenseMatrix{{1, 0}, {1, 0}});
              const double slope = convergence_slope(r.history);
              const double w_res = max_abs(t.transpose() * r.w1 - r.a * r.w1);
              const double xi_res = std::max(std::abs(dot(r.xi, r.w1) - 1.0), r.range_residual);
              o.detail << "limit error " << limit_err << ", slope " << slope << ", residuals " << w_res << " / " << xi_res
                       << "; ";
              o.require(limit_err <= 1e-8, "limit");
              o.require(std::abs(slope - std::log(0.5)) <= 0.1 * std::abs(std::log(0.5)), "slope");
              o.require(w_res < 1e-7 && xi_res < 1e-7, "invariants");

              double worst = 0.0;
              for (std::size_t i = 0; i < 200; ++i) {
                auto rng = substream(1006, i);
                const std::size_t n = 2 + i % 9;
                std::uniform_real_distribution<double> unit(0.0, 1.0);
                const double a = (unit(rng) < 0.3 ? -1.0 : 1.0) * (0.5 + 2.5 * unit(rng));
                DenseVector d(n);
                d[0] = a;
                for (std::size_t k = 1; k < n; ++k) d[k] = (2 * unit(rng) - 1) * 0.9 * std::abs(a);
                DenseMatrix s = DenseMatrix::identity(n);
                std::normal_distribution<double> g(0.0, 0.4 / std::sqrt(static_cast<double>(n)));
                for (double& x : s.entries()) x += g(rng);
                const DenseMatrix m = s * DenseMatrix::diagonal(d) * inverse(s);
                const auto sr = split_off(m);
                const DenseVector xi_block = block_xi(block_decomposition(m, sr.w1), sr.w1);
                const double diff =
                    std::max(max_abs_diff(xi_block, sr.xi), max_abs_diff(rank_one(xi_block, sr.w1), sr.limit));
                worst = std::max(worst, diff);
              }
              o.detail << "random: worst path disagreement " << worst << "; ";
              o.require(worst <= 1e-7, "construction paths disagree");
            });

  criterion("Brownian KL: N=256, top 5 within 2% of 1/((k-1/2)^2 pi^2); H=1/2 kernel = min(s,t) to 1e-12", [](Outcome& o) {
    const auto t0 = Clock::now();
    const auto kernel = CovarianceKernel::uniform(0.5, 256);
    const DenseMatrix k = fbm_covariance(kernel);
    double kernel_err = 0.0;
    const auto& t = kernel.grid();
    for (std::size_t i = 0; i < t.size(); ++i)
      for (std::size_t j = 0; j < t.size(); ++j) kernel_err = std::max(kernel_err, std::abs(k(i, j) - std::min(t[i], t[j])));
    const auto spec = integral_operator_spectrum(kernel);
    double worst = 0.0;
    for (int n = 1; n <= 5; ++n) {
      const double exact = 1.0 / (std::pow(n - 0.5, 2) * std::numbers::pi * std::numbers::pi);
      worst = std::max(worst, std::abs(spec.eigenvalues[n - 1] - exact) / exact);
    }
    const double secs = seconds_since(t0);
    o.detail << "worst relative eigenvalue error " << worst << ", kernel error " << kernel_err << "; ";
    o.require(worst <= 0.02, "eigenvalue outside 2%");
    o.require(kernel_err <= 1e-12, "kernel differs from min(s,t)");
    o.require(secs < 10.0, "runtime >= 10 s");
  });

  criterion("Shannon-Fano golden: a:00 e:01 f:100 q:101 r:11; 10^4 round trips; L in [H2, H2+1]", [](Outcome& o) {
    const auto model = SymbolModel::from_probabilities({{'a', 0.3}, {'e', 0.2}, {'f', 0.2}, {'q', 0.2}, {'r', 0.1}});
    const auto t = shannon_fano_table(model);
    o.require(t.at('a') == "00" && t.at('e') == "01" && t.at('f') == "100" && t.at('q') == "101", "printed codes");
    o.require(t.at('r') == "11", "r code");

    std::size_t trip_fail = 0, bound_fail = 0;
    double worst_hi = -INFINITY, worst_lo = INFINITY;
    for (std::size_t i = 0; i < 10000; ++i) {
      auto rng = substream(1008, i);
      const std::size_t n = 1 + rng() % 64;
      std::uniform_real_distribution<double> u(0.001, 1.0);
      std::vector<double> w(n);
      double total = 0.0;
      for (double& x : w) total += (x = std::pow(u(rng), 1 + i % 4));
      std::vector<SymbolModel::Entry> entries;
      for (std::size_t s = 0; s < n; ++s) entries.push_back({static_cast<Symbol>(s * 7) - 100, w[s] / total});
      const auto m = SymbolModel::from_probabilities(entries);
      const auto table = shannon_fano_table(m);
      const double h = shannon_entropy_bits(m), l = average_code_length(m, table);
      worst_hi = std::max(worst_hi, l - h - 1.0);
      worst_lo = std::min(worst_lo, l - h);
      if (l < h - 1e-12 || l > h + 1.0 + 1e-12) ++bound_fail;

      std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
      std::vector<Symbol> data(rng() % 300);
      for (auto& s : data) s = entries[pick(rng)].symbol;
      if (decode(encode(data, table), table, data.size()) != data) ++trip_fail;
    }
    o.detail << "round-trip failures " << trip_fail << ", rate-bound failures " << bound_fail << ", min L-H " << worst_lo
             << ", max L-H-1 " << worst_hi << "; ";
    o.require(trip_fail == 0, "round trip");
    o.require(bound_fail == 0, "rate bound");
  });

  criterion("Wavelet perfect reconstruction: Haar and d4, 2^k x 2^m <= 256, levels <= 5, 1e-10 max-norm, Parseval 1e-9",
            [](Outcome& o) {
              double worst_rec = 0.0, worst_energy = 0.0;
              std::size_t cases = 0;
              for (std::size_t k = 1; k <= 8; ++k) {
                for (std::size_t m = 1; m <= 8; ++m) {
                  const std::size_t h = std::size_t{1} << k, w = std::size_t{1} << m;
                  auto rng = substream(1009, k * 16 + m);
                  std::uniform_real_distribution<double> u(0.0, 255.0);
                  ImageMatrix img(h, w);
                  for (double& p : img.pixels()) p = u(rng);
                  for (Filter f : {Filter::Haar, Filter::D4}) {
                    for (std::size_t levels = 1; levels <= std::min<std::size_t>({k, m, 5}); ++levels) {
                      const auto dec = dwt2_multi(img, f, levels);
                      worst_rec = std::max(worst_rec, max_abs_diff(idwt2_multi(dec), img));
                      const double e0 = img.frobenius() * img.frobenius();
                      const double e1 = dec.layout.frobenius() * dec.layout.frobenius();
                      worst_energy = std::max(worst_energy, std::abs(e1 - e0) / e0);
                      ++cases;
                    }
                  }
                }
              }
              o.detail << cases << " transforms, worst reconstruction " << worst_rec << ", worst Parseval " << worst_energy
                       << "; ";
              o.require(worst_rec <= 1e-10, "reconstruction");
              o.require(worst_energy <= 1e-9, "Parseval");
            });

  criterion("Pipeline: gradient64 golden config bpp < 8, PSNR > 30 dB; lossless round trip; deterministic container",
            [](Outcome& o) {
              const auto img = load_pgm(kData + "/gradient64.pgm");
              CompressConfig golden;
              golden.filter = Filter::Haar;
              golden.levels = 2;
              golden.mode = ThresholdMode::Soft;
              golden.lambda = 4.0;
              golden.step = 2.0;
              golden.block = 8;
              golden.keep = 16;
              const auto c1 = compress(img, golden).serialize();
              const auto c2 = compress(img, golden).serialize();
              const auto parsed = CompressedImage::parse(c1);
              const auto rec = decompress(parsed);
              const auto m = metrics(img, rec, parsed);
              o.detail << "bpp " << m.bits_per_pixel << " (container incl. header " << m.container_bits_per_pixel
                       << "), PSNR " << m.psnr << " dB; ";
              o.require(m.bits_per_pixel < 8.0, "bpp");
              o.require(m.psnr > 30.0, "PSNR");
              o.require(c1 == c2, "containers differ between runs");
              o.require(c1 == read_file(kData + "/gradient64_golden.klc"), "container differs from golden file");
              o.require(encode_pgm(rec) == read_file(kData + "/gradient64_golden_recon.pgm"), "reconstruction differs from golden");

              CompressConfig lossless;
              lossless.lambda = 0.0;
              lossless.step = 1.0;
              lossless.block = 8;
              lossless.keep = 0;
              bool exact = true;
              for (Filter f : {Filter::Haar, Filter::D4}) {
                lossless.filter = f;
                for (const auto& src : {img, textured_image(64, 64, 3)}) {
                  const auto back = decompress(CompressedImage::parse(compress(src, lossless).serialize()));
                  exact = exact && back.pixels == src.pixels;
                }
              }
              o.detail << "lossless exact " << (exact ? "yes" : "no") << "; ";
              o.require(exact, "lossless round trip");
            });

  criterion("PCA residual identity: sum ||x - x_k||^2 = n sum_{j>k} lambda_j within 1e-6, equals n E_k^KL", [](Outcome& o) {
    double worst = 0.0, worst_kl = 0.0;
    std::size_t checks = 0;
    auto check_set = [&](const std::vector<DenseVector>& blocks) {
      const std::size_t d = blocks[0].size();
      const auto full = build_pca(blocks, d);
      const DenseMatrix cov = pca_covariance(blocks, full.mean);
      std::vector<DenseVector> rows;
      for (std::size_t r = 0; r < d; ++r) rows.push_back(full.basis.row(r));
      const auto e = error_sequence(cov, rows);
      const double n = static_cast<double>(blocks.size());
      const double floor = 1e-9 * trace(cov);
      for (std::size_t k = 1; k < d; ++k) {
        double tail = 0.0;
        for (std::size_t j = k; j < d; ++j) tail += full.eigenvalues[j];
        // Tails at rounding level carry no relative information.
        if (tail <= floor) continue;
        const auto model = build_pca(blocks, k);
        double err = 0.0;
        for (const auto& b : blocks) {
          const DenseVector r = b - pca_inverse(model, pca_forward(model, b));
          err += dot(r, r);
        }
        worst = std::max(worst, std::abs(err - n * tail) / (n * tail));
        worst_kl = std::max(worst_kl, std::abs(err - n * e.values[k - 1]) / (n * tail));
        ++checks;
      }
    };
    for (std::size_t i = 0; i < 30; ++i) {
      auto rng = substream(1010, i);
      const std::size_t d = 2 + i % 15;
      DenseMatrix mix(d, d);
      std::normal_distribution<double> g(0.0, 1.0);
      for (double& x : mix.entries()) x = g(rng);
      std::vector<DenseVector> blocks;
      for (std::size_t b = 0; b < 50 + 10 * d; ++b) blocks.push_back(mix * random_gaussian(d, rng));
      check_set(blocks);
    }
    for (const auto& img : {load_pgm(kData + "/gradient64.pgm"), textured_image(64, 64, 3)}) {
      const auto dec = dwt2_multi(img.pixels, Filter::Haar, 1);
      std::vector<DenseVector> blocks;
      for (std::size_t br = 0; br < 16; ++br) {
        for (std::size_t bc = 0; bc < 16; ++bc) {
          if (br < 8 && bc < 8) continue;
          DenseVector v(16);
          for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j) v[i * 4 + j] = dec.layout(br * 4 + i, bc * 4 + j);
          blocks.push_back(v);
        }
      }
      check_set(blocks);
    }
    o.detail << checks << " (ensemble, k) pairs, worst relative " << worst << ", vs E_k^KL " << worst_kl << "; ";
    o.require(worst <= 1e-6, "residual identity");
    o.require(worst_kl <= 1e-6, "error-sequence cross-check");
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
