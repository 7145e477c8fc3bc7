#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "klframe/frames.hpp"
#include "klframe/kl.hpp"
#include "klframe/pipeline.hpp"
#include "klframe/splitoff.hpp"

using namespace klframe;
using nlohmann::ordered_json;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;

DenseMatrix parse_matrix_json(const std::string& text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const ordered_json::exception& e) {
    throw Error(Errc::ParseError, e.what());
  }
  const ordered_json& rows = doc.is_object() && doc.contains("matrix") ? doc["matrix"] : doc;
  if (!rows.is_array() || rows.empty() || !rows[0].is_array()) {
    throw Error(Errc::ParseError, "expected an array of rows or {\"matrix\": [...]}");
  }
  const std::size_t n = rows.size(), m = rows[0].size();
  std::vector<double> values;
  for (const auto& row : rows) {
    if (!row.is_array() || row.size() != m) throw Error(Errc::ParseError, "matrix rows differ in length");
    for (const auto& x : row) {
      if (!x.is_number()) throw Error(Errc::ParseError, "matrix entries must be numbers");
      values.push_back(x.get<double>());
    }
  }
  return DenseMatrix(n, m, std::move(values));
}

std::string read_text(const std::string& path) {
  const auto bytes = read_file(path);
  return {bytes.begin(), bytes.end()};
}

void write_text(const std::string& path, const std::string& text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

ordered_json to_json(const DenseVector& v) { return v.vec(); }

ordered_json to_json(const DenseMatrix& m) {
  ordered_json rows = ordered_json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) rows.push_back(m.row(r).vec());
  return rows;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frames, Karhunen-Loeve analysis and wavelet/KL image compression"};
  app.require_subcommand(1);

  // compress
  auto* compress_cmd = app.add_subcommand("compress", "Compress a binary PGM into a KLC1 container");
  std::string in_path, out_path;
  std::string filter = "haar";
  CompressConfig cfg;
  std::optional<double> soft, hard;
  bool no_pca = false;
  compress_cmd->add_option("input", in_path, "Input PGM (P5)")->required();
  compress_cmd->add_option("output", out_path, "Output container")->required();
  compress_cmd->add_option("--filter", filter, "Wavelet filter")->check(CLI::IsMember({"haar", "d4"}))->capture_default_str();
  compress_cmd->add_option("--levels", cfg.levels, "Wavelet levels")->capture_default_str();
  auto* soft_opt = compress_cmd->add_option("--soft", soft, "Soft threshold lambda");
  compress_cmd->add_option("--hard", hard, "Hard threshold lambda")->excludes(soft_opt);
  compress_cmd->add_option("--step", cfg.step, "Quantizer step")->capture_default_str();
  compress_cmd->add_option("--block", cfg.block, "PCA block side")->capture_default_str();
  compress_cmd->add_option("--keep", cfg.keep, "PCA components kept (0 = all)")->capture_default_str();
  compress_cmd->add_flag("--no-pca", no_pca, "Quantize detail blocks without the PCA basis");

  // decompress
  auto* decompress_cmd = app.add_subcommand("decompress", "Decompress a KLC1 container to PGM");
  decompress_cmd->add_option("input", in_path, "Input container")->required();
  decompress_cmd->add_option("output", out_path, "Output PGM")->required();

  // metrics
  auto* metrics_cmd = app.add_subcommand("metrics", "PSNR and rate of a reconstruction");
  std::string original_path, recon_path, container_path;
  metrics_cmd->add_option("original", original_path, "Original PGM")->required();
  metrics_cmd->add_option("reconstructed", recon_path, "Reconstructed PGM")->required();
  metrics_cmd->add_option("container", container_path, "Container")->required();

  // analyze
  auto* analyze_cmd = app.add_subcommand("analyze", "KL error and entropy optimality against random ONBs");
  std::string frame_path, csv_path;
  std::size_t trials = 20;
  std::uint64_t seed = 0;
  analyze_cmd->add_option("frame", frame_path, "Frame JSON")->required();
  analyze_cmd->add_option("--trials", trials, "Random ONBs")->capture_default_str();
  analyze_cmd->add_option("--seed", seed, "Seed")->capture_default_str();
  analyze_cmd->add_option("--csv", csv_path, "Write the error sequences as CSV");

  // splitoff
  auto* splitoff_cmd = app.add_subcommand("splitoff", "Rank-one split-off of the dominant eigenvalue");
  std::string matrix_path;
  std::size_t max_iter = kSplitOffMaxIter;
  double tol = kSplitOffTol;
  splitoff_cmd->add_option("--matrix", matrix_path, "Matrix JSON")->required();
  splitoff_cmd->add_option("--max-iter", max_iter, "Iteration cap")->capture_default_str();
  splitoff_cmd->add_option("--tol", tol, "Convergence tolerance")->capture_default_str();

  // fbm
  auto* fbm_cmd = app.add_subcommand("fbm", "Sample fractional Brownian motion paths by KL expansion");
  double hurst = 0.5;
  std::size_t grid = 0, paths = 0, terms = 0;
  std::uint64_t fbm_seed = 0;
  std::string fbm_out;
  fbm_cmd->add_option("--hurst", hurst, "Hurst index in (0, 1)")->required();
  fbm_cmd->add_option("--grid", grid, "Grid points on (0, 1]")->required();
  fbm_cmd->add_option("--paths", paths, "Number of paths")->required();
  fbm_cmd->add_option("--seed", fbm_seed, "Seed")->required();
  fbm_cmd->add_option("--out", fbm_out, "Output CSV")->required();
  fbm_cmd->add_option("--terms", terms, "KL terms (default: grid)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*compress_cmd) {
      cfg.filter = parse_filter(filter);
      if (hard) {
        cfg.mode = ThresholdMode::Hard;
        cfg.lambda = *hard;
      } else {
        cfg.mode = ThresholdMode::Soft;
        cfg.lambda = soft.value_or(0.0);
      }
      cfg.pca = !no_pca;
      const auto img = load_pgm(in_path);
      const auto c = compress(img, cfg);
      const auto bytes = c.serialize();
      write_file(out_path, bytes);
      const double px = static_cast<double>(img.pixels.pixels().size());
      std::cout << "wrote " << bytes.size() << " bytes, payload " << c.bits.bit_count() / px << " bpp"
                << (c.residual ? ", lossless" : "") << "\n";
    } else if (*decompress_cmd) {
      save_pgm(out_path, decompress(CompressedImage::parse(read_file(in_path))));
    } else if (*metrics_cmd) {
      const auto m = metrics(load_pgm(original_path), load_pgm(recon_path), CompressedImage::parse(read_file(container_path)));
      std::cout << metrics_json(m) << "\n";
    } else if (*analyze_cmd) {
      const DenseMatrix g = read_frame_file(frame_path).operator_matrix();
      const auto err = kl_error_optimality(g, trials, seed);
      const auto ent = kl_entropy_optimality(normalize_trace(g), trials, seed);
      std::cout << optimality_json(err, ent) << "\n";
      if (!csv_path.empty()) write_text(csv_path, error_csv(err));
    } else if (*splitoff_cmd) {
      const DenseMatrix t = parse_matrix_json(read_text(matrix_path));
      const auto r = split_off(t, max_iter, tol);
      ordered_json j;
      j["a"] = r.a;
      j["w1"] = to_json(r.w1);
      j["xi"] = to_json(r.xi);
      j["limit"] = to_json(r.limit);
      j["iterations"] = r.iterations;
      j["residual"] = r.residual;
      j["range_residual"] = r.range_residual;
      j["convergence_slope"] = convergence_slope(r.history);
      std::cout << j.dump(2) << "\n";
    } else if (*fbm_cmd) {
      const auto kernel = CovarianceKernel::uniform(hurst, grid);
      const auto samples = kl_expand_process(kernel, terms == 0 ? grid : terms, fbm_seed, paths);
      std::ostringstream csv;
      csv.precision(17);
      csv << "path";
      for (double t : kernel.grid()) csv << ",t=" << t;
      csv << "\n";
      for (std::size_t p = 0; p < samples.size(); ++p) {
        csv << p;
        for (double x : samples[p]) csv << "," << x;
        csv << "\n";
      }
      write_text(fbm_out, csv.str());
      std::cout << "wrote " << samples.size() << " paths on " << grid << " grid points\n";
    }
  } catch (const Error& e) {
    std::cerr << "klframe: " << e.what() << "\n";
    return e.is_io() ? kExitIo : kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "klframe: " << e.what() << "\n";
    return kExitValidation;
  }
  return 0;
}
