#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "klframe/coding.hpp"
#include "klframe/linalg.hpp"
#include "klframe/wavelet.hpp"

namespace klframe {

// ---- PGM -------------------------------------------------------------------

struct PgmImage {
  ImageMatrix pixels;
  std::uint32_t maxval = 255;
};

/// Binary P5 only. Header comments are skipped; 16-bit samples are big-endian.
PgmImage parse_pgm(std::span<const std::uint8_t> bytes);
/// Writes "P5\n<w> <h>\n<maxval>\n" then the raster. Pixels are rounded and
/// clamped to [0, maxval].
std::vector<std::uint8_t> encode_pgm(const PgmImage& img);
PgmImage load_pgm(const std::string& path);
void save_pgm(const std::string& path, const PgmImage& img);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

// ---- block PCA -------------------------------------------------------------

struct PcaModel {
  DenseVector mean;
  /// k x dim; rows are covariance eigenvectors in descending eigenvalue order.
  DenseMatrix basis;
  /// All dim covariance eigenvalues, descending.
  std::vector<double> eigenvalues;

  std::size_t dim() const noexcept { return mean.size(); }
  std::size_t kept() const noexcept { return basis.rows(); }
};

/// Covariance uses divisor n (the number of blocks).
PcaModel build_pca(std::span<const DenseVector> blocks, std::size_t keep);
DenseMatrix pca_covariance(std::span<const DenseVector> blocks, const DenseVector& mean);
DenseVector pca_forward(const PcaModel& model, const DenseVector& block);
DenseVector pca_inverse(const PcaModel& model, const DenseVector& coeffs);

// ---- compression -----------------------------------------------------------

struct CompressConfig {
  Filter filter = Filter::Haar;
  std::size_t levels = 2;
  ThresholdMode mode = ThresholdMode::Soft;
  double lambda = 0.0;
  double step = 1.0;
  std::size_t block = 8;
  /// 0 means all block * block components.
  std::size_t keep = 0;
  /// Off: detail blocks are quantized directly, without the PCA change of basis.
  bool pca = true;
};

inline constexpr std::uint8_t kContainerVersion = 1;

/// Everything needed to decompress. Blocks tile the wavelet layout in raster
/// order; blocks inside the deepest a-subband are quantized directly with
/// step min(step, 1), all other blocks are thresholded, PCA-transformed and
/// quantized with `step`.
struct CompressedImage {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint32_t maxval = 255;
  Filter filter = Filter::Haar;
  std::uint8_t levels = 1;
  ThresholdMode mode = ThresholdMode::Soft;
  double lambda = 0.0;
  double step = 1.0;
  std::uint32_t block = 8;
  /// Integer residuals follow the coefficient symbols; reconstruction is exact.
  bool residual = false;
  std::optional<PcaModel> pca;
  CodeTable table;
  std::uint64_t symbol_count = 0;
  BitStream bits;

  std::vector<std::uint8_t> serialize() const;
  static CompressedImage parse(std::span<const std::uint8_t> bytes);
};

/// The residual layer is enabled when lambda = 0, step <= 1, all components
/// are kept and every pixel is an integer.
CompressedImage compress(const PgmImage& img, const CompressConfig& config);
/// Pixels rounded and clamped to [0, maxval].
PgmImage decompress(const CompressedImage& c);

/// Quantized symbols in stream order, as passed to the entropy coder.
std::vector<Symbol> decode_symbols(const CompressedImage& c);

struct Metrics {
  /// +infinity when the images are identical.
  double psnr = 0.0;
  double mse = 0.0;
  /// Entropy-coded payload bits per pixel.
  double bits_per_pixel = 0.0;
  /// Whole container, header included, per pixel.
  double container_bits_per_pixel = 0.0;
  /// Shannon entropy of the symbol histogram, bits per symbol.
  double empirical_entropy_bits = 0.0;
  /// Raw PGM sample bytes over container bytes.
  double compression_ratio = 0.0;
};

double psnr(const ImageMatrix& a, const ImageMatrix& b, double maxval);
Metrics metrics(const PgmImage& original, const PgmImage& reconstructed, const CompressedImage& container);

std::string metrics_json(const Metrics& m);

}  // namespace klframe
