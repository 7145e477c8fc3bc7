#include "klframe/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>

#include "json.hpp"

#include "byteio.hpp"

namespace klframe {

// ---- PGM -------------------------------------------------------------------

namespace {

constexpr std::size_t kMaxPgmSide = 1U << 16;

bool is_space(std::uint8_t c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

/// Next unsigned header integer, skipping whitespace and '#' comments.
std::size_t header_int(std::span<const std::uint8_t> b, std::size_t& at) {
  for (;;) {
    if (at >= b.size()) throw Error(Errc::TruncatedFile, "PGM header ends early");
    if (is_space(b[at])) {
      ++at;
    } else if (b[at] == '#') {
      while (at < b.size() && b[at] != '\n' && b[at] != '\r') ++at;
    } else {
      break;
    }
  }
  if (b[at] < '0' || b[at] > '9') throw Error(Errc::ParseError, "PGM header field is not a number");
  std::size_t v = 0;
  while (at < b.size() && b[at] >= '0' && b[at] <= '9') {
    v = v * 10 + (b[at] - '0');
    if (v > 10 * kMaxPgmSide) throw Error(Errc::ParseError, "PGM header field too large");
    ++at;
  }
  if (at >= b.size()) throw Error(Errc::TruncatedFile, "PGM header ends early");
  return v;
}

}  // namespace

PgmImage parse_pgm(std::span<const std::uint8_t> b) {
  if (b.size() < 2 || b[0] != 'P' || b[1] != '5') throw Error(Errc::BadMagic, "not a binary PGM (P5) file");
  std::size_t at = 2;
  if (at < b.size() && !is_space(b[at])) throw Error(Errc::BadMagic, "not a binary PGM (P5) file");
  const std::size_t width = header_int(b, at);
  const std::size_t height = header_int(b, at);
  const std::size_t maxval = header_int(b, at);
  if (maxval == 0 || maxval > 65535) throw Error(Errc::UnsupportedMaxval, "PGM maxval must be in [1, 65535]");
  if (width > kMaxPgmSide || height > kMaxPgmSide) throw Error(Errc::ParseError, "PGM dimensions too large");
  if (!is_space(b[at])) throw Error(Errc::ParseError, "missing whitespace after PGM maxval");
  ++at;

  const std::size_t bps = maxval < 256 ? 1 : 2;
  const std::size_t n = width * height;
  if (b.size() - at < n * bps) throw Error(Errc::TruncatedFile, "PGM raster is shorter than its header declares");
  std::vector<double> px(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t v = bps == 1 ? b[at + i] : (std::size_t{b[at + 2 * i]} << 8) | b[at + 2 * i + 1];
    if (v > maxval) throw Error(Errc::ParseError, "PGM sample exceeds maxval");
    px[i] = static_cast<double>(v);
  }
  return {ImageMatrix(height, width, std::move(px)), static_cast<std::uint32_t>(maxval)};
}

std::vector<std::uint8_t> encode_pgm(const PgmImage& img) {
  if (img.maxval == 0 || img.maxval > 65535) throw Error(Errc::UnsupportedMaxval, "PGM maxval must be in [1, 65535]");
  const std::string header = "P5\n" + std::to_string(img.pixels.width()) + " " + std::to_string(img.pixels.height()) +
                             "\n" + std::to_string(img.maxval) + "\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  const double top = img.maxval;
  for (double p : img.pixels.pixels()) {
    const auto v = static_cast<std::uint32_t>(std::clamp(std::round(p), 0.0, top));
    if (img.maxval < 256) {
      out.push_back(static_cast<std::uint8_t>(v));
    } else {
      out.push_back(static_cast<std::uint8_t>(v >> 8));
      out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    }
  }
  return out;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open '" + path + "' for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(Errc::Io, "read failed for '" + path + "'");
  return bytes;
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::Io, "cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::Io, "write failed for '" + path + "'");
}

PgmImage load_pgm(const std::string& path) { return parse_pgm(read_file(path)); }

void save_pgm(const std::string& path, const PgmImage& img) { write_file(path, encode_pgm(img)); }

// ---- block PCA -------------------------------------------------------------

DenseMatrix pca_covariance(std::span<const DenseVector> blocks, const DenseVector& mean) {
  const std::size_t d = mean.size();
  DenseMatrix c(d, d);
  for (const auto& x : blocks) {
    const DenseVector y = x - mean;
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i; j < d; ++j) c(i, j) += y[i] * y[j];
  }
  const double inv_n = 1.0 / static_cast<double>(blocks.size());
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      c(i, j) *= inv_n;
      c(j, i) = c(i, j);
    }
  }
  return c;
}

PcaModel build_pca(std::span<const DenseVector> blocks, std::size_t keep) {
  if (blocks.size() < 2) throw Error(Errc::TooFewBlocks, "PCA needs at least 2 blocks");
  const std::size_t d = blocks[0].size();
  if (d == 0) throw Error(Errc::ZeroDim, "PCA blocks are empty");
  if (keep == 0) throw Error(Errc::BadRange, "PCA must keep at least one component");
  if (keep > d) throw Error(Errc::KTooLarge, "cannot keep more components than the block length");

  DenseVector mean(d);
  for (const auto& x : blocks) {
    if (x.size() != d) throw Error(Errc::DimMismatch, "PCA blocks differ in length");
    mean += x;
  }
  mean *= 1.0 / static_cast<double>(blocks.size());

  const SpectralData eig = symmetric_eigen(pca_covariance(blocks, mean));
  PcaModel m;
  m.mean = std::move(mean);
  m.basis = DenseMatrix(keep, d);
  for (std::size_t r = 0; r < keep; ++r)
    for (std::size_t c = 0; c < d; ++c) m.basis(r, c) = eig.eigenvectors[r][c];
  m.eigenvalues = eig.eigenvalues;
  return m;
}

DenseVector pca_forward(const PcaModel& model, const DenseVector& block) {
  if (block.size() != model.dim()) throw Error(Errc::DimMismatch, "block length differs from PCA dimension");
  return model.basis * (block - model.mean);
}

DenseVector pca_inverse(const PcaModel& model, const DenseVector& coeffs) {
  if (coeffs.size() != model.kept()) throw Error(Errc::DimMismatch, "coefficient count differs from kept components");
  DenseVector out = model.mean;
  for (std::size_t r = 0; r < model.kept(); ++r)
    for (std::size_t c = 0; c < model.dim(); ++c) out[c] += model.basis(r, c) * coeffs[r];
  return out;
}

// ---- block layout ----------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'K', 'L', 'C', '1'};

struct BlockGrid {
  std::size_t b, rows, cols, a_rows, a_cols;

  BlockGrid(std::size_t height, std::size_t width, std::size_t levels, std::size_t block)
      : b(block), rows(height / block), cols(width / block), a_rows((height >> levels) / block),
        a_cols((width >> levels) / block) {}

  bool in_a(std::size_t br, std::size_t bc) const { return br < a_rows && bc < a_cols; }
  std::size_t a_blocks() const { return a_rows * a_cols; }
  std::size_t detail_blocks() const { return rows * cols - a_blocks(); }
};

void check_grid(std::size_t height, std::size_t width, std::size_t levels, std::size_t block, Errc code) {
  if (levels == 0 || levels > 255 || levels > max_levels(height, width)) {
    throw Error(code == Errc::ConfigInvalid ? Errc::TooManyLevels : code,
                "levels must be in [1, " + std::to_string(max_levels(height, width)) + "] for this image");
  }
  if (block == 0 || (height >> levels) % block != 0 || (width >> levels) % block != 0) {
    throw Error(code, "block size must divide the deepest subband dimensions " + std::to_string(height >> levels) +
                          "x" + std::to_string(width >> levels));
  }
}

DenseVector get_block(const ImageMatrix& m, std::size_t b, std::size_t br, std::size_t bc) {
  DenseVector v(b * b);
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t j = 0; j < b; ++j) v[i * b + j] = m(br * b + i, bc * b + j);
  return v;
}

void put_block(ImageMatrix& m, std::size_t b, std::size_t br, std::size_t bc, const DenseVector& v) {
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t j = 0; j < b; ++j) m(br * b + i, bc * b + j) = v[i * b + j];
}

double a_step(double step) { return std::min(step, 1.0); }

Symbol to_symbol(std::int64_t q) {
  if (q < std::numeric_limits<Symbol>::min() || q > std::numeric_limits<Symbol>::max()) {
    throw Error(Errc::ConfigInvalid, "quantized value overflows the symbol range; increase the step");
  }
  return static_cast<Symbol>(q);
}

std::size_t kept_components(const CompressedImage& c) { return c.pca ? c.pca->kept() : std::size_t{c.block} * c.block; }

std::size_t expected_symbols(const CompressedImage& c) {
  const BlockGrid g(c.height, c.width, c.levels, c.block);
  std::size_t n = g.a_blocks() * c.block * c.block + g.detail_blocks() * kept_components(c);
  if (c.residual) n += std::size_t{c.height} * c.width;
  return n;
}

/// Dequantize, invert PCA and the wavelet transform. Advances `pos` past the
/// coefficient symbols.
ImageMatrix reconstruct(const CompressedImage& c, std::span<const Symbol> symbols, std::size_t& pos) {
  const BlockGrid g(c.height, c.width, c.levels, c.block);
  const std::size_t b = c.block;
  const std::size_t k = kept_components(c);
  SubbandDecomposition dec{c.levels, c.filter, ImageMatrix(c.height, c.width)};
  for (std::size_t br = 0; br < g.rows; ++br) {
    for (std::size_t bc = 0; bc < g.cols; ++bc) {
      if (g.in_a(br, bc)) {
        DenseVector v(b * b);
        for (std::size_t i = 0; i < b * b; ++i) v[i] = uniform_dequantize(symbols[pos++], a_step(c.step));
        put_block(dec.layout, b, br, bc, v);
      } else {
        DenseVector q(k);
        for (std::size_t i = 0; i < k; ++i) q[i] = uniform_dequantize(symbols[pos++], c.step);
        put_block(dec.layout, b, br, bc, c.pca ? pca_inverse(*c.pca, q) : q);
      }
    }
  }
  return idwt2_multi(dec);
}

bool all_integers(const ImageMatrix& m) {
  return std::all_of(m.pixels().begin(), m.pixels().end(), [](double p) { return p == std::floor(p); });
}

}  // namespace

// ---- compression -----------------------------------------------------------

CompressedImage compress(const PgmImage& img, const CompressConfig& cfg) {
  const ImageMatrix& px = img.pixels;
  check_grid(px.height(), px.width(), cfg.levels, cfg.block, Errc::ConfigInvalid);
  const std::size_t b = cfg.block;
  const std::size_t dim = b * b;
  const std::size_t k = cfg.keep == 0 ? dim : cfg.keep;
  if (k > dim) throw Error(Errc::KTooLarge, "keep exceeds block * block");
  if (!cfg.pca && k != dim) throw Error(Errc::ConfigInvalid, "keep requires PCA");
  if (!(cfg.step > 0.0) || !std::isfinite(cfg.step)) throw Error(Errc::NonPositiveStep, "quantizer step must be > 0");
  const ThresholdRule rule(cfg.mode, cfg.lambda);

  CompressedImage c;
  c.height = static_cast<std::uint32_t>(px.height());
  c.width = static_cast<std::uint32_t>(px.width());
  c.maxval = img.maxval;
  c.filter = cfg.filter;
  c.levels = static_cast<std::uint8_t>(cfg.levels);
  c.mode = cfg.mode;
  c.lambda = cfg.lambda;
  c.step = cfg.step;
  c.block = static_cast<std::uint32_t>(b);

  const SubbandDecomposition dec = dwt2_multi(px, cfg.filter, cfg.levels);
  const BlockGrid g(px.height(), px.width(), cfg.levels, b);

  std::vector<DenseVector> details;
  details.reserve(g.detail_blocks());
  for (std::size_t br = 0; br < g.rows; ++br) {
    for (std::size_t bc = 0; bc < g.cols; ++bc) {
      if (g.in_a(br, bc)) continue;
      DenseVector v = get_block(dec.layout, b, br, bc);
      for (double& x : v) x = rule.apply(x);
      details.push_back(std::move(v));
    }
  }
  if (cfg.pca) c.pca = build_pca(details, k);

  std::vector<Symbol> symbols;
  symbols.reserve(expected_symbols(c) + px.pixels().size());
  std::size_t next_detail = 0;
  for (std::size_t br = 0; br < g.rows; ++br) {
    for (std::size_t bc = 0; bc < g.cols; ++bc) {
      if (g.in_a(br, bc)) {
        for (double x : get_block(dec.layout, b, br, bc)) symbols.push_back(to_symbol(uniform_quantize(x, a_step(cfg.step))));
      } else {
        const DenseVector& v = details[next_detail++];
        const DenseVector coeffs = c.pca ? pca_forward(*c.pca, v) : v;
        for (double x : coeffs) symbols.push_back(to_symbol(uniform_quantize(x, cfg.step)));
      }
    }
  }

  c.residual = cfg.lambda == 0.0 && cfg.step <= 1.0 && k == dim && all_integers(px);
  if (c.residual) {
    std::size_t pos = 0;
    const ImageMatrix approx = reconstruct(c, symbols, pos);
    for (std::size_t i = 0; i < px.pixels().size(); ++i) {
      symbols.push_back(to_symbol(static_cast<std::int64_t>(px.pixels()[i] - std::round(approx.pixels()[i]))));
    }
  }

  c.symbol_count = symbols.size();
  c.table = shannon_fano_table(SymbolModel::from_data(symbols));
  c.bits = encode(symbols, c.table);
  return c;
}

std::vector<Symbol> decode_symbols(const CompressedImage& c) {
  try {
    return decode(c.bits, c.table, c.symbol_count);
  } catch (const Error& e) {
    if (e.code() == Errc::DanglingBits || e.code() == Errc::ExcessBits) {
      throw Error(Errc::CorruptContainer, std::string("bitstream does not decode: ") + e.what());
    }
    throw;
  }
}

PgmImage decompress(const CompressedImage& c) {
  if (c.symbol_count != expected_symbols(c)) throw Error(Errc::CorruptContainer, "symbol count does not match header");
  const std::vector<Symbol> symbols = decode_symbols(c);
  std::size_t pos = 0;
  ImageMatrix out = reconstruct(c, symbols, pos);
  const double top = c.maxval;
  for (std::size_t i = 0; i < out.pixels().size(); ++i) {
    double v = std::round(out.pixels()[i]);
    if (c.residual) v += symbols[pos++];
    out.pixels()[i] = std::clamp(v, 0.0, top);
  }
  return {std::move(out), c.maxval};
}

// ---- container -------------------------------------------------------------

std::vector<std::uint8_t> CompressedImage::serialize() const {
  using byteio::put;
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put(out, kContainerVersion);
  put(out, height);
  put(out, width);
  put(out, maxval);
  put(out, static_cast<std::uint8_t>(filter == Filter::Haar ? 0 : 1));
  put(out, levels);
  put(out, static_cast<std::uint8_t>(mode == ThresholdMode::Soft ? 0 : 1));
  put(out, lambda);
  put(out, step);
  put(out, block);
  put(out, static_cast<std::uint8_t>(residual ? 1 : 0));
  put(out, static_cast<std::uint8_t>(pca ? 1 : 0));
  if (pca) {
    put(out, static_cast<std::uint32_t>(pca->kept()));
    for (double x : pca->mean) put(out, x);
    for (double x : pca->basis.entries()) put(out, x);
  }
  write_code_table(table, out);
  put(out, symbol_count);
  put(out, static_cast<std::uint64_t>(bits.bit_count()));
  out.insert(out.end(), bits.bytes().begin(), bits.bytes().end());
  return out;
}

CompressedImage CompressedImage::parse(std::span<const std::uint8_t> bytes) {
  std::size_t at = 0;
  byteio::Reader r(bytes, at);
  const auto magic = r.take(4);
  if (!std::equal(magic.begin(), magic.end(), std::begin(kMagic))) throw Error(Errc::CorruptContainer, "bad container magic");
  const auto version = r.get<std::uint8_t>();
  if (version != kContainerVersion) {
    throw Error(Errc::VersionMismatch, "container version " + std::to_string(version) + " is not supported");
  }

  CompressedImage c;
  c.height = r.get<std::uint32_t>();
  c.width = r.get<std::uint32_t>();
  c.maxval = r.get<std::uint32_t>();
  if (c.height < 2 || c.width < 2 || c.height > kMaxPgmSide || c.width > kMaxPgmSide) {
    throw Error(Errc::CorruptContainer, "bad image dimensions");
  }
  if (c.maxval == 0 || c.maxval > 65535) throw Error(Errc::CorruptContainer, "bad maxval");
  const auto filter = r.get<std::uint8_t>();
  if (filter > 1) throw Error(Errc::CorruptContainer, "unknown filter id");
  c.filter = filter == 0 ? Filter::Haar : Filter::D4;
  c.levels = r.get<std::uint8_t>();
  const auto mode = r.get<std::uint8_t>();
  if (mode > 1) throw Error(Errc::CorruptContainer, "unknown threshold mode");
  c.mode = mode == 0 ? ThresholdMode::Soft : ThresholdMode::Hard;
  c.lambda = r.get<double>();
  c.step = r.get<double>();
  if (!std::isfinite(c.lambda) || c.lambda < 0.0 || !std::isfinite(c.step) || !(c.step > 0.0)) {
    throw Error(Errc::CorruptContainer, "bad threshold or step");
  }
  c.block = r.get<std::uint32_t>();
  check_grid(c.height, c.width, c.levels, c.block, Errc::CorruptContainer);
  const auto flags = r.get<std::uint8_t>();
  if (flags > 1) throw Error(Errc::CorruptContainer, "unknown flags");
  c.residual = flags == 1;
  const auto has_pca = r.get<std::uint8_t>();
  if (has_pca > 1) throw Error(Errc::CorruptContainer, "bad PCA flag");
  if (has_pca == 1) {
    const std::size_t dim = std::size_t{c.block} * c.block;
    const auto k = r.get<std::uint32_t>();
    if (k == 0 || k > dim) throw Error(Errc::CorruptContainer, "bad PCA component count");
    if ((dim + std::size_t{k} * dim) > r.remaining() / 8) throw Error(Errc::CorruptContainer, "PCA model exceeds data");
    std::vector<double> mean(dim), basis(std::size_t{k} * dim);
    for (double& x : mean) x = r.get<double>();
    for (double& x : basis) x = r.get<double>();
    const auto finite = [](double x) { return std::isfinite(x); };
    if (!std::all_of(mean.begin(), mean.end(), finite) || !std::all_of(basis.begin(), basis.end(), finite)) {
      throw Error(Errc::CorruptContainer, "non-finite PCA entry");
    }
    c.pca = PcaModel{DenseVector(std::move(mean)), DenseMatrix(k, dim, std::move(basis)), {}};
  }
  c.table = read_code_table(bytes, at);
  c.symbol_count = r.get<std::uint64_t>();
  if (c.symbol_count != expected_symbols(c)) throw Error(Errc::CorruptContainer, "symbol count does not match header");
  const auto bit_count = r.get<std::uint64_t>();
  if (bit_count > 8 * static_cast<std::uint64_t>(r.remaining())) throw Error(Errc::CorruptContainer, "bitstream truncated");
  const auto raw = r.take((bit_count + 7) / 8);
  c.bits = BitStream(bit_count, {raw.begin(), raw.end()});
  if (r.remaining() != 0) throw Error(Errc::CorruptContainer, "trailing bytes after bitstream");
  return c;
}

// ---- metrics ---------------------------------------------------------------

double psnr(const ImageMatrix& a, const ImageMatrix& b, double maxval) {
  if (a.height() != b.height() || a.width() != b.width()) throw Error(Errc::DimMismatch, "image sizes differ");
  double se = 0.0;
  for (std::size_t i = 0; i < a.pixels().size(); ++i) {
    const double d = a.pixels()[i] - b.pixels()[i];
    se += d * d;
  }
  if (se == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(maxval * maxval / (se / static_cast<double>(a.pixels().size())));
}

Metrics metrics(const PgmImage& original, const PgmImage& reconstructed, const CompressedImage& container) {
  const ImageMatrix& a = original.pixels;
  const ImageMatrix& b = reconstructed.pixels;
  if (a.height() != b.height() || a.width() != b.width()) throw Error(Errc::DimMismatch, "image sizes differ");
  if (a.height() != container.height || a.width() != container.width) {
    throw Error(Errc::DimMismatch, "container dimensions differ from the images");
  }
  const double pixels = static_cast<double>(a.pixels().size());
  Metrics m;
  double se = 0.0;
  for (std::size_t i = 0; i < a.pixels().size(); ++i) se += std::pow(a.pixels()[i] - b.pixels()[i], 2);
  m.mse = se / pixels;
  m.psnr = psnr(a, b, original.maxval);
  m.bits_per_pixel = static_cast<double>(container.bits.bit_count()) / pixels;
  const double container_bytes = static_cast<double>(container.serialize().size());
  m.container_bits_per_pixel = 8.0 * container_bytes / pixels;
  const auto symbols = decode_symbols(container);
  m.empirical_entropy_bits = symbols.empty() ? 0.0 : shannon_entropy_bits(SymbolModel::from_data(symbols));
  m.compression_ratio = pixels * (original.maxval < 256 ? 1.0 : 2.0) / container_bytes;
  return m;
}

std::string metrics_json(const Metrics& m) {
  nlohmann::ordered_json j;
  if (std::isinf(m.psnr)) {
    j["psnr"] = "inf";
  } else {
    j["psnr"] = m.psnr;
  }
  j["mse"] = m.mse;
  j["bits_per_pixel"] = m.bits_per_pixel;
  j["container_bits_per_pixel"] = m.container_bits_per_pixel;
  j["empirical_entropy_bits"] = m.empirical_entropy_bits;
  j["compression_ratio"] = m.compression_ratio;
  return j.dump(2);
}

}  // namespace klframe
