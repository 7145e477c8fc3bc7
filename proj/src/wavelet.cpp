#include "klframe/wavelet.hpp"

#include <array>
#include <cmath>
#include <string>

namespace klframe {

namespace {

const double kSqrt2 = std::sqrt(2.0);
const double kSqrt3 = std::sqrt(3.0);

const std::array<double, 2> kHaar{1.0 / kSqrt2, 1.0 / kSqrt2};
const std::array<double, 4> kD4{
    (1 + kSqrt3) / (4 * kSqrt2),
    (3 + kSqrt3) / (4 * kSqrt2),
    (3 - kSqrt3) / (4 * kSqrt2),
    (1 - kSqrt3) / (4 * kSqrt2),
};

/// One periodic analysis step on a strided line of length n (even).
/// Low outputs go to positions [0, n/2), high to [n/2, n).
void analyze_line(double* line, std::size_t n, std::size_t stride, std::span<const double> h,
                  std::span<const double> g, std::vector<double>& scratch) {
  scratch.assign(n, 0.0);
  const std::size_t half = n / 2;
  for (std::size_t k = 0; k < half; ++k) {
    double lo = 0.0, hi = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
      const double x = line[((2 * k + i) % n) * stride];
      lo += h[i] * x;
      hi += g[i] * x;
    }
    scratch[k] = lo;
    scratch[half + k] = hi;
  }
  for (std::size_t j = 0; j < n; ++j) line[j * stride] = scratch[j];
}

void synthesize_line(double* line, std::size_t n, std::size_t stride, std::span<const double> h,
                     std::span<const double> g, std::vector<double>& scratch) {
  scratch.assign(n, 0.0);
  const std::size_t half = n / 2;
  for (std::size_t k = 0; k < half; ++k) {
    const double lo = line[k * stride];
    const double hi = line[(half + k) * stride];
    for (std::size_t i = 0; i < h.size(); ++i) scratch[(2 * k + i) % n] += h[i] * lo + g[i] * hi;
  }
  for (std::size_t j = 0; j < n; ++j) line[j * stride] = scratch[j];
}

/// Transform the top-left rows x cols block of `m` in place.
void forward_block(ImageMatrix& m, std::size_t rows, std::size_t cols, Filter f) {
  const auto h = lowpass_taps(f);
  const auto g = highpass_taps(f);
  std::vector<double> scratch;
  double* base = m.pixels().data();
  const std::size_t w = m.width();
  for (std::size_t r = 0; r < rows; ++r) analyze_line(base + r * w, cols, 1, h, g, scratch);
  for (std::size_t c = 0; c < cols; ++c) analyze_line(base + c, rows, w, h, g, scratch);
}

void inverse_block(ImageMatrix& m, std::size_t rows, std::size_t cols, Filter f) {
  const auto h = lowpass_taps(f);
  const auto g = highpass_taps(f);
  std::vector<double> scratch;
  double* base = m.pixels().data();
  const std::size_t w = m.width();
  for (std::size_t c = 0; c < cols; ++c) synthesize_line(base + c, rows, w, h, g, scratch);
  for (std::size_t r = 0; r < rows; ++r) synthesize_line(base + r * w, cols, 1, h, g, scratch);
}

void check_levels(std::size_t height, std::size_t width, std::size_t levels, Errc code) {
  if (levels == 0) throw Error(Errc::BadRange, "levels must be at least 1");
  if (levels > max_levels(height, width)) {
    throw Error(code, std::to_string(height) + "x" + std::to_string(width) + " image does not support " +
                          std::to_string(levels) + " levels");
  }
}

}  // namespace

std::string_view filter_name(Filter f) { return f == Filter::Haar ? "haar" : "d4"; }

Filter parse_filter(std::string_view name) {
  if (name == "haar") return Filter::Haar;
  if (name == "d4") return Filter::D4;
  throw Error(Errc::ParseError, "unknown filter '" + std::string(name) + "'");
}

std::span<const double> lowpass_taps(Filter f) {
  if (f == Filter::Haar) return kHaar;
  return kD4;
}

std::vector<double> highpass_taps(Filter f) {
  const auto h = lowpass_taps(f);
  const std::size_t len = h.size();
  std::vector<double> g(len);
  for (std::size_t i = 0; i < len; ++i) g[i] = (i % 2 == 0 ? 1.0 : -1.0) * h[len - 1 - i];
  return g;
}

ImageMatrix::ImageMatrix(std::size_t height, std::size_t width, double fill)
    : ImageMatrix(height, width, std::vector<double>(height * width, fill)) {}

ImageMatrix::ImageMatrix(std::size_t height, std::size_t width, std::vector<double> pixels)
    : height_(height), width_(width), pixels_(std::move(pixels)) {
  if (height < 2 || width < 2) throw Error(Errc::ZeroDim, "image dimensions must be at least 2");
  if (pixels_.size() != height * width) throw Error(Errc::DimMismatch, "pixel count does not match dimensions");
  for (double p : pixels_) {
    if (!std::isfinite(p)) throw Error(Errc::NonFinite, "image contains a non-finite pixel");
  }
}

namespace {
std::size_t row_width(std::initializer_list<std::initializer_list<double>> rows) {
  return rows.size() == 0 ? 0 : rows.begin()->size();
}

std::vector<double> flatten(std::initializer_list<std::initializer_list<double>> rows) {
  std::vector<double> out;
  for (const auto& row : rows) {
    if (row.size() != row_width(rows)) throw Error(Errc::DimMismatch, "ragged image rows");
    out.insert(out.end(), row.begin(), row.end());
  }
  return out;
}
}  // namespace

ImageMatrix::ImageMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : ImageMatrix(rows.size(), row_width(rows), flatten(rows)) {}

double ImageMatrix::frobenius() const {
  double s = 0.0;
  for (double p : pixels_) s += p * p;
  return std::sqrt(s);
}

double max_abs_diff(const ImageMatrix& a, const ImageMatrix& b) {
  if (a.height() != b.height() || a.width() != b.width()) throw Error(Errc::DimMismatch, "image sizes differ");
  double m = 0.0;
  for (std::size_t i = 0; i < a.pixels().size(); ++i) m = std::max(m, std::abs(a.pixels()[i] - b.pixels()[i]));
  return m;
}

std::size_t max_levels(std::size_t height, std::size_t width) {
  std::size_t levels = 0;
  while (height % 2 == 0 && width % 2 == 0 && height > 0 && width > 0) {
    height /= 2;
    width /= 2;
    ++levels;
  }
  return levels;
}

SubbandRect SubbandDecomposition::rect(std::size_t level, Band band) const {
  if (level == 0 || level > levels) throw Error(Errc::IndexOutOfRange, "subband level out of range");
  if (band == Band::A && level != levels) throw Error(Errc::IndexOutOfRange, "a-subband is stored only at the deepest level");
  const std::size_t rows = height() >> level;
  const std::size_t cols = width() >> level;
  switch (band) {
    case Band::A: return {0, 0, rows, cols};
    case Band::H: return {0, cols, rows, cols};
    case Band::V: return {rows, 0, rows, cols};
    case Band::D: return {rows, cols, rows, cols};
  }
  return {};
}

DenseMatrix SubbandDecomposition::subband(std::size_t level, Band band) const {
  const auto r = rect(level, band);
  DenseMatrix out(r.rows, r.cols);
  for (std::size_t i = 0; i < r.rows; ++i)
    for (std::size_t j = 0; j < r.cols; ++j) out(i, j) = layout(r.row0 + i, r.col0 + j);
  return out;
}

void SubbandDecomposition::set_subband(std::size_t level, Band band, const DenseMatrix& values) {
  const auto r = rect(level, band);
  if (values.rows() != r.rows || values.cols() != r.cols) throw Error(Errc::DimMismatch, "subband size mismatch");
  for (std::size_t i = 0; i < r.rows; ++i)
    for (std::size_t j = 0; j < r.cols; ++j) layout(r.row0 + i, r.col0 + j) = values(i, j);
}

SubbandDecomposition dwt2_level(const ImageMatrix& img, Filter filter) {
  if (img.height() % 2 != 0 || img.width() % 2 != 0) throw Error(Errc::OddDimensions, "image dimensions must be even");
  SubbandDecomposition dec{1, filter, img};
  forward_block(dec.layout, img.height(), img.width(), filter);
  return dec;
}

ImageMatrix idwt2_level(const SubbandDecomposition& dec) {
  if (dec.levels != 1) throw Error(Errc::MalformedLayout, "idwt2_level expects a 1-level decomposition");
  if (dec.height() % 2 != 0 || dec.width() % 2 != 0) throw Error(Errc::MalformedLayout, "layout dimensions must be even");
  ImageMatrix out = dec.layout;
  inverse_block(out, out.height(), out.width(), dec.filter);
  return out;
}

SubbandDecomposition dwt2_multi(const ImageMatrix& img, Filter filter, std::size_t levels) {
  check_levels(img.height(), img.width(), levels, Errc::TooManyLevels);
  SubbandDecomposition dec{levels, filter, img};
  for (std::size_t l = 0; l < levels; ++l) forward_block(dec.layout, img.height() >> l, img.width() >> l, filter);
  return dec;
}

ImageMatrix idwt2_multi(const SubbandDecomposition& dec) {
  check_levels(dec.height(), dec.width(), dec.levels, Errc::MalformedLayout);
  ImageMatrix out = dec.layout;
  for (std::size_t l = dec.levels; l-- > 0;) inverse_block(out, dec.height() >> l, dec.width() >> l, dec.filter);
  return out;
}

}  // namespace klframe
