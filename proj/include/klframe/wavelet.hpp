#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "klframe/linalg.hpp"

namespace klframe {

enum class Filter { Haar, D4 };

std::string_view filter_name(Filter f);
/// "haar" or "d4"; throws ParseError otherwise.
Filter parse_filter(std::string_view name);

/// Orthonormal low-pass taps h; sum h = sqrt(2).
std::span<const double> lowpass_taps(Filter f);
/// g_i = (-1)^i h_{L-1-i}.
std::vector<double> highpass_taps(Filter f);

/// Row-major grayscale image, at least 2x2, finite pixels.
class ImageMatrix {
 public:
  ImageMatrix(std::size_t height, std::size_t width, double fill = 0.0);
  ImageMatrix(std::size_t height, std::size_t width, std::vector<double> pixels);
  ImageMatrix(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  double& operator()(std::size_t r, std::size_t c) { return pixels_[r * width_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return pixels_[r * width_ + c]; }
  std::span<const double> pixels() const noexcept { return pixels_; }
  std::span<double> pixels() noexcept { return pixels_; }

  double frobenius() const;

  friend bool operator==(const ImageMatrix&, const ImageMatrix&) = default;

 private:
  std::size_t height_;
  std::size_t width_;
  std::vector<double> pixels_;
};

double max_abs_diff(const ImageMatrix& a, const ImageMatrix& b);

/// Subband naming, with x the column index and y the row index:
///
///   band | along x | along y | quadrant
///   a    | low     | low     | top-left
///   h    | high    | low     | top-right
///   v    | low     | high    | bottom-left
///   d    | high    | high    | bottom-right
enum class Band { A, H, V, D };

struct SubbandRect {
  std::size_t row0, col0, rows, cols;
};

/// Nested quadrant layout. Each level splits the previous a-quadrant.
struct SubbandDecomposition {
  std::size_t levels = 0;
  Filter filter = Filter::Haar;
  ImageMatrix layout{2, 2};

  std::size_t height() const noexcept { return layout.height(); }
  std::size_t width() const noexcept { return layout.width(); }
  /// Level is 1-based. Band::A is only stored at the deepest level.
  SubbandRect rect(std::size_t level, Band band) const;
  DenseMatrix subband(std::size_t level, Band band) const;
  void set_subband(std::size_t level, Band band, const DenseMatrix& values);
};

SubbandDecomposition dwt2_level(const ImageMatrix& img, Filter filter);
ImageMatrix idwt2_level(const SubbandDecomposition& dec);
SubbandDecomposition dwt2_multi(const ImageMatrix& img, Filter filter, std::size_t levels);
ImageMatrix idwt2_multi(const SubbandDecomposition& dec);

/// Largest level count for which 2^levels divides both dimensions.
std::size_t max_levels(std::size_t height, std::size_t width);

}  // namespace klframe
