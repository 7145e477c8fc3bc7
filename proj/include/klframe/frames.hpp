#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "klframe/linalg.hpp"

namespace klframe {

/// A finite family of nonzero vectors h_alpha of a common dimension.
class Frame {
 public:
  explicit Frame(std::vector<DenseVector> vectors);

  std::size_t dim() const noexcept { return vectors_.front().size(); }
  std::size_t size() const noexcept { return vectors_.size(); }
  const DenseVector& operator[](std::size_t i) const { return vectors_[i]; }
  const std::vector<DenseVector>& vectors() const noexcept { return vectors_; }

  /// Orthonormal basis frame {e_1, ..., e_n}.
  static Frame standard(std::size_t n);

 private:
  std::vector<DenseVector> vectors_;
};

/// Unit vectors f_alpha with nonnegative weights w_alpha; the operator is
/// G = sum w_alpha |f_alpha><f_alpha|.
class WeightedFrame {
 public:
  WeightedFrame(Frame unit_vectors, std::vector<double> weights);

  /// h_alpha = ||h_alpha|| f_alpha with w_alpha = ||h_alpha||^2.
  static WeightedFrame from_frame(const Frame& frame);
  /// The sequence {v_n h_n}: w_n = v_n^2 ||h_n||^2.
  static WeightedFrame from_sequence(const Frame& frame, const DenseVector& v);

  const Frame& base() const noexcept { return base_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

 private:
  Frame base_;
  std::vector<double> weights_;
};

/// Weighted orthogonal projections; G = sum w_alpha P_alpha.
class FusionFrame {
 public:
  FusionFrame(std::vector<DenseMatrix> projections, std::vector<double> weights);

  const std::vector<DenseMatrix>& projections() const noexcept { return projections_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  std::size_t dim() const noexcept { return projections_.front().rows(); }

 private:
  std::vector<DenseMatrix> projections_;
  std::vector<double> weights_;
};

/// Orthogonal projection onto span(vectors), built as sum |q><q| over an
/// orthonormalized spanning set.
DenseMatrix projection_onto(std::span<const DenseVector> vectors);

/// Optimal constants in c1 ||f||^2 <= sum |<h|f>|^2 <= c2 ||f||^2.
struct FrameBounds {
  double c1 = 0.0;
  double c2 = 0.0;
};

/// L : x -> (<h_alpha|x>)_alpha.
DenseVector analysis_apply(const Frame& f, const DenseVector& x);
/// L* : c -> sum c_alpha h_alpha.
DenseVector synthesis_apply(const Frame& f, const DenseVector& c);
/// Matrix of L, one row per frame vector.
DenseMatrix analysis_matrix(const Frame& f);

/// G = L*L = sum |h_alpha><h_alpha|.
DenseMatrix frame_operator(const Frame& f);
/// G_R = L L* = (<h_i|h_j>).
DenseMatrix grammian(const Frame& f);
/// h~_alpha = G^{-1} h_alpha.
Frame dual_frame(const Frame& f);
FrameBounds frame_bounds(const Frame& f);
/// Optimal bounds of an already assembled frame operator.
FrameBounds operator_bounds(const DenseMatrix& g);

DenseMatrix weighted_frame_operator(const WeightedFrame& wf);
DenseMatrix fusion_frame_operator(const FusionFrame& ff);

/// P_f(A) = sum_{i in A} |<psi_i|f>|^2. Indices are zero-based.
double measure_pf(std::span<const DenseVector> psi, const DenseVector& f,
                  std::span<const std::size_t> subset);

/// det(T(i,j))_{i,j in A} for 0 <= T <= I. Indices are zero-based.
double determinantal_probability(const DenseMatrix& t, std::span<const std::size_t> subset);

/// c1 tr(rho) <= tr(rho G) <= c2 tr(rho), each side with 1e-9 relative slack.
bool duality_bounds_check(const DenseMatrix& g, const DenseMatrix& rho, const FrameBounds& bounds);

/// Contents of a frame file: {"dim": n, "vectors": [[...]], "weights": [...]}.
struct FrameFile {
  Frame frame;
  std::optional<std::vector<double>> weights;

  /// Frame operator of the file; with weights, sum w_alpha |h_alpha><h_alpha|.
  DenseMatrix operator_matrix() const;
};

FrameFile parse_frame_json(const std::string& text);
FrameFile read_frame_file(const std::filesystem::path& path);
std::string frame_to_json(const FrameFile& file);

}  // namespace klframe
