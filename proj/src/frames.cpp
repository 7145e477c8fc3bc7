#include "klframe/frames.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace klframe {

namespace {

constexpr double kProjectionTol = 1e-9;
constexpr double kUnitTol = 1e-10;

void check_weights(std::span<const double> weights, std::size_t expected) {
  if (weights.size() != expected) {
    throw Error(Errc::LengthMismatch, "expected " + std::to_string(expected) + " weights, got " +
                                          std::to_string(weights.size()));
  }
  for (double w : weights) {
    if (!std::isfinite(w)) throw Error(Errc::NonFinite, "weight is not finite");
    if (w < 0) throw Error(Errc::NegativeWeight, "weights must be nonnegative");
  }
}

void check_indices(std::span<const std::size_t> subset, std::size_t n) {
  std::vector<std::size_t> seen(subset.begin(), subset.end());
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) {
    throw Error(Errc::IndexOutOfRange, "index set contains duplicates");
  }
  if (!seen.empty() && seen.back() >= n) {
    throw Error(Errc::IndexOutOfRange,
                "index " + std::to_string(seen.back()) + " outside 0.." + std::to_string(n - 1));
  }
}

double trace_product(const DenseMatrix& a, const DenseMatrix& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * b(j, i);
  return s;
}

void symmetrize(DenseMatrix& g) {
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = i + 1; j < g.cols(); ++j) g(i, j) = g(j, i) = 0.5 * (g(i, j) + g(j, i));
}

}  // namespace

Frame::Frame(std::vector<DenseVector> vectors) : vectors_(std::move(vectors)) {
  if (vectors_.empty()) throw Error(Errc::EmptyFrame, "a frame needs at least one vector");
  const std::size_t n = vectors_.front().size();
  if (n == 0) throw Error(Errc::ZeroDim, "frame vectors must have dimension >= 1");
  for (const DenseVector& h : vectors_) {
    if (h.size() != n) throw Error(Errc::DimMismatch, "frame vectors differ in dimension");
    if (norm(h) <= 1e-12) throw Error(Errc::ZeroVector, "frame vectors must be nonzero");
  }
}

Frame Frame::standard(std::size_t n) {
  std::vector<DenseVector> e;
  for (std::size_t k = 0; k < n; ++k) e.push_back(DenseVector::basis(n, k));
  return Frame(std::move(e));
}

WeightedFrame::WeightedFrame(Frame unit_vectors, std::vector<double> weights)
    : base_(std::move(unit_vectors)), weights_(std::move(weights)) {
  check_weights(weights_, base_.size());
  for (const DenseVector& f : base_.vectors()) {
    if (std::abs(norm(f) - 1.0) > kUnitTol) throw Error(Errc::NotUnitVector, "weighted frame needs unit vectors");
  }
}

WeightedFrame WeightedFrame::from_frame(const Frame& frame) {
  std::vector<DenseVector> unit;
  std::vector<double> w;
  for (const DenseVector& h : frame.vectors()) {
    const double n = norm(h);
    unit.push_back((1.0 / n) * h);
    w.push_back(n * n);
  }
  return WeightedFrame(Frame(std::move(unit)), std::move(w));
}

WeightedFrame WeightedFrame::from_sequence(const Frame& frame, const DenseVector& v) {
  if (v.size() != frame.size()) {
    throw Error(Errc::DimMismatch, "weight sequence length differs from frame size");
  }
  WeightedFrame wf = from_frame(frame);
  for (std::size_t i = 0; i < v.size(); ++i) wf.weights_[i] *= v[i] * v[i];
  return wf;
}

FusionFrame::FusionFrame(std::vector<DenseMatrix> projections, std::vector<double> weights)
    : projections_(std::move(projections)), weights_(std::move(weights)) {
  if (projections_.empty()) throw Error(Errc::EmptyFrame, "a fusion frame needs at least one projection");
  check_weights(weights_, projections_.size());
  const std::size_t n = projections_.front().rows();
  for (const DenseMatrix& p : projections_) {
    if (!p.is_square() || p.rows() != n) throw Error(Errc::DimMismatch, "projections differ in dimension");
    if (max_abs_diff(p, p.transpose()) > kProjectionTol || max_abs_diff(p * p, p) > kProjectionTol) {
      throw Error(Errc::NotAProjection, "P must satisfy P = P^T = P^2");
    }
  }
}

DenseMatrix projection_onto(std::span<const DenseVector> vectors) {
  if (vectors.empty()) throw Error(Errc::EmptyFrame, "projection needs a spanning set");
  const std::size_t n = vectors.front().size();
  DenseMatrix p(n, n);
  for (const DenseVector& q : orthonormalize(vectors)) p += rank_one(q, q);
  return p;
}

DenseVector analysis_apply(const Frame& f, const DenseVector& x) {
  if (x.size() != f.dim()) throw Error(Errc::DimMismatch, "vector dimension differs from frame dimension");
  DenseVector c(f.size());
  for (std::size_t a = 0; a < f.size(); ++a) c[a] = dot(f[a], x);
  return c;
}

DenseVector synthesis_apply(const Frame& f, const DenseVector& c) {
  if (c.size() != f.size()) throw Error(Errc::LengthMismatch, "coefficient count differs from frame size");
  DenseVector x(f.dim());
  for (std::size_t a = 0; a < f.size(); ++a) x += c[a] * f[a];
  return x;
}

DenseMatrix analysis_matrix(const Frame& f) {
  DenseMatrix l(f.size(), f.dim());
  for (std::size_t a = 0; a < f.size(); ++a)
    for (std::size_t j = 0; j < f.dim(); ++j) l(a, j) = f[a][j];
  return l;
}

DenseMatrix frame_operator(const Frame& f) {
  DenseMatrix g(f.dim(), f.dim());
  for (const DenseVector& h : f.vectors()) g += rank_one(h, h);
  return g;
}

DenseMatrix grammian(const Frame& f) {
  DenseMatrix g(f.size(), f.size());
  for (std::size_t i = 0; i < f.size(); ++i)
    for (std::size_t j = i; j < f.size(); ++j) g(i, j) = g(j, i) = dot(f[i], f[j]);
  return g;
}

Frame dual_frame(const Frame& f) {
  const DenseMatrix g = frame_operator(f);
  const auto spec = symmetric_eigen(g);
  if (spec.eigenvalues.back() <= 1e-10 * spec.eigenvalues.front()) {
    throw Error(Errc::SingularFrameOperator, "frame operator is not invertible");
  }
  const DenseMatrix g_inv = inverse(g);
  std::vector<DenseVector> dual;
  dual.reserve(f.size());
  for (const DenseVector& h : f.vectors()) dual.push_back(g_inv * h);
  return Frame(std::move(dual));
}

FrameBounds operator_bounds(const DenseMatrix& g) {
  const auto spec = symmetric_eigen(g);
  const double hi = spec.eigenvalues.front();
  const double lo = spec.eigenvalues.back();
  if (!(hi > 0) || lo <= 1e-12 * hi) {
    throw Error(Errc::NotSpanning, "frame does not span the space");
  }
  return {lo, hi};
}

FrameBounds frame_bounds(const Frame& f) { return operator_bounds(frame_operator(f)); }

DenseMatrix weighted_frame_operator(const WeightedFrame& wf) {
  const Frame& base = wf.base();
  DenseMatrix g(base.dim(), base.dim());
  for (std::size_t a = 0; a < base.size(); ++a) g += wf.weights()[a] * rank_one(base[a], base[a]);
  return g;
}

DenseMatrix fusion_frame_operator(const FusionFrame& ff) {
  DenseMatrix g(ff.dim(), ff.dim());
  for (std::size_t a = 0; a < ff.projections().size(); ++a) g += ff.weights()[a] * ff.projections()[a];
  symmetrize(g);
  return g;
}

double measure_pf(std::span<const DenseVector> psi, const DenseVector& f,
                  std::span<const std::size_t> subset) {
  if (std::abs(norm(f) - 1.0) > kUnitTol) throw Error(Errc::NotUnitVector, "f must be a unit vector");
  if (orthonormality_defect(psi) > 1e-9) throw Error(Errc::NotOrthonormal, "psi is not orthonormal");
  check_indices(subset, psi.size());
  double p = 0.0;
  for (std::size_t i : subset) {
    const double c = dot(psi[i], f);
    p += c * c;
  }
  return std::clamp(p, 0.0, 1.0);
}

double determinantal_probability(const DenseMatrix& t, std::span<const std::size_t> subset) {
  const auto spec = symmetric_eigen(t);
  if (spec.eigenvalues.back() < -1e-9 || spec.eigenvalues.front() > 1.0 + 1e-9) {
    throw Error(Errc::SpectrumOutOfRange, "spectrum of T must lie in [0,1]");
  }
  check_indices(subset, t.rows());
  DenseMatrix sub(subset.size(), subset.size());
  for (std::size_t i = 0; i < subset.size(); ++i)
    for (std::size_t j = 0; j < subset.size(); ++j) sub(i, j) = t(subset[i], subset[j]);
  return std::clamp(determinant(sub), 0.0, 1.0);
}

bool duality_bounds_check(const DenseMatrix& g, const DenseMatrix& rho, const FrameBounds& bounds) {
  if (g.rows() != rho.rows() || g.cols() != rho.cols()) throw Error(Errc::DimMismatch, "g and rho differ in shape");
  const auto spec = symmetric_eigen(rho);
  const double tr = trace(rho);
  if (!(tr > 0) || spec.eigenvalues.back() < -1e-9 * std::max(spec.eigenvalues.front(), 0.0)) {
    throw Error(Errc::NotPSD, "rho must be PSD with positive trace");
  }
  const double value = trace_product(rho, g);
  const double slack = 1e-9 * std::max({std::abs(bounds.c1) * tr, std::abs(bounds.c2) * tr, std::abs(value)});
  return bounds.c1 * tr <= value + slack && value <= bounds.c2 * tr + slack;
}

// ---------------------------------------------------------------- JSON

DenseMatrix FrameFile::operator_matrix() const {
  if (!weights) return frame_operator(frame);
  DenseMatrix g(frame.dim(), frame.dim());
  for (std::size_t a = 0; a < frame.size(); ++a) g += (*weights)[a] * rank_one(frame[a], frame[a]);
  return g;
}

FrameFile parse_frame_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, std::string("frame file: ") + e.what());
  }
  auto number = [](const nlohmann::json& v) {
    if (!v.is_number()) throw Error(Errc::ParseError, "frame file: expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw Error(Errc::NonFinite, "frame file: non-finite number");
    return x;
  };
  if (!doc.is_object() || !doc.contains("dim") || !doc.contains("vectors")) {
    throw Error(Errc::ParseError, "frame file: expected an object with \"dim\" and \"vectors\"");
  }
  if (!doc["dim"].is_number_unsigned()) throw Error(Errc::ParseError, "frame file: dim must be a positive integer");
  const auto dim = doc["dim"].get<std::size_t>();
  if (!doc["vectors"].is_array()) throw Error(Errc::ParseError, "frame file: vectors must be an array");
  std::vector<DenseVector> vectors;
  for (const auto& row : doc["vectors"]) {
    if (!row.is_array() || row.size() != dim) {
      throw Error(Errc::ParseError, "frame file: every vector must have exactly dim entries");
    }
    std::vector<double> xs;
    for (const auto& v : row) xs.push_back(number(v));
    vectors.emplace_back(std::move(xs));
  }
  FrameFile out{Frame(std::move(vectors)), std::nullopt};
  if (doc.contains("weights")) {
    if (!doc["weights"].is_array()) throw Error(Errc::ParseError, "frame file: weights must be an array");
    std::vector<double> w;
    for (const auto& v : doc["weights"]) w.push_back(number(v));
    check_weights(w, out.frame.size());
    out.weights = std::move(w);
  }
  return out;
}

FrameFile read_frame_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(Errc::Io, "cannot read " + path.string());
  return parse_frame_json(ss.str());
}

std::string frame_to_json(const FrameFile& file) {
  nlohmann::json doc;
  doc["dim"] = file.frame.dim();
  doc["vectors"] = nlohmann::json::array();
  for (const DenseVector& h : file.frame.vectors()) doc["vectors"].push_back(h.vec());
  if (file.weights) doc["weights"] = *file.weights;
  return doc.dump();
}

}  // namespace klframe
