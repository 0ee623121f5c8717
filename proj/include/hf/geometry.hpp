#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "hf/errors.hpp"

namespace hf {

// ---------------------------------------------------------------------------
// Model kinds
// ---------------------------------------------------------------------------

enum class ModelKind { Line2D, Circle2D, Homography, Fundamental };

/// Minimum number of points that determines a model of this kind.
constexpr std::size_t minimal_subset_size(ModelKind kind) {
  switch (kind) {
    case ModelKind::Line2D: return 2;
    case ModelKind::Circle2D: return 3;
    case ModelKind::Homography: return 4;
    case ModelKind::Fundamental: return 8;
  }
  return 0;
}

constexpr std::size_t parameter_dimension(ModelKind kind) {
  switch (kind) {
    case ModelKind::Line2D:
    case ModelKind::Circle2D: return 3;
    case ModelKind::Homography:
    case ModelKind::Fundamental: return 9;
  }
  return 0;
}

/// Coordinates per data point: planar points or x1,y1,x2,y2 correspondences.
constexpr int point_dimension(ModelKind kind) {
  return (kind == ModelKind::Line2D || kind == ModelKind::Circle2D) ? 2 : 4;
}

inline std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Line2D: return "line";
    case ModelKind::Circle2D: return "circle";
    case ModelKind::Homography: return "homography";
    case ModelKind::Fundamental: return "fundamental";
  }
  return "unknown";
}

inline ModelKind parse_model_kind(std::string_view name) {
  if (name == "line" || name == "Line2D") return ModelKind::Line2D;
  if (name == "circle" || name == "Circle2D") return ModelKind::Circle2D;
  if (name == "homography" || name == "Homography") return ModelKind::Homography;
  if (name == "fundamental" || name == "Fundamental") return ModelKind::Fundamental;
  throw Error(ErrorCode::InvalidArgument, "unknown model kind '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Data
// ---------------------------------------------------------------------------

/// Points (dim 2) or two-view correspondences (dim 4), stored contiguously.
class DataSet {
 public:
  DataSet() = default;
  explicit DataSet(int dim) : dim_(dim) {}
  DataSet(int dim, std::vector<double> coords) : dim_(dim), coords_(std::move(coords)) {
    if (dim_ <= 0 || coords_.size() % static_cast<std::size_t>(dim_) != 0) {
      throw Error(ErrorCode::InvalidArgument, "coordinate count is not a multiple of the dimension");
    }
    for (double c : coords_) {
      if (!std::isfinite(c)) throw Error(ErrorCode::NonFinite, "data point with non-finite coordinate");
    }
  }

  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return dim_ > 0 ? coords_.size() / static_cast<std::size_t>(dim_) : 0; }
  bool empty() const noexcept { return size() == 0; }

  std::span<const double> point(std::size_t i) const {
    return {coords_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }

  void push_back(std::span<const double> p) {
    if (static_cast<int>(p.size()) != dim_) throw Error(ErrorCode::InvalidArgument, "point dimension mismatch");
    for (double c : p) {
      if (!std::isfinite(c)) throw Error(ErrorCode::NonFinite, "data point with non-finite coordinate");
    }
    coords_.insert(coords_.end(), p.begin(), p.end());
  }

  void push_back(std::initializer_list<double> p) { push_back(std::span<const double>(p.begin(), p.size())); }

  const std::vector<double>& coords() const noexcept { return coords_; }

  DataSet subset(std::span<const std::size_t> indices) const {
    DataSet out(dim_);
    out.coords_.reserve(indices.size() * static_cast<std::size_t>(dim_));
    for (std::size_t i : indices) {
      auto p = point(i);
      out.coords_.insert(out.coords_.end(), p.begin(), p.end());
    }
    return out;
  }

 private:
  int dim_ = 2;
  std::vector<double> coords_;
};

// ---------------------------------------------------------------------------
// Hypotheses
// ---------------------------------------------------------------------------

/// A model kind plus its normalized parameter vector.
///
/// Conventions:
///  - Line2D (a, b, c): a^2 + b^2 = 1, first nonzero of (a, b) positive.
///  - Circle2D (cx, cy, r): r > 0.
///  - Homography / Fundamental: row-major 3x3, Frobenius norm 1, last nonzero
///    entry positive.
class ModelHypothesis {
 public:
  ModelHypothesis() = default;

  /// Normalizes `raw` per the kind's convention.
  ModelHypothesis(ModelKind kind, std::span<const double> raw) : kind_(kind) {
    if (raw.size() != parameter_dimension(kind)) {
      throw Error(ErrorCode::InvalidArgument, "parameter vector has the wrong dimension");
    }
    std::copy(raw.begin(), raw.end(), values_.begin());
    normalize();
  }

  ModelHypothesis(ModelKind kind, std::initializer_list<double> raw)
      : ModelHypothesis(kind, std::span<const double>(raw.begin(), raw.size())) {}

  ModelKind kind() const noexcept { return kind_; }

  std::span<const double> params() const noexcept { return {values_.data(), parameter_dimension(kind_)}; }

  std::vector<double> param_vector() const { return {params().begin(), params().end()}; }

  /// Row-major 3x3 view for the projective kinds.
  Eigen::Matrix3d matrix() const {
    Eigen::Matrix3d m;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) m(r, c) = values_[static_cast<std::size_t>(3 * r + c)];
    return m;
  }

  static ModelHypothesis from_matrix(ModelKind kind, const Eigen::Matrix3d& m) {
    std::array<double, 9> raw{};
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) raw[static_cast<std::size_t>(3 * r + c)] = m(r, c);
    return ModelHypothesis(kind, raw);
  }

  friend bool operator==(const ModelHypothesis&, const ModelHypothesis&) = default;

 private:
  void normalize() {
    constexpr double kSignEps = 1e-12;
    const std::size_t dim = parameter_dimension(kind_);
    for (std::size_t i = 0; i < dim; ++i) {
      if (!std::isfinite(values_[i])) throw Error(ErrorCode::NonFinite, "non-finite model parameter");
    }
    switch (kind_) {
      case ModelKind::Line2D: {
        const double norm = std::hypot(values_[0], values_[1]);
        if (norm == 0.0) throw Error(ErrorCode::DegenerateSubset, "line normal has zero length");
        for (std::size_t i = 0; i < 3; ++i) values_[i] /= norm;
        const double lead = std::abs(values_[0]) > kSignEps ? values_[0] : values_[1];
        if (lead < 0.0)
          for (std::size_t i = 0; i < 3; ++i) values_[i] = -values_[i];
        break;
      }
      case ModelKind::Circle2D:
        values_[2] = std::abs(values_[2]);
        if (values_[2] == 0.0) throw Error(ErrorCode::DegenerateSubset, "circle with zero radius");
        break;
      case ModelKind::Homography:
      case ModelKind::Fundamental: {
        double norm = 0.0;
        for (std::size_t i = 0; i < 9; ++i) norm += values_[i] * values_[i];
        norm = std::sqrt(norm);
        if (norm == 0.0) throw Error(ErrorCode::DegenerateSubset, "zero matrix");
        for (std::size_t i = 0; i < 9; ++i) values_[i] /= norm;
        for (std::size_t i = 9; i-- > 0;) {
          if (std::abs(values_[i]) > kSignEps) {
            if (values_[i] < 0.0)
              for (std::size_t j = 0; j < 9; ++j) values_[j] = -values_[j];
            break;
          }
        }
        break;
      }
    }
  }

  ModelKind kind_ = ModelKind::Line2D;
  std::array<double, 9> values_{};
};

// ---------------------------------------------------------------------------
// Residuals
// ---------------------------------------------------------------------------

/// Point-to-model distance with per-hypothesis precomputation (the inverse
/// homography). Returns +inf when a point maps to the plane at infinity.
class ResidualFunction {
 public:
  explicit ResidualFunction(const ModelHypothesis& h) : kind_(h.kind()) {
    auto p = h.params();
    std::copy(p.begin(), p.end(), v_.begin());
    if (kind_ == ModelKind::Homography) {
      const Eigen::Matrix3d m = h.matrix();
      Eigen::FullPivLU<Eigen::Matrix3d> lu(m);
      invertible_ = lu.isInvertible();
      if (invertible_) {
        const Eigen::Matrix3d inv = lu.inverse();
        for (int r = 0; r < 3; ++r)
          for (int c = 0; c < 3; ++c) inv_[static_cast<std::size_t>(3 * r + c)] = inv(r, c);
      }
    }
  }

  double operator()(std::span<const double> p) const {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    switch (kind_) {
      case ModelKind::Line2D:
        return std::abs(v_[0] * p[0] + v_[1] * p[1] + v_[2]);
      case ModelKind::Circle2D:
        return std::abs(std::hypot(p[0] - v_[0], p[1] - v_[1]) - v_[2]);
      case ModelKind::Homography: {
        if (!invertible_) return kInf;
        double fwd2, bwd2;
        if (!transfer(v_, p[0], p[1], p[2], p[3], fwd2)) return kInf;
        if (!transfer(inv_, p[2], p[3], p[0], p[1], bwd2)) return kInf;
        return std::sqrt(0.5 * (fwd2 + bwd2));
      }
      case ModelKind::Fundamental: {
        const double x1 = p[0], y1 = p[1], x2 = p[2], y2 = p[3];
        // l2 = F x1, l1 = F^T x2
        const double l2a = v_[0] * x1 + v_[1] * y1 + v_[2];
        const double l2b = v_[3] * x1 + v_[4] * y1 + v_[5];
        const double l2c = v_[6] * x1 + v_[7] * y1 + v_[8];
        const double l1a = v_[0] * x2 + v_[3] * y2 + v_[6];
        const double l1b = v_[1] * x2 + v_[4] * y2 + v_[7];
        const double e = x2 * l2a + y2 * l2b + l2c;
        const double denom = l2a * l2a + l2b * l2b + l1a * l1a + l1b * l1b;
        if (denom <= 0.0) return e == 0.0 ? 0.0 : kInf;
        return std::abs(e) / std::sqrt(denom);
      }
    }
    return kInf;
  }

 private:
  static bool transfer(const std::array<double, 9>& m, double x, double y, double tx, double ty, double& d2) {
    const double u = m[0] * x + m[1] * y + m[2];
    const double v = m[3] * x + m[4] * y + m[5];
    const double w = m[6] * x + m[7] * y + m[8];
    const double scale = std::abs(m[6] * x) + std::abs(m[7] * y) + std::abs(m[8]);
    if (!(std::abs(w) > 1e-12 * scale) || w == 0.0) return false;
    const double dx = u / w - tx;
    const double dy = v / w - ty;
    d2 = dx * dx + dy * dy;
    return std::isfinite(d2);
  }

  ModelKind kind_;
  std::array<double, 9> v_{};
  std::array<double, 9> inv_{};
  bool invertible_ = true;
};

inline double residual(const ModelHypothesis& h, std::span<const double> p) {
  if (static_cast<int>(p.size()) != point_dimension(h.kind())) {
    throw Error(ErrorCode::InvalidArgument, "point dimension does not match the model kind");
  }
  return ResidualFunction(h)(p);
}

inline double residual(const ModelHypothesis& h, std::initializer_list<double> p) {
  return residual(h, std::span<const double>(p.begin(), p.size()));
}

/// Residuals of every point in `data` into `out` (resized to data.size()).
inline void compute_residuals(const ModelHypothesis& h, const DataSet& data, std::vector<double>& out) {
  if (data.dim() != point_dimension(h.kind())) {
    throw Error(ErrorCode::InvalidArgument, "data dimension does not match the model kind");
  }
  const ResidualFunction f(h);
  out.resize(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) out[i] = f(data.point(i));
}

inline std::vector<double> compute_residuals(const ModelHypothesis& h, const DataSet& data) {
  std::vector<double> out;
  compute_residuals(h, data, out);
  return out;
}

// ---------------------------------------------------------------------------
// Solvers
// ---------------------------------------------------------------------------

/// Smallest singular value ratio below which a design matrix is rank deficient.
inline constexpr double kDegeneracyRatio = 1e-8;

namespace detail {

using Points2 = Eigen::Matrix<double, 2, Eigen::Dynamic>;

/// Isotropic normalization: centroid to origin, mean distance sqrt(2).
/// Returns nullopt for coincident points.
inline std::optional<Eigen::Matrix3d> hartley_transform(const Points2& pts) {
  const Eigen::Vector2d centroid = pts.rowwise().mean();
  double mean_dist = 0.0;
  for (Eigen::Index i = 0; i < pts.cols(); ++i) mean_dist += (pts.col(i) - centroid).norm();
  mean_dist /= static_cast<double>(pts.cols());
  const double scale_ref = pts.cwiseAbs().maxCoeff();
  if (!(mean_dist > 1e-12 * std::max(1.0, scale_ref))) return std::nullopt;
  const double s = std::sqrt(2.0) / mean_dist;
  Eigen::Matrix3d t;
  t << s, 0, -s * centroid.x(), 0, s, -s * centroid.y(), 0, 0, 1;
  return t;
}

inline Points2 apply(const Eigen::Matrix3d& t, const Points2& pts) {
  Points2 out(2, pts.cols());
  for (Eigen::Index i = 0; i < pts.cols(); ++i) {
    out(0, i) = t(0, 0) * pts(0, i) + t(0, 1) * pts(1, i) + t(0, 2);
    out(1, i) = t(1, 0) * pts(0, i) + t(1, 1) * pts(1, i) + t(1, 2);
  }
  return out;
}

/// |cross(b - a, c - a)| relative to the longest side squared.
inline double collinearity(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
  const Eigen::Vector2d u = b - a, v = c - a, w = c - b;
  const double longest = std::max({u.squaredNorm(), v.squaredNorm(), w.squaredNorm()});
  if (longest == 0.0) return 0.0;
  return std::abs(u.x() * v.y() - u.y() * v.x()) / longest;
}

inline bool any_three_collinear(const Points2& pts) {
  const Eigen::Index n = pts.cols();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      for (Eigen::Index k = j + 1; k < n; ++k)
        if (collinearity(pts.col(i), pts.col(j), pts.col(k)) < kDegeneracyRatio) return true;
  return false;
}

inline void split_views(const DataSet& data, Points2& first, Points2& second) {
  const auto n = static_cast<Eigen::Index>(data.size());
  first.resize(2, n);
  second.resize(2, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto p = data.point(static_cast<std::size_t>(i));
    first(0, i) = p[0];
    first(1, i) = p[1];
    second(0, i) = p[2];
    second(1, i) = p[3];
  }
}

inline Points2 planar(const DataSet& data) {
  Points2 pts(2, static_cast<Eigen::Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto p = data.point(i);
    pts(0, static_cast<Eigen::Index>(i)) = p[0];
    pts(1, static_cast<Eigen::Index>(i)) = p[1];
  }
  return pts;
}

/// Null vector of `a` (last right singular vector) if the design has full
/// rank apart from that one direction.
inline std::optional<Eigen::Matrix<double, 9, 1>> dlt_null_vector(const Eigen::Matrix<double, Eigen::Dynamic, 9>& a) {
  Eigen::JacobiSVD<Eigen::Matrix<double, Eigen::Dynamic, 9>> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv.size() < 8 || !(sv(0) > 0.0)) return std::nullopt;
  if (sv(7) / sv(0) < kDegeneracyRatio) return std::nullopt;
  return svd.matrixV().col(8);
}

inline std::optional<Eigen::Matrix3d> homography_dlt(const Points2& src, const Points2& dst, bool normalize) {
  Eigen::Matrix3d t1 = Eigen::Matrix3d::Identity(), t2 = Eigen::Matrix3d::Identity();
  Points2 s = src, d = dst;
  if (normalize) {
    auto n1 = hartley_transform(src);
    auto n2 = hartley_transform(dst);
    if (!n1 || !n2) return std::nullopt;
    t1 = *n1;
    t2 = *n2;
    s = apply(t1, src);
    d = apply(t2, dst);
  }
  const Eigen::Index n = src.cols();
  Eigen::Matrix<double, Eigen::Dynamic, 9> a(2 * n, 9);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = s(0, i), y = s(1, i), u = d(0, i), v = d(1, i);
    a.row(2 * i) << -x, -y, -1, 0, 0, 0, u * x, u * y, u;
    a.row(2 * i + 1) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
  }
  auto h = dlt_null_vector(a);
  if (!h) return std::nullopt;
  Eigen::Matrix3d hn;
  hn << (*h)(0), (*h)(1), (*h)(2), (*h)(3), (*h)(4), (*h)(5), (*h)(6), (*h)(7), (*h)(8);
  return Eigen::Matrix3d(t2.inverse() * hn * t1);
}

inline std::optional<Eigen::Matrix3d> fundamental_8point(const Points2& x1, const Points2& x2) {
  auto n1 = hartley_transform(x1);
  auto n2 = hartley_transform(x2);
  if (!n1 || !n2) return std::nullopt;
  const Points2 a1 = apply(*n1, x1), a2 = apply(*n2, x2);
  const Eigen::Index n = x1.cols();
  Eigen::Matrix<double, Eigen::Dynamic, 9> a(n, 9);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = a1(0, i), y = a1(1, i), u = a2(0, i), v = a2(1, i);
    a.row(i) << u * x, u * y, u, v * x, v * y, v, x, y, 1;
  }
  auto f = dlt_null_vector(a);
  if (!f) return std::nullopt;
  Eigen::Matrix3d fn;
  fn << (*f)(0), (*f)(1), (*f)(2), (*f)(3), (*f)(4), (*f)(5), (*f)(6), (*f)(7), (*f)(8);
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(fn, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Vector3d sv = svd.singularValues();
  sv(2) = 0.0;
  fn = svd.matrixU() * sv.asDiagonal() * svd.matrixV().transpose();
  return Eigen::Matrix3d(n2->transpose() * fn * (*n1));
}

inline std::optional<ModelHypothesis> fit_line_2pt(const Points2& pts) {
  const Eigen::Vector2d p = pts.col(0), q = pts.col(1);
  const Eigen::Vector2d d = q - p;
  const double ref = std::max({1.0, p.cwiseAbs().maxCoeff(), q.cwiseAbs().maxCoeff()});
  if (d.norm() <= kDegeneracyRatio * ref) return std::nullopt;
  const double a = -d.y(), b = d.x();
  const double c = -(a * p.x() + b * p.y());
  return ModelHypothesis(ModelKind::Line2D, {a, b, c});
}

inline std::optional<ModelHypothesis> fit_circle_3pt(const Points2& pts) {
  const Eigen::Vector2d a = pts.col(0), b = pts.col(1), c = pts.col(2);
  if (collinearity(a, b, c) < kDegeneracyRatio) return std::nullopt;
  // Circumcenter relative to a for conditioning.
  const Eigen::Vector2d u = b - a, v = c - a;
  const double d = 2.0 * (u.x() * v.y() - u.y() * v.x());
  const double uu = u.squaredNorm(), vv = v.squaredNorm();
  const Eigen::Vector2d center_rel((v.y() * uu - u.y() * vv) / d, (u.x() * vv - v.x() * uu) / d);
  const Eigen::Vector2d center = a + center_rel;
  return ModelHypothesis(ModelKind::Circle2D, {center.x(), center.y(), center_rel.norm()});
}

inline std::optional<ModelHypothesis> fit_line_tls(const Points2& pts) {
  const Eigen::Vector2d centroid = pts.rowwise().mean();
  const Points2 centered = pts.colwise() - centroid;
  const Eigen::Matrix2d cov = centered * centered.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
  const double ref = std::max(1.0, pts.cwiseAbs().maxCoeff());
  if (!(es.eigenvalues()(1) > kDegeneracyRatio * kDegeneracyRatio * ref * ref)) return std::nullopt;
  const Eigen::Vector2d normal = es.eigenvectors().col(0);
  return ModelHypothesis(ModelKind::Line2D, {normal.x(), normal.y(), -normal.dot(centroid)});
}

inline double circle_sse(const Points2& pts, const Eigen::Vector3d& c) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < pts.cols(); ++i) {
    const double r = (pts.col(i) - c.head<2>()).norm() - c(2);
    s += r * r;
  }
  return s;
}

/// Algebraic (Kasa) circle fit, then geometric Gauss-Newton polish that only
/// accepts improving steps.
inline std::optional<ModelHypothesis> fit_circle_ls(const Points2& pts) {
  auto t = hartley_transform(pts);
  if (!t) return std::nullopt;
  const Points2 q = apply(*t, pts);
  const Eigen::Index n = q.cols();
  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a.row(i) << q(0, i), q(1, i), 1.0;
    rhs(i) = -(q(0, i) * q(0, i) + q(1, i) * q(1, i));
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (!(sv(0) > 0.0) || sv(2) / sv(0) < kDegeneracyRatio) return std::nullopt;
  const Eigen::Vector3d def = svd.solve(rhs);
  const double cx = -def(0) / 2.0, cy = -def(1) / 2.0;
  const double r2 = cx * cx + cy * cy - def(2);
  if (!(r2 > 0.0)) return std::nullopt;
  const double s = (*t)(0, 0);
  Eigen::Vector3d c((cx - (*t)(0, 2)) / s, (cy - (*t)(1, 2)) / s, std::sqrt(r2) / s);

  double sse = circle_sse(pts, c);
  for (int iter = 0; iter < 20; ++iter) {
    Eigen::MatrixXd jac(n, 3);
    Eigen::VectorXd res(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Vector2d d = pts.col(i) - c.head<2>();
      const double dist = d.norm();
      if (dist == 0.0) return ModelHypothesis(ModelKind::Circle2D, {c(0), c(1), c(2)});
      res(i) = dist - c(2);
      jac.row(i) << -d.x() / dist, -d.y() / dist, -1.0;
    }
    const Eigen::Vector3d step = jac.colPivHouseholderQr().solve(-res);
    const Eigen::Vector3d next = c + step;
    const double next_sse = next(2) > 0.0 ? circle_sse(pts, next) : std::numeric_limits<double>::infinity();
    if (!(next_sse < sse)) break;
    const double gain = sse - next_sse;
    c = next;
    sse = next_sse;
    if (gain <= 1e-15 * (1.0 + sse)) break;
  }
  return ModelHypothesis(ModelKind::Circle2D, {c(0), c(1), c(2)});
}

inline std::optional<ModelHypothesis> fit_points(ModelKind kind, const DataSet& pts, bool minimal) {
  switch (kind) {
    case ModelKind::Line2D: {
      const Points2 p = planar(pts);
      return minimal ? fit_line_2pt(p) : fit_line_tls(p);
    }
    case ModelKind::Circle2D: {
      const Points2 p = planar(pts);
      return minimal ? fit_circle_3pt(p) : fit_circle_ls(p);
    }
    case ModelKind::Homography: {
      Points2 src, dst;
      split_views(pts, src, dst);
      if (minimal && (any_three_collinear(src) || any_three_collinear(dst))) return std::nullopt;
      auto h = homography_dlt(src, dst, true);
      if (!h) return std::nullopt;
      return ModelHypothesis::from_matrix(kind, *h);
    }
    case ModelKind::Fundamental: {
      Points2 x1, x2;
      split_views(pts, x1, x2);
      auto f = fundamental_8point(x1, x2);
      if (!f) return std::nullopt;
      return ModelHypothesis::from_matrix(kind, *f);
    }
  }
  return std::nullopt;
}

inline void check_subset(ModelKind kind, const DataSet& pts, bool minimal) {
  if (pts.dim() != point_dimension(kind)) {
    throw Error(ErrorCode::InvalidArgument, "point dimension does not match the model kind");
  }
  const std::size_t need = minimal_subset_size(kind);
  if (minimal ? pts.size() != need : pts.size() < need) {
    throw Error(ErrorCode::InvalidArgument, "subset size does not match the minimal subset size");
  }
}

}  // namespace detail

/// Minimal-subset fit; nullopt when the subset is degenerate.
inline std::optional<ModelHypothesis> try_fit_minimal(ModelKind kind, const DataSet& subset) {
  detail::check_subset(kind, subset, true);
  return detail::fit_points(kind, subset, true);
}

/// Minimal-subset fit (two-point line, circumcircle, normalized DLT, 8-point).
/// Throws DegenerateSubset so the caller can resample.
inline ModelHypothesis fit_minimal(ModelKind kind, const DataSet& subset) {
  auto h = try_fit_minimal(kind, subset);
  if (!h) throw Error(ErrorCode::DegenerateSubset, std::string("degenerate minimal subset for ") + std::string(to_string(kind)));
  return *h;
}

/// Least-squares fit over an inlier set: total least squares for lines,
/// algebraic-then-geometric for circles, normalized DLT for the projective kinds.
inline ModelHypothesis refit_least_squares(ModelKind kind, const DataSet& inliers) {
  detail::check_subset(kind, inliers, false);
  auto h = detail::fit_points(kind, inliers, false);
  if (!h) throw Error(ErrorCode::DegenerateSubset, "degenerate inlier set for least-squares refit");
  return *h;
}

/// Homography DLT with Hartley normalization switchable, for conditioning checks.
inline std::optional<ModelHypothesis> fit_homography_dlt(const DataSet& correspondences, bool normalize) {
  detail::Points2 src, dst;
  detail::split_views(correspondences, src, dst);
  auto h = detail::homography_dlt(src, dst, normalize);
  if (!h) return std::nullopt;
  return ModelHypothesis::from_matrix(ModelKind::Homography, *h);
}

}  // namespace hf
