#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hf/errors.hpp"
#include "hf/geometry.hpp"
#include "hf/random.hpp"

namespace hf::bench {

struct Box {
  double x_min = 0.0, x_max = 100.0, y_min = 0.0, y_max = 100.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  bool valid() const { return x_max > x_min && y_max > y_min; }
};

/// Ground truth for a synthetic scene.
///
/// For the two-view kinds, `regions[s]` (when given) bounds structure s in
/// the first view and `second_domain` is the second image; noise is added in
/// the second view only.
struct SyntheticSpec {
  ModelKind kind = ModelKind::Line2D;
  std::vector<std::vector<double>> structures;
  std::vector<Box> regions;
  std::size_t inliers_per_structure = 100;
  double inlier_sigma = 1.5;
  double outlier_fraction = 0.0;
  Box domain;
  std::optional<Box> second_domain;
  std::uint64_t rng_seed = 0;
};

struct LabeledDataSet {
  DataSet data;
  std::vector<int> gt_labels;  // 0 = outlier
  std::vector<std::vector<double>> gt_params;
};

/// round(total_inliers * f / (1 - f))
inline std::size_t outlier_count(std::size_t total_inliers, double outlier_fraction) {
  return static_cast<std::size_t>(
      std::llround(static_cast<double>(total_inliers) * outlier_fraction / (1.0 - outlier_fraction)));
}

namespace detail {

/// Segment of the line a x + b y + c = 0 inside the box, if any.
inline std::optional<std::pair<Eigen::Vector2d, Eigen::Vector2d>> clip_line(const std::array<double, 3>& l,
                                                                            const Box& box) {
  std::vector<Eigen::Vector2d> hits;
  const double a = l[0], b = l[1], c = l[2];
  auto add = [&](double x, double y) {
    if (x < box.x_min - 1e-9 || x > box.x_max + 1e-9 || y < box.y_min - 1e-9 || y > box.y_max + 1e-9) return;
    for (const auto& h : hits)
      if ((h - Eigen::Vector2d(x, y)).norm() < 1e-9) return;
    hits.emplace_back(x, y);
  };
  if (std::abs(b) > 1e-15) {
    add(box.x_min, -(a * box.x_min + c) / b);
    add(box.x_max, -(a * box.x_max + c) / b);
  }
  if (std::abs(a) > 1e-15) {
    add(-(b * box.y_min + c) / a, box.y_min);
    add(-(b * box.y_max + c) / a, box.y_max);
  }
  if (hits.size() < 2) return std::nullopt;
  return std::make_pair(hits[0], hits[1]);
}

inline Eigen::Matrix3d to_matrix(const std::vector<double>& p) {
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = p[static_cast<std::size_t>(3 * r + c)];
  return m;
}

}  // namespace detail

/// Samples inliers on every structure plus uniform outliers. Inliers come
/// first, grouped by structure (labels 1..k), followed by outliers (label 0).
inline LabeledDataSet generate(const SyntheticSpec& spec) {
  const std::size_t need = minimal_subset_size(spec.kind);
  if (spec.structures.empty()) throw Error(ErrorCode::InvalidSpec, "no structures");
  if (!(spec.outlier_fraction >= 0.0 && spec.outlier_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidSpec, "outlier_fraction must lie in [0, 1)");
  }
  if (spec.inliers_per_structure < need) throw Error(ErrorCode::InvalidSpec, "too few inliers per structure");
  if (!(spec.inlier_sigma >= 0.0)) throw Error(ErrorCode::InvalidSpec, "inlier_sigma must be nonnegative");
  if (!spec.domain.valid()) throw Error(ErrorCode::InvalidSpec, "empty domain");
  if (!spec.regions.empty() && spec.regions.size() != spec.structures.size()) {
    throw Error(ErrorCode::InvalidSpec, "regions must match the structure count");
  }
  const Box second = spec.second_domain.value_or(spec.domain);

  LabeledDataSet out;
  out.data = DataSet(point_dimension(spec.kind));
  Rng rng(spec.rng_seed);

  for (std::size_t s = 0; s < spec.structures.size(); ++s) {
    const auto& raw = spec.structures[s];
    if (raw.size() != parameter_dimension(spec.kind)) throw Error(ErrorCode::InvalidSpec, "bad parameter dimension");
    const ModelHypothesis gt(spec.kind, raw);
    out.gt_params.push_back(gt.param_vector());
    const auto p = gt.params();
    const Box region = spec.regions.empty() ? spec.domain : spec.regions[s];
    const int label = static_cast<int>(s) + 1;

    switch (spec.kind) {
      case ModelKind::Line2D: {
        auto seg = detail::clip_line({p[0], p[1], p[2]}, region);
        if (!seg) throw Error(ErrorCode::InvalidSpec, "line does not cross the domain");
        const Eigen::Vector2d normal(p[0], p[1]);
        for (std::size_t i = 0; i < spec.inliers_per_structure; ++i) {
          const double t = rng.uniform();
          const Eigen::Vector2d q = seg->first + t * (seg->second - seg->first) + rng.normal(0.0, spec.inlier_sigma) * normal;
          out.data.push_back({q.x(), q.y()});
          out.gt_labels.push_back(label);
        }
        break;
      }
      case ModelKind::Circle2D: {
        for (std::size_t i = 0; i < spec.inliers_per_structure; ++i) {
          const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
          const double radius = p[2] + rng.normal(0.0, spec.inlier_sigma);
          out.data.push_back({p[0] + radius * std::cos(angle), p[1] + radius * std::sin(angle)});
          out.gt_labels.push_back(label);
        }
        break;
      }
      case ModelKind::Homography: {
        const Eigen::Matrix3d h = detail::to_matrix(gt.param_vector());
        std::size_t made = 0, attempts = 0;
        while (made < spec.inliers_per_structure) {
          if (++attempts > 1000 * spec.inliers_per_structure) throw Error(ErrorCode::InvalidSpec, "homography maps region off the plane");
          const Eigen::Vector3d x1(rng.uniform(region.x_min, region.x_max), rng.uniform(region.y_min, region.y_max), 1.0);
          const Eigen::Vector3d y = h * x1;
          if (std::abs(y.z()) < 1e-9) continue;
          const double u = y.x() / y.z() + rng.normal(0.0, spec.inlier_sigma);
          const double v = y.y() / y.z() + rng.normal(0.0, spec.inlier_sigma);
          out.data.push_back({x1.x(), x1.y(), u, v});
          out.gt_labels.push_back(label);
          ++made;
        }
        break;
      }
      case ModelKind::Fundamental: {
        const Eigen::Matrix3d f = detail::to_matrix(gt.param_vector());
        std::size_t made = 0, attempts = 0;
        while (made < spec.inliers_per_structure) {
          if (++attempts > 1000 * spec.inliers_per_structure) throw Error(ErrorCode::InvalidSpec, "epipolar lines miss the second view");
          const Eigen::Vector3d x1(rng.uniform(region.x_min, region.x_max), rng.uniform(region.y_min, region.y_max), 1.0);
          const Eigen::Vector3d l = f * x1;
          const double norm = std::hypot(l.x(), l.y());
          if (!(norm > 0.0)) continue;
          auto seg = detail::clip_line({l.x() / norm, l.y() / norm, l.z() / norm}, second);
          if (!seg) continue;
          const Eigen::Vector2d q = seg->first + rng.uniform() * (seg->second - seg->first);
          out.data.push_back({x1.x(), x1.y(), q.x() + rng.normal(0.0, spec.inlier_sigma),
                              q.y() + rng.normal(0.0, spec.inlier_sigma)});
          out.gt_labels.push_back(label);
          ++made;
        }
        break;
      }
    }
  }

  const std::size_t n_out = outlier_count(spec.inliers_per_structure * spec.structures.size(), spec.outlier_fraction);
  for (std::size_t i = 0; i < n_out; ++i) {
    const double x = rng.uniform(spec.domain.x_min, spec.domain.x_max);
    const double y = rng.uniform(spec.domain.y_min, spec.domain.y_max);
    if (point_dimension(spec.kind) == 2) {
      out.data.push_back({x, y});
    } else {
      out.data.push_back({x, y, rng.uniform(second.x_min, second.x_max), rng.uniform(second.y_min, second.y_max)});
    }
    out.gt_labels.push_back(0);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

/// Line through two points, as raw (a, b, c).
inline std::vector<double> line_through(double x1, double y1, double x2, double y2) {
  const double a = y1 - y2, b = x2 - x1;
  return {a, b, -(a * x1 + b * y1)};
}

/// Line scenes on [0, 100]^2 with 100 inliers per line at noise 1.5 and
/// outlier fractions 86/88/89/90% for 3/4/5/6 lines. No line is near
/// horizontal, so the sign convention of the normalized parameters is stable.
inline SyntheticSpec line_scene(std::size_t lines, std::uint64_t seed) {
  static const std::vector<std::vector<double>> layout = {
      line_through(5, 10, 95, 40),  line_through(10, 90, 90, 60), line_through(30, 5, 60, 95),
      line_through(75, 5, 85, 95),  line_through(5, 70, 50, 5),   line_through(20, 30, 95, 75),
  };
  if (lines < 3 || lines > 6) throw Error(ErrorCode::InvalidSpec, "line scenes have 3 to 6 lines");
  static constexpr double fractions[] = {0.86, 0.88, 0.89, 0.90};
  SyntheticSpec spec;
  spec.kind = ModelKind::Line2D;
  spec.structures.assign(layout.begin(), layout.begin() + static_cast<std::ptrdiff_t>(lines));
  spec.inliers_per_structure = 100;
  spec.inlier_sigma = 1.5;
  spec.outlier_fraction = fractions[lines - 3];
  spec.domain = {0, 100, 0, 100};
  spec.rng_seed = seed;
  return spec;
}

/// Plane-induced homography H = K (R - t n^T / d) K^-1 between two views.
inline Eigen::Matrix3d plane_homography(const Eigen::Matrix3d& k, const Eigen::Matrix3d& r, const Eigen::Vector3d& t,
                                        const Eigen::Vector3d& normal, double depth) {
  return k * (r - t * normal.normalized().transpose() / depth) * k.inverse();
}

/// Two 640x480 views of three planes, each plane occupying one vertical strip
/// of the first image; 1 pixel noise and 50% gross outliers by default.
inline SyntheticSpec plane_scene(std::size_t planes, std::uint64_t seed) {
  if (planes < 2 || planes > 3) throw Error(ErrorCode::InvalidSpec, "plane scenes have 2 or 3 planes");
  Eigen::Matrix3d k;
  k << 500, 0, 320, 0, 500, 240, 0, 0, 1;
  const Eigen::Matrix3d r = Eigen::AngleAxisd(0.08, Eigen::Vector3d::UnitY()).toRotationMatrix() *
                            Eigen::AngleAxisd(0.03, Eigen::Vector3d::UnitX()).toRotationMatrix();
  const Eigen::Vector3d t(0.6, 0.05, 0.1);
  const std::array<std::pair<Eigen::Vector3d, double>, 3> plane_defs = {{
      {Eigen::Vector3d(0.6, 0.0, 1.0), 4.0},
      {Eigen::Vector3d(0.0, 0.0, 1.0), 6.0},
      {Eigen::Vector3d(-0.5, 0.3, 1.0), 5.0},
  }};
  const std::array<Box, 3> strips = {{{20, 200, 20, 460}, {230, 410, 20, 460}, {440, 620, 20, 460}}};

  SyntheticSpec spec;
  spec.kind = ModelKind::Homography;
  for (std::size_t p = 0; p < planes; ++p) {
    const Eigen::Matrix3d h = plane_homography(k, r, t, plane_defs[p].first, plane_defs[p].second);
    std::vector<double> raw(9);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) raw[static_cast<std::size_t>(3 * i + j)] = h(i, j);
    spec.structures.push_back(raw);
    spec.regions.push_back(strips[p]);
  }
  spec.inliers_per_structure = 100;
  spec.inlier_sigma = 1.0;
  spec.outlier_fraction = 0.5;
  spec.domain = {0, 640, 0, 480};
  spec.second_domain = Box{0, 640, 0, 480};
  spec.rng_seed = seed;
  return spec;
}

/// Named presets: lines3..lines6, planes2, planes3.
inline SyntheticSpec preset(std::string_view name, std::uint64_t seed) {
  if (name == "lines3") return line_scene(3, seed);
  if (name == "lines4") return line_scene(4, seed);
  if (name == "lines5") return line_scene(5, seed);
  if (name == "lines6") return line_scene(6, seed);
  if (name == "planes2") return plane_scene(2, seed);
  if (name == "planes3") return plane_scene(3, seed);
  throw Error(ErrorCode::InvalidSpec, "unknown preset '" + std::string(name) + "'");
}

}  // namespace hf::bench
