#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "hf/geometry.hpp"
#include "hf/random.hpp"

using namespace hf;

namespace {

DataSet points2(std::initializer_list<std::pair<double, double>> pts) {
  DataSet d(2);
  for (auto [x, y] : pts) d.push_back({x, y});
  return d;
}

void expect_params(const ModelHypothesis& h, std::initializer_list<double> want, double tol) {
  ASSERT_EQ(h.params().size(), want.size());
  std::size_t i = 0;
  for (double w : want) EXPECT_NEAR(h.params()[i++], w, tol) << "param " << i - 1;
}

Eigen::Matrix3d random_homography(Rng& rng) {
  Eigen::Matrix3d h = Eigen::Matrix3d::Identity();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) h(r, c) += rng.uniform(-0.3, 0.3);
  h(2, 0) *= 0.3;
  h(2, 1) *= 0.3;
  return h;
}

Eigen::Vector2d map(const Eigen::Matrix3d& h, double x, double y) {
  const Eigen::Vector3d p = h * Eigen::Vector3d(x, y, 1.0);
  return p.head<2>() / p(2);
}

}  // namespace

TEST(ModelKindTest, SizesMatchTheKinds) {
  EXPECT_EQ(minimal_subset_size(ModelKind::Line2D), 2u);
  EXPECT_EQ(minimal_subset_size(ModelKind::Circle2D), 3u);
  EXPECT_EQ(minimal_subset_size(ModelKind::Homography), 4u);
  EXPECT_EQ(minimal_subset_size(ModelKind::Fundamental), 8u);
  EXPECT_EQ(parameter_dimension(ModelKind::Line2D), 3u);
  EXPECT_EQ(parameter_dimension(ModelKind::Circle2D), 3u);
  EXPECT_EQ(parameter_dimension(ModelKind::Homography), 9u);
  EXPECT_EQ(parameter_dimension(ModelKind::Fundamental), 9u);
  EXPECT_EQ(point_dimension(ModelKind::Line2D), 2);
  EXPECT_EQ(point_dimension(ModelKind::Homography), 4);
}

TEST(ModelKindTest, NamesRoundTrip) {
  for (auto k : {ModelKind::Line2D, ModelKind::Circle2D, ModelKind::Homography, ModelKind::Fundamental}) {
    EXPECT_EQ(parse_model_kind(to_string(k)), k);
  }
  EXPECT_THROW(parse_model_kind("ellipse"), Error);
}

TEST(DataSetTest, RejectsNonFiniteAndRaggedInput) {
  EXPECT_THROW(DataSet(2, {1.0, 2.0, 3.0}), Error);
  EXPECT_THROW(DataSet(2, {1.0, std::nan("")}), Error);
  DataSet d(2);
  EXPECT_THROW(d.push_back({1.0, 2.0, 3.0}), Error);
  EXPECT_THROW(d.push_back({INFINITY, 0.0}), Error);
}

TEST(HypothesisTest, LineNormalization) {
  const ModelHypothesis h(ModelKind::Line2D, {-3.0, -4.0, 10.0});
  expect_params(h, {0.6, 0.8, -2.0}, 1e-15);
  // leading a = 0: b decides the sign
  const ModelHypothesis v(ModelKind::Line2D, {0.0, -2.0, 4.0});
  expect_params(v, {0.0, 1.0, -2.0}, 1e-15);
  EXPECT_THROW(ModelHypothesis(ModelKind::Line2D, {0.0, 0.0, 1.0}), Error);
}

TEST(HypothesisTest, CircleAndMatrixNormalization) {
  const ModelHypothesis c(ModelKind::Circle2D, {1.0, 2.0, -3.0});
  expect_params(c, {1.0, 2.0, 3.0}, 0.0);
  EXPECT_THROW(ModelHypothesis(ModelKind::Circle2D, {1.0, 2.0, 0.0}), Error);

  const ModelHypothesis h(ModelKind::Homography, {2, 0, 0, 0, 2, 0, 0, 0, -2});
  const double s = 1.0 / std::sqrt(3.0);
  expect_params(h, {-s, 0, 0, 0, -s, 0, 0, 0, s}, 1e-15);
  double norm = 0.0;
  for (double v : h.params()) norm += v * v;
  EXPECT_NEAR(norm, 1.0, 1e-15);
  EXPECT_THROW(ModelHypothesis(ModelKind::Homography, {1, 2, 3}), Error);
  EXPECT_THROW(ModelHypothesis(ModelKind::Line2D, {NAN, 1.0, 0.0}), Error);
}

TEST(FitMinimalTest, LineThroughOriginAt45Degrees) {
  const auto h = fit_minimal(ModelKind::Line2D, points2({{0, 0}, {1, 1}}));
  expect_params(h, {1 / std::numbers::sqrt2, -1 / std::numbers::sqrt2, 0.0}, 1e-15);
}

TEST(FitMinimalTest, UnitCircle) {
  const auto h = fit_minimal(ModelKind::Circle2D, points2({{1, 0}, {0, 1}, {-1, 0}}));
  expect_params(h, {0.0, 0.0, 1.0}, 1e-15);
}

TEST(FitMinimalTest, IdentityHomography) {
  DataSet d(4);
  for (auto [x, y] : {std::pair{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}}) d.push_back({x, y, x, y});
  const auto h = fit_minimal(ModelKind::Homography, d);
  const double s = 1.0 / std::sqrt(3.0);
  expect_params(h, {s, 0, 0, 0, s, 0, 0, 0, s}, 1e-12);
}

TEST(FitMinimalTest, DegenerateSubsetsThrow) {
  EXPECT_THROW(fit_minimal(ModelKind::Line2D, points2({{2, 3}, {2, 3}})), Error);
  EXPECT_THROW(fit_minimal(ModelKind::Circle2D, points2({{0, 0}, {1, 1}, {2, 2}})), Error);
  EXPECT_THROW(fit_minimal(ModelKind::Circle2D, points2({{0, 0}, {0, 0}, {2, 1}})), Error);

  DataSet h(4);
  for (auto [x, y] : {std::pair{0.0, 0.0}, {1.0, 1.0}, {2.0, 2.0}, {0.0, 1.0}}) h.push_back({x, y, x + 1, y});
  try {
    fit_minimal(ModelKind::Homography, h);
    FAIL() << "collinear source points accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateSubset);
  }
  DataSet h2(4);
  for (auto [x, y] : {std::pair{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}}) h2.push_back({x, y, x, 0.0});
  EXPECT_THROW(fit_minimal(ModelKind::Homography, h2), Error);

  // eight correspondences all from one point: rank-deficient design
  DataSet f(4);
  for (int i = 0; i < 8; ++i) f.push_back({1.0, 2.0, 3.0, 4.0});
  EXPECT_FALSE(try_fit_minimal(ModelKind::Fundamental, f).has_value());
}

TEST(FitMinimalTest, WrongSubsetSizeIsAnArgumentError) {
  try {
    fit_minimal(ModelKind::Line2D, points2({{0, 0}, {1, 1}, {2, 2}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
  }
}

TEST(ResidualTest, Examples) {
  EXPECT_DOUBLE_EQ(residual(ModelHypothesis(ModelKind::Line2D, {0, 1, 0}), {5, 2}), 2.0);
  EXPECT_DOUBLE_EQ(residual(ModelHypothesis(ModelKind::Circle2D, {0, 0, 1}), {2, 0}), 1.0);
  EXPECT_DOUBLE_EQ(residual(ModelHypothesis(ModelKind::Homography, {1, 0, 0, 0, 1, 0, 0, 0, 1}), {1, 2, 1, 2}), 0.0);
  EXPECT_THROW(residual(ModelHypothesis(ModelKind::Line2D, {0, 1, 0}), {1, 2, 3, 4}), Error);
}

TEST(ResidualTest, SymmetricTransferMatchesDefinition) {
  // pure translation by (3, 0): forward error = backward error
  const ModelHypothesis h(ModelKind::Homography, {1, 0, 3, 0, 1, 0, 0, 0, 1});
  EXPECT_NEAR(residual(h, {0, 0, 3, 4}), 4.0, 1e-12);
  // scale by 2: forward miss 1, backward miss 0.5
  const ModelHypothesis s(ModelKind::Homography, {2, 0, 0, 0, 2, 0, 0, 0, 1});
  EXPECT_NEAR(residual(s, {1, 0, 3, 0}), std::sqrt((1.0 + 0.25) / 2.0), 1e-12);
}

TEST(ResidualTest, PlaneAtInfinityGivesInfinity) {
  // third row (1, 0, 0): x = 0 maps to infinity
  const ModelHypothesis h(ModelKind::Homography, {0, 1, 0, 0, 0, 1, 1, 0, 0});
  EXPECT_TRUE(std::isinf(residual(h, {0.0, 5.0, 1.0, 1.0})));
}

TEST(ResidualTest, SampsonDistanceOfAKnownEpipolarPair) {
  // F for a pure x-translation: epipolar lines are horizontal, y' = y
  const ModelHypothesis f(ModelKind::Fundamental, {0, 0, 0, 0, 0, -1, 0, 1, 0});
  EXPECT_NEAR(residual(f, {2.0, 3.0, 7.0, 3.0}), 0.0, 1e-15);
  // e = y' - y = 1 (up to sign), gradient norm^2 = 2
  EXPECT_NEAR(residual(f, {2.0, 3.0, 7.0, 4.0}), 1.0 / std::sqrt(2.0), 1e-12);
}

TEST(ResidualTest, InvariantUnderParameterScaling) {
  Rng rng(7);
  for (int t = 0; t < 50; ++t) {
    const double a = rng.uniform(-1, 1), b = rng.uniform(-1, 1), c = rng.uniform(-5, 5), s = rng.uniform(0.1, 10);
    const double x = rng.uniform(-10, 10), y = rng.uniform(-10, 10);
    const double r0 = residual(ModelHypothesis(ModelKind::Line2D, {a, b, c}), {x, y});
    EXPECT_NEAR(residual(ModelHypothesis(ModelKind::Line2D, {s * a, s * b, s * c}), {x, y}), r0, 1e-12);
    EXPECT_NEAR(residual(ModelHypothesis(ModelKind::Line2D, {-s * a, -s * b, -s * c}), {x, y}), r0, 1e-12);
    const Eigen::Matrix3d h = random_homography(rng);
    const double r1 = residual(ModelHypothesis::from_matrix(ModelKind::Homography, h), {x, y, x + 1, y - 1});
    const double r2 = residual(ModelHypothesis::from_matrix(ModelKind::Homography, -s * h), {x, y, x + 1, y - 1});
    EXPECT_NEAR(r1, r2, 1e-12 * std::max(1.0, r1));
  }
}

TEST(FitMinimalProperty, InterpolatesItsSubset) {
  Rng rng(11);
  int checked = 0;
  for (int t = 0; t < 300; ++t) {
    DataSet line(2), circle(2);
    for (int i = 0; i < 2; ++i) line.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1)});
    for (int i = 0; i < 3; ++i) circle.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1)});
    DataSet corr(4);
    const Eigen::Matrix3d h = random_homography(rng);
    for (int i = 0; i < 4; ++i) {
      const double x = rng.uniform(-1, 1), y = rng.uniform(-1, 1);
      const Eigen::Vector2d q = map(h, x, y);
      corr.push_back({x, y, q.x(), q.y()});
    }
    for (auto [kind, data] : {std::pair{ModelKind::Line2D, &line}, {ModelKind::Circle2D, &circle},
                              {ModelKind::Homography, &corr}}) {
      const auto fitted = try_fit_minimal(kind, *data);
      if (!fitted) continue;
      ++checked;
      for (std::size_t i = 0; i < data->size(); ++i) EXPECT_LT(residual(*fitted, data->point(i)), 1e-9);
    }
  }
  EXPECT_GT(checked, 850);
}

TEST(FitMinimalProperty, HartleyNormalizationAgreesOnWellConditionedSubsets) {
  Rng rng(5);
  for (int t = 0; t < 100; ++t) {
    const Eigen::Matrix3d h = random_homography(rng);
    DataSet corr(4);
    // one point per quadrant keeps the subset well conditioned
    for (auto [sx, sy] : {std::pair{-1.0, -1.0}, {1.0, -1.0}, {-1.0, 1.0}, {1.0, 1.0}}) {
      const double x = sx * rng.uniform(0.3, 1.0), y = sy * rng.uniform(0.3, 1.0);
      const Eigen::Vector2d q = map(h, x, y);
      corr.push_back({x, y, q.x(), q.y()});
    }
    const auto a = fit_homography_dlt(corr, true);
    const auto b = fit_homography_dlt(corr, false);
    ASSERT_TRUE(a && b);
    for (std::size_t i = 0; i < 9; ++i) EXPECT_NEAR(a->params()[i], b->params()[i], 1e-9);
  }
}

TEST(FitMinimalProperty, EightPointInterpolatesExactEpipolarData) {
  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    const Eigen::Matrix3d r = Eigen::AngleAxisd(rng.uniform(-0.3, 0.3), Eigen::Vector3d(rng.uniform(-1, 1), 1, rng.uniform(-1, 1)).normalized())
                                  .toRotationMatrix();
    const Eigen::Vector3d tr(rng.uniform(0.5, 1.0), rng.uniform(-0.3, 0.3), rng.uniform(-0.2, 0.2));
    Eigen::Matrix3d tx;
    tx << 0, -tr.z(), tr.y(), tr.z(), 0, -tr.x(), -tr.y(), tr.x(), 0;
    DataSet corr(4);
    for (int i = 0; i < 20; ++i) {
      const Eigen::Vector3d x(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(3, 6));
      const Eigen::Vector3d y = r * x + tr;
      corr.push_back({x.x() / x.z(), x.y() / x.z(), y.x() / y.z(), y.y() / y.z()});
    }
    std::vector<std::size_t> first8 = {0, 1, 2, 3, 4, 5, 6, 7};
    const auto f = try_fit_minimal(ModelKind::Fundamental, corr.subset(first8));
    ASSERT_TRUE(f);
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(f->matrix());
    EXPECT_LT(svd.singularValues()(2), 1e-9);
    for (std::size_t i = 0; i < corr.size(); ++i) EXPECT_LT(residual(*f, corr.point(i)), 1e-9);
  }
}

TEST(RefitTest, Examples) {
  const auto h = refit_least_squares(ModelKind::Line2D, points2({{0, 0}, {1, 1}, {2, 2}}));
  expect_params(h, {1 / std::numbers::sqrt2, -1 / std::numbers::sqrt2, 0.0}, 1e-12);

  const auto flat = refit_least_squares(ModelKind::Line2D, points2({{0, 0.1}, {1, -0.1}, {2, 0.1}, {3, -0.1}}));
  EXPECT_GT(std::abs(flat.params()[1]), 10.0 * std::abs(flat.params()[0]));

  const auto c = refit_least_squares(ModelKind::Circle2D, points2({{1, 0}, {-1, 0}, {0, 1}, {0, -1}}));
  expect_params(c, {0.0, 0.0, 1.0}, 1e-12);

  EXPECT_THROW(refit_least_squares(ModelKind::Line2D, points2({{1, 1}})), Error);
  EXPECT_THROW(refit_least_squares(ModelKind::Line2D, points2({{1, 1}, {1, 1}, {1, 1}})), Error);
}

TEST(RefitTest, MatchesClosedFormTotalLeastSquares) {
  Rng rng(21);
  for (int t = 0; t < 100; ++t) {
    DataSet d(2);
    const double angle = rng.uniform(0, std::numbers::pi);
    for (int i = 0; i < 30; ++i) {
      const double s = rng.uniform(-10, 10);
      d.push_back({3 + s * std::cos(angle) + rng.normal(0, 0.3), -2 + s * std::sin(angle) + rng.normal(0, 0.3)});
    }
    // closed form: direction angle = atan2(2 Sxy, Sxx - Syy) / 2 about the centroid
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < d.size(); ++i) mx += d.point(i)[0], my += d.point(i)[1];
    mx /= 30, my /= 30;
    double sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double dx = d.point(i)[0] - mx, dy = d.point(i)[1] - my;
      sxx += dx * dx, syy += dy * dy, sxy += dx * dy;
    }
    const double phi = 0.5 * std::atan2(2 * sxy, sxx - syy);
    const double a = -std::sin(phi), b = std::cos(phi);
    const ModelHypothesis want(ModelKind::Line2D, {a, b, -(a * mx + b * my)});
    const auto got = refit_least_squares(ModelKind::Line2D, d);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(got.params()[i], want.params()[i], 1e-9);
  }
}

TEST(RefitProperty, NoWorseThanAnyMinimalSubsetFit) {
  Rng rng(8);
  for (int t = 0; t < 30; ++t) {
    DataSet d(2);
    for (int i = 0; i < 12; ++i) {
      const double x = rng.uniform(0, 10);
      d.push_back({x, 0.5 * x + 1 + rng.normal(0, 0.2)});
    }
    auto sse = [&](const ModelHypothesis& h) {
      double s = 0;
      for (double r : compute_residuals(h, d)) s += r * r;
      return s;
    };
    const double best = sse(refit_least_squares(ModelKind::Line2D, d));
    for (std::size_t i = 0; i < d.size(); ++i)
      for (std::size_t j = i + 1; j < d.size(); ++j) {
        const std::vector<std::size_t> idx = {i, j};
        const auto h = try_fit_minimal(ModelKind::Line2D, d.subset(idx));
        if (h) {
          EXPECT_LE(best, sse(*h) + 1e-12);
        }
      }
  }
}

TEST(RefitProperty, CircleRefitBeatsMinimalFits) {
  Rng rng(9);
  DataSet d(2);
  for (int i = 0; i < 40; ++i) {
    const double a = rng.uniform(0, 2 * std::numbers::pi), r = 5 + rng.normal(0, 0.1);
    d.push_back({2 + r * std::cos(a), -1 + r * std::sin(a)});
  }
  auto sse = [&](const ModelHypothesis& h) {
    double s = 0;
    for (double r : compute_residuals(h, d)) s += r * r;
    return s;
  };
  const double best = sse(refit_least_squares(ModelKind::Circle2D, d));
  for (int t = 0; t < 200; ++t) {
    std::vector<std::size_t> idx = {rng.below(40), rng.below(40), rng.below(40)};
    if (idx[0] == idx[1] || idx[1] == idx[2] || idx[0] == idx[2]) continue;
    const auto h = try_fit_minimal(ModelKind::Circle2D, d.subset(idx));
    if (h) {
      EXPECT_LE(best, sse(*h) + 1e-12);
    }
  }
}
