#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "hf/errors.hpp"

namespace hf {

/// Standard normal quantile. Acklam's rational approximation followed by one
/// Halley step against erfc, giving |Phi(z) - p| at the double precision floor.
inline double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::DomainError, "inverse_normal_cdf needs p in (0, 1)");

  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // Halley refinement.
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  x = x - u / (1.0 + 0.5 * x * u);
  return x;
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

struct ScaleEstimate {
  double sigma = 0.0;
  std::size_t inlier_count_estimate = 0;
  bool converged = false;
  std::size_t iterations = 0;
};

struct IkoseOptions {
  std::size_t k = 10;
  std::size_t max_iter = 100;
  double tol = 1e-6;
  /// Inlier threshold factor; shared with hyperedge expansion.
  double theta = 2.5;
  /// Lower bound on the returned scale so exact fits keep a positive band.
  /// Zero disables the floor (and exact scale equivariance holds).
  double min_sigma = 0.0;
};

namespace detail {

inline double kose(double kth_residual, std::size_t k, std::size_t n_inliers) {
  const double kappa = static_cast<double>(k) / static_cast<double>(n_inliers);
  return kth_residual / inverse_normal_cdf(0.5 * (1.0 + kappa));
}

inline std::size_t count_below(std::span<const double> r, double t) {
  std::size_t c = 0;
  for (double x : r) c += (x < t) ? 1 : 0;
  return c;
}

}  // namespace detail

/// Iterative K-th ordered scale estimator.
///
/// sigma = r_(K) / Phi^-1((1 + K/n~) / 2), with n~ starting at the number of
/// residuals and re-estimated as #{r < theta * sigma} until sigma settles.
/// Throws NotEnoughInliers once n~ drops to K or below (the quantile is then
/// undefined).
inline ScaleEstimate ikose(std::span<const double> residuals, const IkoseOptions& opt) {
  const std::size_t n = residuals.size();
  if (opt.k == 0 || opt.k > n) throw Error(ErrorCode::InvalidArgument, "IKOSE needs 1 <= K <= number of residuals");
  if (opt.max_iter == 0 || !(opt.tol > 0.0) || !(opt.theta > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "IKOSE needs positive max_iter, tol and theta");
  }

  std::vector<double> work(residuals.begin(), residuals.end());
  for (double& r : work) {
    if (!std::isfinite(r) && !std::isinf(r)) throw Error(ErrorCode::NonFinite, "NaN residual");
    r = std::abs(r);
  }
  std::nth_element(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(opt.k - 1), work.end());
  const double kth = work[opt.k - 1];
  if (!std::isfinite(kth)) throw Error(ErrorCode::NotEnoughInliers, "fewer than K finite residuals");

  ScaleEstimate est;
  std::size_t n_inliers = n;
  if (n_inliers <= opt.k) throw Error(ErrorCode::NotEnoughInliers, "inlier count does not exceed K");
  double sigma = std::max(detail::kose(kth, opt.k, n_inliers), opt.min_sigma);

  for (std::size_t iter = 1; iter <= opt.max_iter; ++iter) {
    est.iterations = iter;
    n_inliers = detail::count_below(residuals, opt.theta * sigma);
    if (n_inliers <= opt.k) throw Error(ErrorCode::NotEnoughInliers, "estimated inlier count fell to K");
    const double next = std::max(detail::kose(kth, opt.k, n_inliers), opt.min_sigma);
    const double change = std::abs(next - sigma);
    sigma = next;
    if (change < opt.tol * sigma) {
      est.converged = true;
      break;
    }
  }
  if (!(sigma > 0.0)) throw Error(ErrorCode::NotEnoughInliers, "K-th ordered residual is zero");
  est.sigma = sigma;
  est.inlier_count_estimate = n_inliers;
  return est;
}

/// One KOSE step at a fixed inlier count (the non-iterative base estimator).
inline double kose_step(std::span<const double> residuals, std::size_t k, std::size_t n_inliers) {
  if (k == 0 || k > residuals.size()) throw Error(ErrorCode::InvalidArgument, "KOSE needs 1 <= K <= n");
  if (n_inliers <= k) throw Error(ErrorCode::NotEnoughInliers, "inlier count does not exceed K");
  std::vector<double> work(residuals.begin(), residuals.end());
  for (double& r : work) r = std::abs(r);
  std::nth_element(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(k - 1), work.end());
  return detail::kose(work[k - 1], k, n_inliers);
}

}  // namespace hf
