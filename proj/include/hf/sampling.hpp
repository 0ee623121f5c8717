#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "hf/errors.hpp"
#include "hf/geometry.hpp"
#include "hf/parallel.hpp"
#include "hf/random.hpp"

namespace hf {

enum class SamplerStrategy { Uniform, Proximity };

struct SamplerConfig {
  SamplerStrategy strategy = SamplerStrategy::Proximity;
  std::size_t num_hypotheses = 5000;
  /// Proximity kernel width in data units; 0 selects 10% of the bounding-box
  /// diagonal of the (first-view) data.
  double proximity_sigma = 0.0;
  std::uint64_t rng_seed = 0;
};

using IndexSubset = std::vector<std::size_t>;

/// Bounding-box diagonal of the first two coordinates.
inline double bounding_box_diagonal(const DataSet& data) {
  if (data.empty()) return 0.0;
  double lo_x = data.point(0)[0], hi_x = lo_x, lo_y = data.point(0)[1], hi_y = lo_y;
  for (std::size_t i = 1; i < data.size(); ++i) {
    auto p = data.point(i);
    lo_x = std::min(lo_x, p[0]);
    hi_x = std::max(hi_x, p[0]);
    lo_y = std::min(lo_y, p[1]);
    hi_y = std::max(hi_y, p[1]);
  }
  return std::hypot(hi_x - lo_x, hi_y - lo_y);
}

inline double default_proximity_sigma(const DataSet& data) { return 0.1 * bounding_box_diagonal(data); }

/// Draws cfg.num_hypotheses minimal subsets of distinct indices.
///
/// Proximity sampling: the first index is uniform, each following index j is
/// drawn with probability proportional to exp(-|x_j - x_prev|^2 / sigma^2)
/// among unchosen indices, distances taken in the first view.
inline std::vector<IndexSubset> sample_subsets(const DataSet& data, ModelKind kind, const SamplerConfig& cfg) {
  const std::size_t k = minimal_subset_size(kind);
  const std::size_t n = data.size();
  if (n < k) throw Error(ErrorCode::InsufficientData, "fewer data points than the minimal subset size");
  if (cfg.num_hypotheses == 0) throw Error(ErrorCode::InvalidArgument, "num_hypotheses must be positive");

  double sigma = cfg.proximity_sigma;
  if (cfg.strategy == SamplerStrategy::Proximity) {
    if (sigma < 0.0) throw Error(ErrorCode::InvalidArgument, "proximity_sigma must be positive");
    if (sigma == 0.0) sigma = default_proximity_sigma(data);
    if (!(sigma > 0.0)) sigma = 1.0;  // all points coincide in the first view
  }
  const double inv_sigma2 = 1.0 / (sigma * sigma);

  Rng rng(cfg.rng_seed);
  std::vector<IndexSubset> subsets;
  subsets.reserve(cfg.num_hypotheses);
  std::vector<double> weights(n);
  std::vector<char> taken(n, 0);

  for (std::size_t s = 0; s < cfg.num_hypotheses; ++s) {
    IndexSubset subset;
    subset.reserve(k);
    if (cfg.strategy == SamplerStrategy::Uniform) {
      while (subset.size() < k) {
        const auto idx = static_cast<std::size_t>(rng.below(n));
        if (std::find(subset.begin(), subset.end(), idx) == subset.end()) subset.push_back(idx);
      }
    } else {
      subset.push_back(static_cast<std::size_t>(rng.below(n)));
      taken[subset.back()] = 1;
      while (subset.size() < k) {
        auto prev = data.point(subset.back());
        double total = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          if (taken[j]) {
            weights[j] = 0.0;
            continue;
          }
          auto q = data.point(j);
          const double dx = q[0] - prev[0], dy = q[1] - prev[1];
          weights[j] = std::exp(-(dx * dx + dy * dy) * inv_sigma2);
          total += weights[j];
        }
        std::size_t pick = n;
        if (total > 0.0) {
          double target = rng.uniform() * total;
          for (std::size_t j = 0; j < n; ++j) {
            if (taken[j]) continue;
            pick = j;
            target -= weights[j];
            if (target < 0.0) break;
          }
        } else {
          // Every candidate underflowed: fall back to uniform over the rest.
          std::size_t remaining = n - subset.size();
          std::size_t r = static_cast<std::size_t>(rng.below(remaining));
          for (std::size_t j = 0; j < n; ++j) {
            if (taken[j]) continue;
            if (r-- == 0) {
              pick = j;
              break;
            }
          }
        }
        subset.push_back(pick);
        taken[pick] = 1;
      }
      for (std::size_t idx : subset) taken[idx] = 0;
    }
    subsets.push_back(std::move(subset));
  }
  return subsets;
}

struct HypothesisSet {
  std::vector<ModelHypothesis> hypotheses;
  /// Index into the subset list that produced each hypothesis.
  std::vector<std::size_t> source_subset;
  std::size_t skipped_degenerate = 0;
};

/// Fits one hypothesis per nondegenerate subset, preserving subset order.
inline HypothesisSet generate_hypotheses(const DataSet& data, ModelKind kind, const std::vector<IndexSubset>& subsets,
                                         unsigned threads = 1) {
  std::vector<std::optional<ModelHypothesis>> slots(subsets.size());
  parallel_for(subsets.size(), threads, [&](std::size_t i) {
    slots[i] = try_fit_minimal(kind, data.subset(subsets[i]));
  });
  HypothesisSet out;
  out.hypotheses.reserve(subsets.size());
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i]) {
      out.hypotheses.push_back(*slots[i]);
      out.source_subset.push_back(i);
    } else {
      ++out.skipped_degenerate;
    }
  }
  return out;
}

}  // namespace hf
