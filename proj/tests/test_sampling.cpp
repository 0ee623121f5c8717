#include <cmath>
#include <map>
#include <random>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "hf/bench/synthetic.hpp"
#include "hf/random.hpp"
#include "hf/sampling.hpp"

using namespace hf;

namespace {

DataSet two_clusters(double radius, std::uint64_t seed) {
  Rng rng(seed);
  DataSet d(2);
  for (double cx : {0.0, 100.0})
    for (int i = 0; i < 50; ++i) {
      const double a = rng.uniform(0, 2 * M_PI), r = radius * std::sqrt(rng.uniform());
      d.push_back({cx + r * std::cos(a), r * std::sin(a)});
    }
  return d;
}

bool same_cluster(const IndexSubset& s) { return (s[0] < 50) == (s[1] < 50); }

/// Straightforward reference sampler on a separate generator: uniform first
/// index, then a discrete distribution over the remaining points.
double reference_same_cluster_fraction(const DataSet& d, double sigma, int m, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_int_distribution<std::size_t> first(0, d.size() - 1);
  int same = 0;
  for (int t = 0; t < m; ++t) {
    const std::size_t a = first(gen);
    std::vector<double> w(d.size());
    for (std::size_t j = 0; j < d.size(); ++j) {
      const double dx = d.point(j)[0] - d.point(a)[0], dy = d.point(j)[1] - d.point(a)[1];
      w[j] = j == a ? 0.0 : std::exp(-(dx * dx + dy * dy) / (sigma * sigma));
    }
    std::discrete_distribution<std::size_t> next(w.begin(), w.end());
    const std::size_t b = next(gen);
    same += (a < 50) == (b < 50);
  }
  return static_cast<double>(same) / m;
}

}  // namespace

TEST(SampleSubsetsTest, OnlyOneChoice) {
  DataSet d(2, {0, 0, 1, 1});
  SamplerConfig cfg;
  cfg.strategy = SamplerStrategy::Uniform;
  cfg.num_hypotheses = 1;
  const auto s = sample_subsets(d, ModelKind::Line2D, cfg);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(std::set<std::size_t>(s[0].begin(), s[0].end()), (std::set<std::size_t>{0, 1}));
}

TEST(SampleSubsetsTest, DeterministicPerSeed) {
  const DataSet d = two_clusters(5.0, 1);
  for (auto strategy : {SamplerStrategy::Uniform, SamplerStrategy::Proximity}) {
    SamplerConfig cfg;
    cfg.strategy = strategy;
    cfg.num_hypotheses = 200;
    cfg.rng_seed = 99;
    EXPECT_EQ(sample_subsets(d, ModelKind::Circle2D, cfg), sample_subsets(d, ModelKind::Circle2D, cfg));
    auto other = cfg;
    other.rng_seed = 100;
    EXPECT_NE(sample_subsets(d, ModelKind::Circle2D, cfg), sample_subsets(d, ModelKind::Circle2D, other));
  }
}

TEST(SampleSubsetsTest, SizesAndDistinctIndices) {
  const DataSet d = two_clusters(5.0, 2);
  for (auto kind : {ModelKind::Line2D, ModelKind::Circle2D}) {
    for (auto strategy : {SamplerStrategy::Uniform, SamplerStrategy::Proximity}) {
      SamplerConfig cfg;
      cfg.strategy = strategy;
      cfg.num_hypotheses = 500;
      const auto subsets = sample_subsets(d, kind, cfg);
      ASSERT_EQ(subsets.size(), 500u);
      for (const auto& s : subsets) {
        ASSERT_EQ(s.size(), minimal_subset_size(kind));
        EXPECT_EQ(std::set<std::size_t>(s.begin(), s.end()).size(), s.size());
        for (std::size_t i : s) EXPECT_LT(i, d.size());
      }
    }
  }
  // 8 distinct indices out of exactly 8 correspondences
  DataSet c(4);
  for (int i = 0; i < 8; ++i) c.push_back({double(i), 0.0, 0.0, double(i)});
  SamplerConfig cfg;
  cfg.num_hypotheses = 10;
  for (const auto& s : sample_subsets(c, ModelKind::Fundamental, cfg))
    EXPECT_EQ(std::set<std::size_t>(s.begin(), s.end()).size(), 8u);
}

TEST(SampleSubsetsTest, Errors) {
  DataSet d(2, {0, 0});
  try {
    sample_subsets(d, ModelKind::Line2D, SamplerConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientData);
  }
  DataSet d2(2, {0, 0, 1, 1});
  SamplerConfig zero;
  zero.num_hypotheses = 0;
  EXPECT_THROW(sample_subsets(d2, ModelKind::Line2D, zero), Error);
  SamplerConfig neg;
  neg.proximity_sigma = -1.0;
  EXPECT_THROW(sample_subsets(d2, ModelKind::Line2D, neg), Error);
}

TEST(SampleSubsetsTest, ProximityPrefersTheSameCluster) {
  const double radius = 5.0;
  const DataSet d = two_clusters(radius, 3);
  SamplerConfig cfg;
  cfg.strategy = SamplerStrategy::Proximity;
  cfg.num_hypotheses = 1000;
  cfg.proximity_sigma = radius / 2;
  cfg.rng_seed = 12;
  const auto subsets = sample_subsets(d, ModelKind::Line2D, cfg);
  double same = 0;
  for (const auto& s : subsets) same += same_cluster(s);
  const double ours = same / 1000.0;
  const double ref = reference_same_cluster_fraction(d, radius / 2, 1000, 12);
  EXPECT_GT(ours, 0.9);
  EXPECT_GT(ref, 0.9);
  EXPECT_NEAR(ours, ref, 0.03);

  cfg.strategy = SamplerStrategy::Uniform;
  same = 0;
  for (const auto& s : sample_subsets(d, ModelKind::Line2D, cfg)) same += same_cluster(s);
  EXPECT_NEAR(same / 1000.0, 49.0 / 99.0, 0.06);
}

TEST(SampleSubsetsTest, ProximityPairFrequenciesMatchTheKernel) {
  // five points; exact pair probabilities from the kernel, compared with counts
  DataSet d(2, {0, 0, 1, 0, 3, 0, 0, 2, 5, 5});
  const double sigma = 2.0;
  const std::size_t n = d.size();
  std::map<std::pair<std::size_t, std::size_t>, double> expected;
  for (std::size_t a = 0; a < n; ++a) {
    double total = 0;
    std::vector<double> w(n, 0.0);
    for (std::size_t b = 0; b < n; ++b) {
      if (b == a) continue;
      const double dx = d.point(a)[0] - d.point(b)[0], dy = d.point(a)[1] - d.point(b)[1];
      w[b] = std::exp(-(dx * dx + dy * dy) / (sigma * sigma));
      total += w[b];
    }
    for (std::size_t b = 0; b < n; ++b)
      if (b != a) expected[{a, b}] = w[b] / total / static_cast<double>(n);
  }
  SamplerConfig cfg;
  cfg.strategy = SamplerStrategy::Proximity;
  cfg.proximity_sigma = sigma;
  cfg.num_hypotheses = 200000;
  cfg.rng_seed = 4;
  std::map<std::pair<std::size_t, std::size_t>, double> seen;
  for (const auto& s : sample_subsets(d, ModelKind::Line2D, cfg)) seen[{s[0], s[1]}] += 1.0 / 200000.0;
  for (const auto& [pair, p] : expected) {
    const double sd = std::sqrt(p * (1 - p) / 200000.0);
    EXPECT_NEAR(seen[pair], p, 5 * sd + 1e-9) << pair.first << "," << pair.second;
  }
}

TEST(SampleSubsetsTest, ProximityDistanceUsesTheFirstView) {
  // second-view coordinates are wildly spread; first view holds two tight clusters
  Rng rng(5);
  DataSet d(4);
  for (int i = 0; i < 100; ++i) {
    const double cx = i < 50 ? 0.0 : 1000.0;
    d.push_back({cx + rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0, 1000), rng.uniform(0, 1000)});
  }
  SamplerConfig cfg;
  cfg.proximity_sigma = 5.0;
  cfg.num_hypotheses = 300;
  for (const auto& s : sample_subsets(d, ModelKind::Homography, cfg)) {
    for (std::size_t i : s) EXPECT_EQ(i < 50, s[0] < 50);
  }
}

TEST(SampleSubsetsTest, DefaultSigmaIsATenthOfTheDiagonal) {
  DataSet d(2, {0, 0, 30, 40, 10, 10});
  EXPECT_DOUBLE_EQ(bounding_box_diagonal(d), 50.0);
  EXPECT_DOUBLE_EQ(default_proximity_sigma(d), 5.0);
}

TEST(GenerateHypothesesTest, Examples) {
  DataSet d(2, {0, 0, 1, 1});
  const auto out = generate_hypotheses(d, ModelKind::Line2D, {{0, 1}});
  ASSERT_EQ(out.hypotheses.size(), 1u);
  EXPECT_NEAR(out.hypotheses[0].params()[0], 1 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(out.hypotheses[0].params()[1], -1 / std::sqrt(2.0), 1e-15);

  DataSet c(2, {0, 0, 1, 1, 1, 1, 2, 0});
  const auto skipped = generate_hypotheses(c, ModelKind::Line2D, {{0, 1}, {1, 2}, {2, 3}});
  EXPECT_EQ(skipped.hypotheses.size(), 2u);
  EXPECT_EQ(skipped.skipped_degenerate, 1u);
  EXPECT_EQ(skipped.source_subset, (std::vector<std::size_t>{0, 2}));
}

TEST(GenerateHypothesesTest, ThreadCountDoesNotChangeTheOutput) {
  const auto truth = bench::generate(bench::preset("lines3", 1));
  SamplerConfig cfg;
  cfg.num_hypotheses = 400;
  const auto subsets = sample_subsets(truth.data, ModelKind::Line2D, cfg);
  const auto a = generate_hypotheses(truth.data, ModelKind::Line2D, subsets, 1);
  const auto b = generate_hypotheses(truth.data, ModelKind::Line2D, subsets, 4);
  EXPECT_EQ(a.hypotheses, b.hypotheses);
  EXPECT_EQ(a.source_subset, b.source_subset);
}

TEST(GenerateHypothesesTest, ThreeLineDatasetRarelyDegenerates) {
  const auto truth = bench::generate(bench::preset("lines3", 7));
  SamplerConfig cfg;
  cfg.num_hypotheses = 5000;
  cfg.rng_seed = 7;
  const auto subsets = sample_subsets(truth.data, ModelKind::Line2D, cfg);
  std::size_t coincident = 0;
  for (const auto& s : subsets) {
    auto p = truth.data.point(s[0]), q = truth.data.point(s[1]);
    coincident += p[0] == q[0] && p[1] == q[1];
  }
  const auto out = generate_hypotheses(truth.data, ModelKind::Line2D, subsets);
  EXPECT_GE(out.hypotheses.size(), 4900u);
  EXPECT_EQ(out.skipped_degenerate, coincident);
}

TEST(GenerateHypothesesProperty, EveryHypothesisInterpolatesItsSubset) {
  const auto truth = bench::generate(bench::preset("lines4", 3));
  SamplerConfig cfg;
  cfg.num_hypotheses = 2000;
  const auto subsets = sample_subsets(truth.data, ModelKind::Circle2D, cfg);
  const auto out = generate_hypotheses(truth.data, ModelKind::Circle2D, subsets);
  for (std::size_t i = 0; i < out.hypotheses.size(); ++i) {
    const auto& h = out.hypotheses[i];
    for (std::size_t idx : subsets[out.source_subset[i]]) {
      // circumcircles of nearly collinear triples are huge; tolerance relative to the radius
      EXPECT_LT(residual(h, truth.data.point(idx)), 1e-9 * std::max(1.0, h.params()[2]));
    }
  }
}
