#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "hf/errors.hpp"
#include "hf/geometry.hpp"
#include "hf/scale.hpp"

namespace hf {

/// One model hypothesis together with the vertices (data indices) it claims.
struct Hyperedge {
  ModelHypothesis hypothesis;
  std::vector<std::size_t> vertices;  // sorted, unique
  ScaleEstimate scale;
  double weight = 0.0;

  std::size_t degree() const noexcept { return vertices.size(); }
};

/// Vertex set {0..n_vertices-1} plus weighted hyperedges. Equivalent to the
/// n x m incidence matrix H (h(v,e) = 1 iff v in e) with weights W.
struct Hypergraph {
  std::size_t n_vertices = 0;
  std::vector<Hyperedge> edges;

  /// d(v) = sum_e w(e) h(v, e)
  std::vector<double> vertex_degrees() const {
    std::vector<double> d(n_vertices, 0.0);
    for (const auto& e : edges)
      for (std::size_t v : e.vertices) d[v] += e.weight;
    return d;
  }
};

// ---------------------------------------------------------------------------
// Weighting
// ---------------------------------------------------------------------------

/// Epanechnikov kernel.
inline double epanechnikov(double lambda) {
  return std::abs(lambda) <= 1.0 ? 0.75 * (1.0 - lambda * lambda) : 0.0;
}

/// Integral of KM^2 over [-1, 1].
inline constexpr double kEpanechnikovSquareIntegral = 0.6;
/// Integral of lambda^2 KM over [-1, 1].
inline constexpr double kEpanechnikovSecondMoment = 0.2;

/// Bandwidth over scale, [243 R(K) / (35 n mu2(K))]^0.2 = (145.8 / 7n)^0.2.
inline double bandwidth_factor(std::size_t n) {
  return std::pow(243.0 * kEpanechnikovSquareIntegral /
                      (35.0 * static_cast<double>(n) * kEpanechnikovSecondMoment),
                  0.2);
}

/// Kernel density weight of a hypothesis over all n residuals:
/// w = (1/n) sum_j KM(r_j / h) / (sigma h), h = bandwidth_factor(n) sigma.
inline double weight_hyperedge(std::span<const double> residuals, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw Error(ErrorCode::InvalidScale, "scale must be positive");
  const std::size_t n = residuals.size();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "no residuals");
  const double bandwidth = bandwidth_factor(n) * sigma;
  double sum = 0.0;
  for (double r : residuals) sum += epanechnikov(r / bandwidth);
  return sum / (static_cast<double>(n) * sigma * bandwidth);
}

// ---------------------------------------------------------------------------
// Expansion
// ---------------------------------------------------------------------------

struct ExpansionOptions {
  IkoseOptions ikose;  // ikose.theta is the inlier threshold factor
};

/// Expands a hypothesis to every vertex whose residual is below theta * sigma,
/// sigma from IKOSE over all residuals. Weight is left at zero.
inline Hyperedge expand_hyperedge(const ModelHypothesis& h, std::span<const double> residuals,
                                  const ExpansionOptions& opt) {
  if (residuals.empty()) throw Error(ErrorCode::InvalidArgument, "empty data set");
  if (!(opt.ikose.theta > 0.0)) throw Error(ErrorCode::InvalidArgument, "theta must be positive");
  Hyperedge e;
  e.hypothesis = h;
  e.scale = ikose(residuals, opt.ikose);
  const double threshold = opt.ikose.theta * e.scale.sigma;
  for (std::size_t v = 0; v < residuals.size(); ++v)
    if (residuals[v] < threshold) e.vertices.push_back(v);
  if (e.vertices.size() < minimal_subset_size(h.kind())) {
    throw Error(ErrorCode::DiscardTooSmall, "hyperedge smaller than the minimal subset");
  }
  return e;
}

inline Hyperedge expand_hyperedge(const ModelHypothesis& h, const DataSet& data, const ExpansionOptions& opt) {
  if (data.empty()) throw Error(ErrorCode::InvalidArgument, "empty data set");
  const auto r = compute_residuals(h, data);
  return expand_hyperedge(h, r, opt);
}

// ---------------------------------------------------------------------------
// Pruning
// ---------------------------------------------------------------------------

struct PruneResult {
  std::vector<std::size_t> selected;  // ascending
  double entropy = 0.0;               // L, natural log
  bool all_equal = false;             // every gap zero: everything retained
};

/// Entropy-threshold selection of significant hyperedges.
///
/// gap_i = max(w) - w_i, p_i = gap_i / sum(gap), L = -sum p log p, and
/// i is kept iff L + log p_i < 0. Zero-probability entries (the maximum)
/// are always kept.
inline PruneResult prune(std::span<const double> weights) {
  if (weights.empty()) throw Error(ErrorCode::InvalidArgument, "prune needs at least one weight");
  double max_w = -std::numeric_limits<double>::infinity();
  for (double w : weights) {
    if (!std::isfinite(w)) throw Error(ErrorCode::NonFinite, "non-finite hyperedge weight");
    max_w = std::max(max_w, w);
  }
  std::vector<double> gap(weights.size());
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    gap[i] = max_w - weights[i];
    total += gap[i];
  }

  PruneResult out;
  if (!(total > 0.0)) {
    out.all_equal = true;
    out.selected.resize(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) out.selected[i] = i;
    return out;
  }
  double entropy = 0.0;
  for (double g : gap) {
    if (g > 0.0) {
      const double p = g / total;
      entropy -= p * std::log(p);
    }
  }
  out.entropy = entropy;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (gap[i] == 0.0 || entropy + std::log(gap[i] / total) < 0.0) out.selected.push_back(i);
  }
  return out;
}

struct OrphanRemoval {
  Hypergraph graph;
  /// old vertex -> new vertex, or npos for removed vertices.
  std::vector<std::size_t> remap;
  /// new vertex -> old vertex.
  std::vector<std::size_t> kept;

  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
};

/// Keeps the selected hyperedges and drops vertices no kept hyperedge touches.
inline OrphanRemoval remove_orphans(const Hypergraph& g, std::span<const std::size_t> selected) {
  if (selected.empty()) throw Error(ErrorCode::EmptyGraph, "no hyperedge survived pruning");
  OrphanRemoval out;
  std::vector<char> used(g.n_vertices, 0);
  for (std::size_t idx : selected) {
    if (idx >= g.edges.size()) throw Error(ErrorCode::InvalidArgument, "selected hyperedge index out of range");
    for (std::size_t v : g.edges[idx].vertices) used[v] = 1;
  }
  out.remap.assign(g.n_vertices, OrphanRemoval::npos);
  for (std::size_t v = 0; v < g.n_vertices; ++v) {
    if (used[v]) {
      out.remap[v] = out.kept.size();
      out.kept.push_back(v);
    }
  }
  out.graph.n_vertices = out.kept.size();
  out.graph.edges.reserve(selected.size());
  for (std::size_t idx : selected) {
    Hyperedge e = g.edges[idx];
    for (std::size_t& v : e.vertices) v = out.remap[v];
    out.graph.edges.push_back(std::move(e));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Debug text format: one line per hyperedge, "edge_id: v1 v2 ... vk weight"
// ---------------------------------------------------------------------------

inline std::string to_text(const Hypergraph& g) {
  std::ostringstream os;
  char buf[32];
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    os << i << ':';
    for (std::size_t v : g.edges[i].vertices) os << ' ' << v;
    std::snprintf(buf, sizeof buf, "%.17g", g.edges[i].weight);
    os << ' ' << buf << '\n';
  }
  return os.str();
}

/// Parses the debug format. Hypotheses are not part of the format and are
/// left default-constructed; n_vertices is one past the largest index seen
/// unless a larger value is passed.
inline Hypergraph hypergraph_from_text(const std::string& text, std::size_t n_vertices = 0) {
  Hypergraph g;
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": missing ':'");
    }
    std::istringstream fields(line.substr(colon + 1));
    std::vector<std::string> tokens;
    for (std::string tok; fields >> tok;) tokens.push_back(tok);
    if (tokens.empty()) throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": missing weight");
    Hyperedge e;
    try {
      e.weight = std::stod(tokens.back());
      for (std::size_t t = 0; t + 1 < tokens.size(); ++t) e.vertices.push_back(std::stoul(tokens[t]));
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": bad number");
    }
    std::sort(e.vertices.begin(), e.vertices.end());
    e.vertices.erase(std::unique(e.vertices.begin(), e.vertices.end()), e.vertices.end());
    for (std::size_t v : e.vertices) n_vertices = std::max(n_vertices, v + 1);
    g.edges.push_back(std::move(e));
  }
  g.n_vertices = n_vertices;
  return g;
}

}  // namespace hf
