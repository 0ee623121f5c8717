#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "hf/errors.hpp"
#include "hf/geometry.hpp"
#include "hf/hypergraph.hpp"
#include "hf/parallel.hpp"
#include "hf/partition.hpp"
#include "hf/sampling.hpp"
#include "hf/scale.hpp"

namespace hf {

struct FitConfig {
  ModelKind kind = ModelKind::Line2D;
  SamplerConfig sampler;
  std::size_t k_order = 10;        // IKOSE K
  std::size_t max_structures = 10;  // C
  double theta = 2.5;
  double dedup_overlap = 0.8;
  bool refit = false;

  std::size_t ikose_max_iter = 100;
  double ikose_tol = 1e-6;
  double count_rel_tol = 0.02;
  /// User-specified structure count replacing the estimate (debug; 0 = off).
  std::size_t forced_k = 0;
  /// Worker threads for the per-hypothesis stages (0 = hardware concurrency).
  unsigned threads = 1;
};

struct FittedStructure {
  ModelHypothesis hypothesis;
  double weight = 0.0;
  double sigma = 0.0;
  std::vector<std::size_t> inliers;  // ascending point indices
};

struct StageTimings {
  double sampling_s = 0.0;
  double expansion_s = 0.0;
  double pruning_s = 0.0;
  double partition_s = 0.0;
  double selection_s = 0.0;
  double total_s = 0.0;
};

struct FitDiagnostics {
  std::size_t n_points = 0;
  std::size_t subsets_sampled = 0;
  std::size_t degenerate_subsets = 0;
  std::size_t hypotheses = 0;
  std::size_t discarded_not_enough_inliers = 0;
  std::size_t discarded_too_small = 0;
  std::size_t hyperedges = 0;
  std::size_t hyperedges_after_prune = 0;
  std::size_t vertices_after_prune = 0;
  std::size_t k0 = 0;
  std::size_t k_selected = 0;
  bool single_structure = false;
  std::vector<double> alignment_costs;
  std::vector<double> eigenvalues;
  std::size_t empty_subhypergraphs = 0;
  std::size_t duplicates_removed = 0;
  std::size_t undersized_structures_removed = 0;
  StageTimings timings;
};

struct FitResult {
  ModelKind kind = ModelKind::Line2D;
  std::vector<FittedStructure> structures;  // descending weight
  std::vector<int> labels;                  // 0 = outlier, s >= 1 = structure s
  FitDiagnostics diagnostics;
};

// ---------------------------------------------------------------------------
// Representative selection and deduplication
// ---------------------------------------------------------------------------

/// Index (into `members`) of the highest-weight hyperedge; ties go to the
/// larger degree, then to the lower position.
inline std::size_t select_representative(std::span<const Hyperedge* const> members) {
  if (members.empty()) throw Error(ErrorCode::EmptySubHypergraph, "sub-hypergraph has no hyperedge");
  std::size_t best = 0;
  for (std::size_t i = 1; i < members.size(); ++i) {
    const Hyperedge& a = *members[i];
    const Hyperedge& b = *members[best];
    if (a.weight > b.weight || (a.weight == b.weight && a.degree() > b.degree())) best = i;
  }
  return best;
}

inline std::size_t select_representative(std::span<const Hyperedge> members) {
  std::vector<const Hyperedge*> ptrs;
  ptrs.reserve(members.size());
  for (const auto& e : members) ptrs.push_back(&e);
  return select_representative(std::span<const Hyperedge* const>(ptrs));
}

/// |A n B| / min(|A|, |B|) over sorted vertex lists.
inline double overlap_score(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  if (a.empty() || b.empty()) return 0.0;
  std::size_t common = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++common;
      ++ia;
      ++ib;
    }
  }
  return static_cast<double>(common) / static_cast<double>(std::min(a.size(), b.size()));
}

/// Drops the lower-weight member of every pair whose overlap score exceeds
/// `max_overlap`, visiting in descending weight (ties: larger degree first).
/// Result is ordered by descending weight.
inline std::vector<Hyperedge> eliminate_duplicates(std::vector<Hyperedge> reps, double max_overlap) {
  if (reps.empty()) throw Error(ErrorCode::InvalidArgument, "no representatives to deduplicate");
  if (!(max_overlap > 0.0 && max_overlap <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "dedup_overlap must lie in (0, 1]");
  }
  std::stable_sort(reps.begin(), reps.end(), [](const Hyperedge& a, const Hyperedge& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    return a.degree() > b.degree();
  });
  std::vector<Hyperedge> kept;
  for (auto& e : reps) {
    bool duplicate = false;
    for (const auto& k : kept) {
      if (overlap_score(e.vertices, k.vertices) > max_overlap) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) kept.push_back(std::move(e));
  }
  return kept;
}

// ---------------------------------------------------------------------------
// Full fit
// ---------------------------------------------------------------------------

namespace detail {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - start_).count();
    start_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

struct Expanded {
  std::optional<Hyperedge> edge;
  ErrorCode failure = ErrorCode::NotEnoughInliers;
};

/// Assigns final labels: each point goes to the claiming structure with the
/// smallest r / sigma; structures left with fewer than the minimal subset
/// are dropped and their points re-resolved.
inline void resolve_labels(const DataSet& data, ModelKind kind, std::vector<FittedStructure>& structures,
                           std::vector<int>& labels, std::size_t& removed) {
  const std::size_t n = data.size();
  for (;;) {
    labels.assign(n, 0);
    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    for (std::size_t s = 0; s < structures.size(); ++s) {
      const ResidualFunction f(structures[s].hypothesis);
      for (std::size_t v : structures[s].inliers) {
        const double score = f(data.point(v)) / structures[s].sigma;
        if (score < best[v]) {
          best[v] = score;
          labels[v] = static_cast<int>(s) + 1;
        }
      }
    }
    std::vector<std::size_t> counts(structures.size() + 1, 0);
    for (int l : labels) ++counts[static_cast<std::size_t>(l)];
    std::vector<FittedStructure> survivors;
    for (std::size_t s = 0; s < structures.size(); ++s) {
      if (counts[s + 1] >= minimal_subset_size(kind)) survivors.push_back(std::move(structures[s]));
    }
    if (survivors.size() == structures.size()) break;
    removed += structures.size() - survivors.size();
    structures = std::move(survivors);
  }
  for (auto& s : structures) s.inliers.clear();
  for (std::size_t v = 0; v < n; ++v) {
    if (labels[v] > 0) structures[static_cast<std::size_t>(labels[v] - 1)].inliers.push_back(v);
  }
}

}  // namespace detail

/// Hypergraph fitting end to end: sample, expand and weight, prune, partition,
/// pick one representative per sub-hypergraph, drop duplicates, label points.
inline FitResult fit(const DataSet& data, const FitConfig& cfg) {
  const ModelKind kind = cfg.kind;
  const std::size_t n = data.size();
  if (data.dim() != point_dimension(kind)) {
    throw Error(ErrorCode::InvalidArgument, "data dimension does not match the model kind");
  }
  if (n < minimal_subset_size(kind)) throw Error(ErrorCode::InsufficientData, "too few data points");
  if (cfg.max_structures < 2) throw Error(ErrorCode::InvalidArgument, "C must be at least 2");
  if (cfg.k_order < 1) throw Error(ErrorCode::InvalidArgument, "K must be at least 1");
  if (!(cfg.theta > 0.0)) throw Error(ErrorCode::InvalidArgument, "theta must be positive");

  FitResult result;
  result.kind = kind;
  FitDiagnostics& diag = result.diagnostics;
  diag.n_points = n;
  detail::Stopwatch total, stage;

  // 1. Minimal subsets and potential hyperedges.
  const auto subsets = sample_subsets(data, kind, cfg.sampler);
  diag.subsets_sampled = subsets.size();
  diag.timings.sampling_s = stage.lap();
  const HypothesisSet hyps = generate_hypotheses(data, kind, subsets, cfg.threads);
  diag.degenerate_subsets = hyps.skipped_degenerate;
  diag.hypotheses = hyps.hypotheses.size();

  // 2. Expansion by IKOSE and kernel weighting.
  ExpansionOptions expand_opt;
  expand_opt.ikose.k = std::min(cfg.k_order, n);
  expand_opt.ikose.max_iter = cfg.ikose_max_iter;
  expand_opt.ikose.tol = cfg.ikose_tol;
  expand_opt.ikose.theta = cfg.theta;
  expand_opt.ikose.min_sigma = 1e-9 * std::max(1.0, bounding_box_diagonal(data));

  std::vector<detail::Expanded> expanded(hyps.hypotheses.size());
  parallel_for(hyps.hypotheses.size(), cfg.threads, [&](std::size_t i) {
    std::vector<double> r;
    compute_residuals(hyps.hypotheses[i], data, r);
    try {
      Hyperedge e = expand_hyperedge(hyps.hypotheses[i], r, expand_opt);
      e.weight = weight_hyperedge(r, e.scale.sigma);
      expanded[i].edge = std::move(e);
    } catch (const Error& err) {
      expanded[i].failure = err.code();
    }
  });
  Hypergraph graph;
  graph.n_vertices = n;
  for (auto& x : expanded) {
    if (x.edge) {
      graph.edges.push_back(std::move(*x.edge));
    } else if (x.failure == ErrorCode::DiscardTooSmall) {
      ++diag.discarded_too_small;
    } else {
      ++diag.discarded_not_enough_inliers;
    }
  }
  expanded.clear();
  diag.hyperedges = graph.edges.size();
  diag.timings.expansion_s = stage.lap();
  if (graph.edges.empty()) throw Error(ErrorCode::NoStructuresFound, "every hypothesis was discarded");

  // 3. Pruning.
  std::vector<double> weights(graph.edges.size());
  for (std::size_t i = 0; i < graph.edges.size(); ++i) weights[i] = graph.edges[i].weight;
  const PruneResult pruned = prune(weights);
  const OrphanRemoval reduced = remove_orphans(graph, pruned.selected);
  diag.hyperedges_after_prune = reduced.graph.edges.size();
  diag.vertices_after_prune = reduced.graph.n_vertices;
  diag.timings.pruning_s = stage.lap();

  // 4. Sub-hypergraph detection.
  PartitionOptions part_opt;
  part_opt.max_groups = cfg.max_structures;
  part_opt.count.rel_tol = cfg.count_rel_tol;
  part_opt.forced_k = cfg.forced_k;
  const PartitionResult part = partition(reduced.graph, part_opt);
  diag.k0 = part.k0;
  diag.k_selected = part.k_selected;
  diag.single_structure = part.single_structure;
  diag.alignment_costs = part.alignment_costs;
  diag.eigenvalues.assign(part.eigenvalues.data(), part.eigenvalues.data() + part.eigenvalues.size());
  diag.timings.partition_s = stage.lap();

  // 5. One representative per sub-hypergraph (hyperedges join the group
  //    holding the majority of their vertices, ties to the lower id).
  std::vector<std::vector<const Hyperedge*>> groups(part.k0 + 1);
  std::vector<std::size_t> group_of_edge(reduced.graph.edges.size());
  std::vector<std::size_t> votes(part.k0 + 1);
  for (std::size_t j = 0; j < reduced.graph.edges.size(); ++j) {
    std::fill(votes.begin(), votes.end(), 0);
    for (std::size_t v : reduced.graph.edges[j].vertices) ++votes[part.labels[v]];
    std::size_t owner = 1;
    for (std::size_t g = 2; g <= part.k0; ++g)
      if (votes[g] > votes[owner]) owner = g;
    group_of_edge[j] = owner;
  }
  // Representatives carry original point indices.
  std::vector<std::vector<std::size_t>> members(part.k0 + 1);
  for (std::size_t j = 0; j < group_of_edge.size(); ++j) members[group_of_edge[j]].push_back(pruned.selected[j]);
  std::vector<Hyperedge> reps;
  for (std::size_t g = 1; g <= part.k0; ++g) {
    if (members[g].empty()) {
      ++diag.empty_subhypergraphs;
      continue;
    }
    std::vector<const Hyperedge*> ptrs;
    ptrs.reserve(members[g].size());
    for (std::size_t idx : members[g]) ptrs.push_back(&graph.edges[idx]);
    reps.push_back(*ptrs[select_representative(std::span<const Hyperedge* const>(ptrs))]);
  }
  if (reps.empty()) throw Error(ErrorCode::NoStructuresFound, "every sub-hypergraph was empty");

  // 6. Duplicate elimination and labeling.
  const std::size_t before_dedup = reps.size();
  reps = eliminate_duplicates(std::move(reps), cfg.dedup_overlap);
  diag.duplicates_removed = before_dedup - reps.size();

  for (auto& e : reps) {
    FittedStructure s;
    s.hypothesis = e.hypothesis;
    s.weight = e.weight;
    s.sigma = e.scale.sigma;
    s.inliers = std::move(e.vertices);
    result.structures.push_back(std::move(s));
  }
  detail::resolve_labels(data, kind, result.structures, result.labels, diag.undersized_structures_removed);
  if (result.structures.empty()) throw Error(ErrorCode::NoStructuresFound, "no structure kept enough inliers");

  if (cfg.refit) {
    for (auto& s : result.structures) {
      try {
        s.hypothesis = refit_least_squares(kind, data.subset(s.inliers));
      } catch (const Error&) {
        // degenerate inlier set: keep the sampled hypothesis
      }
    }
  }
  diag.timings.selection_s = stage.lap();
  diag.timings.total_s = total.lap();
  return result;
}

}  // namespace hf
