#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "hf/eigensolver.hpp"
#include "hf/errors.hpp"
#include "hf/hypergraph.hpp"

namespace hf {

// ---------------------------------------------------------------------------
// Laplacian
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<double> checked_vertex_degrees(const Hypergraph& g) {
  auto d = g.vertex_degrees();
  for (std::size_t v = 0; v < d.size(); ++v) {
    if (!(d[v] > 0.0)) {
      throw Error(ErrorCode::ZeroDegreeVertex, "vertex " + std::to_string(v) + " has zero degree");
    }
  }
  return d;
}

}  // namespace detail

/// Factor B = Dv^-1/2 H (W De^-1)^1/2 of the normalized hypergraph adjacency,
/// so that the Laplacian is I - B B^T.
inline Eigen::SparseMatrix<double> laplacian_factor(const Hypergraph& g) {
  const auto d = detail::checked_vertex_degrees(g);
  std::vector<Eigen::Triplet<double>> triplets;
  std::size_t nnz = 0;
  for (const auto& e : g.edges) nnz += e.vertices.size();
  triplets.reserve(nnz);
  for (std::size_t j = 0; j < g.edges.size(); ++j) {
    const auto& e = g.edges[j];
    if (e.vertices.empty()) continue;
    const double edge_scale = std::sqrt(e.weight / static_cast<double>(e.vertices.size()));
    for (std::size_t v : e.vertices) {
      triplets.emplace_back(static_cast<int>(v), static_cast<int>(j), edge_scale / std::sqrt(d[v]));
    }
  }
  Eigen::SparseMatrix<double> b(static_cast<Eigen::Index>(g.n_vertices), static_cast<Eigen::Index>(g.edges.size()));
  b.setFromTriplets(triplets.begin(), triplets.end());
  return b;
}

/// Dense Laplacian I - Dv^-1/2 H W De^-1 H^T Dv^-1/2.
inline Eigen::MatrixXd build_laplacian(const Hypergraph& g) {
  const Eigen::SparseMatrix<double> b = laplacian_factor(g);
  Eigen::MatrixXd lap = -Eigen::MatrixXd(b * b.transpose());
  lap.diagonal().array() += 1.0;
  // Exact symmetry (the product is symmetric only up to rounding order).
  lap = 0.5 * (lap + lap.transpose()).eval();
  return lap;
}

// ---------------------------------------------------------------------------
// Spectral embedding
// ---------------------------------------------------------------------------

/// C eigenvectors of the Laplacian with the smallest eigenvalues, ascending.
struct SpectralEmbedding {
  Eigen::MatrixXd vectors;
  Eigen::VectorXd values;
};

namespace detail {

/// Largest-magnitude component of every column made positive.
inline void fix_signs(Eigen::MatrixXd& y) {
  for (Eigen::Index j = 0; j < y.cols(); ++j) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      const double a = std::abs(y(i, j));
      if (a > best + 1e-12 * best) {
        best = a;
        arg = i;
      }
    }
    if (y(arg, j) < 0.0) y.col(j) = -y.col(j);
  }
}

}  // namespace detail

inline SpectralEmbedding spectral_embedding(const Eigen::MatrixXd& laplacian, Eigen::Index c) {
  const Eigen::Index n = laplacian.rows();
  if (c <= 0 || c > n) throw Error(ErrorCode::InvalidArgument, "embedding dimension must be in [1, n]");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(laplacian);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::ConvergenceFailure, "symmetric eigensolver failed");
  SpectralEmbedding out;
  out.vectors = es.eigenvectors().leftCols(c);
  out.values = es.eigenvalues().head(c);
  detail::fix_signs(out.vectors);
  return out;
}

struct EmbeddingOptions {
  /// Graphs with at most this many vertices use the dense decomposition.
  std::size_t dense_limit = 600;
  KrylovOptions krylov;
};

/// Embedding straight from the hypergraph. Small graphs go through the dense
/// Laplacian; larger ones run block Krylov on B B^T (whose largest
/// eigenvalues are 1 minus the smallest Laplacian eigenvalues) and fall back
/// to the dense path if the iteration does not reach the tolerance.
inline SpectralEmbedding spectral_embedding(const Hypergraph& g, Eigen::Index c, const EmbeddingOptions& opt = {}) {
  const auto n = static_cast<Eigen::Index>(g.n_vertices);
  if (c <= 0 || c > n) throw Error(ErrorCode::InvalidArgument, "embedding dimension must be in [1, n]");
  if (g.n_vertices <= opt.dense_limit) return spectral_embedding(build_laplacian(g), c);

  const Eigen::SparseMatrix<double> b = laplacian_factor(g);
  const Eigen::SparseMatrix<double> bt = b.transpose();
  auto apply = [&](const Eigen::MatrixXd& x) -> Eigen::MatrixXd {
    const Eigen::MatrixXd tmp = bt * x;
    return b * tmp;
  };
  EigenPairs pairs = largest_eigenpairs(apply, n, c, opt.krylov);
  if (!pairs.converged) return spectral_embedding(build_laplacian(g), c);

  SpectralEmbedding out;
  out.vectors = pairs.vectors;
  out.values = (1.0 - pairs.values.array()).matrix();
  detail::fix_signs(out.vectors);
  return out;
}

// ---------------------------------------------------------------------------
// Rotation alignment
// ---------------------------------------------------------------------------

struct AlignmentOptions {
  std::size_t max_iter = 200;
  double step = 0.1;
  /// Stop once one accepted step lowers E by less than tol * n.
  double tol = 1e-7;
  /// Also start from a rotation built from mutually most-orthogonal rows.
  bool row_init = true;
};

struct Alignment {
  double cost = 0.0;          // E
  Eigen::MatrixXd rotation;   // R, k x k orthogonal
  Eigen::MatrixXd rotated;    // U = Y R
};

/// E = sum_i sum_j U_ij^2 / max_j U_ij^2. Each row contributes at least 1;
/// an all-zero row contributes exactly 1.
inline double alignment_cost(const Eigen::MatrixXd& u) {
  double cost = 0.0;
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    const double m = u.row(i).array().square().maxCoeff();
    if (m > 0.0)
      cost += u.row(i).squaredNorm() / m;
    else
      cost += 1.0;
  }
  return cost;
}

namespace detail {

struct GivensPlan {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  explicit GivensPlan(Eigen::Index k) {
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = i + 1; j < k; ++j) pairs.emplace_back(i, j);
  }
};

/// m <- m * G(i, j, theta), G the identity with [c -s; s c] on rows/cols i, j.
inline void right_givens(Eigen::MatrixXd& m, Eigen::Index i, Eigen::Index j, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double a = m(r, i), b = m(r, j);
    m(r, i) = c * a + s * b;
    m(r, j) = -s * a + c * b;
  }
}

inline Eigen::MatrixXd givens_product(const GivensPlan& plan, const std::vector<double>& theta, Eigen::Index k) {
  Eigen::MatrixXd r = Eigen::MatrixXd::Identity(k, k);
  for (std::size_t l = 0; l < plan.pairs.size(); ++l) right_givens(r, plan.pairs[l].first, plan.pairs[l].second, theta[l]);
  return r;
}

/// dE/dtheta for R = G_1 ... G_L, using dR/dtheta_l = P_l S_l Q_l with
/// P_l = G_1..G_l and Q_l = G_{l+1}..G_L.
inline std::vector<double> alignment_gradient(const Eigen::MatrixXd& y, const GivensPlan& plan,
                                              const std::vector<double>& theta) {
  const Eigen::Index k = y.cols();
  const Eigen::MatrixXd r = givens_product(plan, theta, k);
  const Eigen::MatrixXd u = y * r;
  Eigen::MatrixXd grad_u = Eigen::MatrixXd::Zero(u.rows(), k);
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    Eigen::Index arg = 0;
    const double m = u.row(i).array().square().maxCoeff(&arg);
    if (!(m > 0.0)) continue;
    double others = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (j == arg) continue;
      grad_u(i, j) = 2.0 * u(i, j) / m;
      others += u(i, j) * u(i, j);
    }
    grad_u(i, arg) = -2.0 * others / (m * u(i, arg));
  }
  const Eigen::MatrixXd mm = y.transpose() * grad_u;

  const std::size_t count = plan.pairs.size();
  std::vector<Eigen::MatrixXd> prefix(count);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Identity(k, k);
  for (std::size_t l = 0; l < count; ++l) {
    right_givens(acc, plan.pairs[l].first, plan.pairs[l].second, theta[l]);
    prefix[l] = acc;
  }
  std::vector<double> grad(count);
  Eigen::MatrixXd suffix = Eigen::MatrixXd::Identity(k, k);  // Q_l, built right to left
  for (std::size_t l = count; l-- > 0;) {
    const auto [i, j] = plan.pairs[l];
    // N = P^T M Q^T ; dE = N(j, i) - N(i, j)
    const double n_ji = prefix[l].col(j).dot(mm * suffix.row(i).transpose());
    const double n_ij = prefix[l].col(i).dot(mm * suffix.row(j).transpose());
    grad[l] = n_ji - n_ij;
    // Q_{l-1} = G_l Q_l
    const double c = std::cos(theta[l]), s = std::sin(theta[l]);
    for (Eigen::Index col = 0; col < k; ++col) {
      const double a = suffix(i, col), b = suffix(j, col);
      suffix(i, col) = c * a - s * b;
      suffix(j, col) = s * a + c * b;
    }
  }
  return grad;
}

inline Alignment descend(const Eigen::MatrixXd& y, const AlignmentOptions& opt) {
  const Eigen::Index k = y.cols();
  const auto n = static_cast<double>(y.rows());
  const GivensPlan plan(k);
  std::vector<double> theta(plan.pairs.size(), 0.0);
  double cost = alignment_cost(y) / n;
  for (std::size_t it = 0; it < opt.max_iter && !plan.pairs.empty(); ++it) {
    const auto grad = alignment_gradient(y, plan, theta);
    double gnorm = 0.0;
    for (double g : grad) gnorm += g * g;
    if (!(gnorm > 0.0)) break;
    double alpha = opt.step;
    bool accepted = false;
    std::vector<double> trial(theta.size());
    double trial_cost = cost;
    while (alpha > 1e-12) {
      for (std::size_t l = 0; l < theta.size(); ++l) trial[l] = theta[l] - alpha * grad[l];
      trial_cost = alignment_cost(y * givens_product(plan, trial, k)) / n;
      if (trial_cost < cost) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
    const double gain = cost - trial_cost;
    theta.swap(trial);
    cost = trial_cost;
    if (gain < opt.tol) break;
  }
  Alignment out;
  out.rotation = givens_product(plan, theta, k);
  out.rotated = y * out.rotation;
  out.cost = alignment_cost(out.rotated);
  return out;
}

/// Orthogonal R such that the k mutually most-orthogonal rows of y map close
/// to the coordinate axes.
inline Eigen::MatrixXd row_rotation(const Eigen::MatrixXd& y) {
  const Eigen::Index n = y.rows(), k = y.cols();
  Eigen::MatrixXd unit = y;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double norm = unit.row(i).norm();
    if (norm > 0.0) unit.row(i) /= norm;
  }
  Eigen::Index first = 0;
  double best = -1.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double norm = y.row(i).norm();
    if (norm > best) {
      best = norm;
      first = i;
    }
  }
  std::vector<Eigen::Index> chosen{first};
  Eigen::VectorXd overlap = (unit * unit.row(first).transpose()).cwiseAbs();
  while (static_cast<Eigen::Index>(chosen.size()) < k) {
    Eigen::Index pick = 0;
    double lowest = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (unit.row(i).squaredNorm() == 0.0) continue;
      if (overlap(i) < lowest) {
        lowest = overlap(i);
        pick = i;
      }
    }
    chosen.push_back(pick);
    overlap = overlap.cwiseMax((unit * unit.row(pick).transpose()).cwiseAbs());
  }
  Eigen::MatrixXd z(k, k);
  for (Eigen::Index r = 0; r < k; ++r) z.row(r) = unit.row(chosen[static_cast<std::size_t>(r)]);
  // Nearest orthogonal matrix to z^T.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(z.transpose(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

}  // namespace detail

/// Rotation R (a product of k(k-1)/2 Givens rotations found by gradient
/// descent) minimizing the alignment cost of U = Y R.
inline Alignment align_cost(const Eigen::MatrixXd& y, const AlignmentOptions& opt = {}) {
  const Eigen::Index k = y.cols();
  if (k < 1 || y.rows() < 1) throw Error(ErrorCode::InvalidArgument, "alignment needs a non-empty embedding");
  if (k == 1) {
    Alignment out;
    out.rotation = Eigen::MatrixXd::Identity(1, 1);
    out.rotated = y;
    out.cost = alignment_cost(y);
    return out;
  }
  Alignment best = detail::descend(y, opt);
  if (opt.row_init) {
    const Eigen::MatrixXd r0 = detail::row_rotation(y);
    Alignment alt = detail::descend(y * r0, opt);
    if (alt.cost < best.cost) {
      alt.rotation = (r0 * alt.rotation).eval();
      alt.rotated = y * alt.rotation;
      best = std::move(alt);
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Model count and assignment
// ---------------------------------------------------------------------------

struct CountOptions {
  /// k within rel_tol of the minimal normalized cost qualifies; the largest wins.
  double rel_tol = 0.02;
  /// Second Laplacian eigenvalue at or above which a uniformly signed first
  /// eigenvector is read as a single structure.
  double single_structure_gap = 0.5;
  AlignmentOptions alignment;
};

struct CountEstimate {
  std::size_t k0 = 1;
  /// Alignment cost E for k = 2, 3, ..., C (index k - 2).
  std::vector<double> costs;
  /// U at k0 (the embedding itself when k0 = 1).
  Eigen::MatrixXd rotated;
  bool single_structure = false;
};

/// Chooses the number of groups from the alignment costs of the leading
/// 2..C eigenvectors, seeding each k with the rotated columns of k - 1.
inline CountEstimate estimate_count(const SpectralEmbedding& emb, std::size_t c, const CountOptions& opt = {}) {
  const Eigen::MatrixXd& y = emb.vectors;
  const std::size_t c_eff = std::min<std::size_t>(c, static_cast<std::size_t>(y.cols()));
  CountEstimate out;
  out.rotated = y.leftCols(1);
  if (c_eff < 2) return out;

  const auto n = static_cast<double>(y.rows());
  std::vector<Eigen::MatrixXd> rotations;
  Eigen::MatrixXd prev = y.leftCols(1);
  for (std::size_t k = 2; k <= c_eff; ++k) {
    Eigen::MatrixXd yk(y.rows(), static_cast<Eigen::Index>(k));
    yk.leftCols(static_cast<Eigen::Index>(k - 1)) = prev;
    yk.col(static_cast<Eigen::Index>(k - 1)) = y.col(static_cast<Eigen::Index>(k - 1));
    Alignment a = align_cost(yk, opt.alignment);
    out.costs.push_back(a.cost);
    prev = a.rotated;
    rotations.push_back(std::move(a.rotated));
  }

  double min_cost = std::numeric_limits<double>::infinity();
  for (double e : out.costs) min_cost = std::min(min_cost, e / n);
  std::size_t k0 = 2;
  for (std::size_t k = 2; k <= c_eff; ++k) {
    if (out.costs[k - 2] / n <= min_cost * (1.0 + opt.rel_tol)) k0 = k;
  }

  const bool uniform_sign = (y.col(0).array() >= 0.0).all() || (y.col(0).array() <= 0.0).all();
  const bool weak_split = emb.values.size() >= 2 && emb.values(1) >= opt.single_structure_gap;
  if (uniform_sign && weak_split) {
    out.single_structure = true;
    out.k0 = 1;
    out.rotated = y.leftCols(1);
    return out;
  }
  out.k0 = k0;
  out.rotated = rotations[k0 - 2];
  return out;
}

/// Non-maximum suppression: label(i) = 1 + argmax_j U_ij^2, lowest column on ties.
inline std::vector<std::size_t> assign(const Eigen::MatrixXd& u) {
  std::vector<std::size_t> labels(static_cast<std::size_t>(u.rows()));
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index j = 0; j < u.cols(); ++j) {
      const double v = u(i, j) * u(i, j);
      if (v > best) {
        best = v;
        arg = j;
      }
    }
    labels[static_cast<std::size_t>(i)] = static_cast<std::size_t>(arg) + 1;
  }
  return labels;
}

struct PartitionOptions {
  std::size_t max_groups = 10;  // C
  CountOptions count;
  EmbeddingOptions embedding;
  /// Bypasses the count estimate when nonzero (debug only).
  std::size_t forced_k = 0;
};

struct PartitionResult {
  /// Number of nonempty sub-hypergraphs.
  std::size_t k0 = 1;
  /// Count picked by the cost rule, before empty groups are dropped.
  std::size_t k_selected = 1;
  std::vector<std::size_t> labels;  // 1..k0 per vertex
  std::vector<double> alignment_costs;
  Eigen::VectorXd eigenvalues;
  bool single_structure = false;
};

/// Sub-hypergraph detection: Laplacian, C smallest eigenvectors, rotation
/// alignment to pick k0, non-maximum suppression to label vertices.
inline PartitionResult partition(const Hypergraph& g, const PartitionOptions& opt = {}) {
  if (g.n_vertices == 0) throw Error(ErrorCode::EmptyGraph, "hypergraph has no vertices");
  if (opt.max_groups < 2) throw Error(ErrorCode::InvalidArgument, "C must be at least 2");
  const auto c = static_cast<Eigen::Index>(std::min<std::size_t>(opt.max_groups, g.n_vertices));
  const SpectralEmbedding emb = spectral_embedding(g, c, opt.embedding);

  PartitionResult out;
  out.eigenvalues = emb.values;
  Eigen::MatrixXd u;
  if (opt.forced_k > 0) {
    const auto k = static_cast<Eigen::Index>(std::min<std::size_t>(opt.forced_k, static_cast<std::size_t>(c)));
    u = align_cost(emb.vectors.leftCols(k), opt.count.alignment).rotated;
    out.k_selected = static_cast<std::size_t>(k);
  } else {
    CountEstimate est = estimate_count(emb, static_cast<std::size_t>(c), opt.count);
    out.alignment_costs = est.costs;
    out.single_structure = est.single_structure;
    out.k_selected = est.k0;
    u = std::move(est.rotated);
  }

  auto raw = assign(u);
  std::vector<std::size_t> compact(static_cast<std::size_t>(u.cols()) + 1, 0);
  std::size_t next = 0;
  std::vector<char> seen(compact.size(), 0);
  for (std::size_t label : raw) seen[label] = 1;
  for (std::size_t l = 1; l < compact.size(); ++l)
    if (seen[l]) compact[l] = ++next;
  out.labels.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out.labels[i] = compact[raw[i]];
  out.k0 = next;
  return out;
}

}  // namespace hf
