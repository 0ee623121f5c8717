#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "hf/errors.hpp"
#include "hf/random.hpp"

namespace hf {

struct EigenPairs {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // columns match values
  bool converged = false;
  std::size_t restarts = 0;
};

struct KrylovOptions {
  /// Largest residual norm |A v - mu v| accepted per Ritz pair.
  double tol = 1e-10;
  std::size_t max_restarts = 60;
  /// Krylov basis size per restart (capped at n).
  std::size_t max_basis = 240;
  std::uint64_t seed = 0x5eedULL;
};

namespace detail {

/// Orthogonalizes the columns of w against the orthonormal columns
/// basis[:, 0:used) and against each other (two Gram-Schmidt passes),
/// appending survivors to basis. Returns the number of columns appended.
inline Eigen::Index append_orthonormal(Eigen::MatrixXd& basis, Eigen::Index used, const Eigen::MatrixXd& w,
                                       Eigen::Index capacity) {
  Eigen::Index added = 0;
  for (Eigen::Index c = 0; c < w.cols() && used + added < capacity; ++c) {
    Eigen::VectorXd v = w.col(c);
    const double before = v.norm();
    if (!(before > 0.0)) continue;
    for (int pass = 0; pass < 2; ++pass) {
      const Eigen::Index m = used + added;
      if (m > 0) v -= basis.leftCols(m) * (basis.leftCols(m).transpose() * v);
    }
    const double after = v.norm();
    if (after <= 1e-10 * before) continue;
    basis.col(used + added) = v / after;
    ++added;
  }
  return added;
}

}  // namespace detail

/// Largest `nev` eigenpairs of a symmetric operator by restarted block
/// Krylov iteration with Rayleigh-Ritz extraction. The start block is drawn
/// from a fixed seed, so the result is deterministic.
inline EigenPairs largest_eigenpairs(const std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>& apply,
                                     Eigen::Index n, Eigen::Index nev, const KrylovOptions& opt = {}) {
  if (nev <= 0 || nev > n) throw Error(ErrorCode::InvalidArgument, "requested eigenpair count out of range");
  const Eigen::Index block = std::min<Eigen::Index>(n, nev + std::max<Eigen::Index>(6, nev / 2));
  const Eigen::Index capacity = std::min<Eigen::Index>(n, std::max<Eigen::Index>(static_cast<Eigen::Index>(opt.max_basis), 3 * block));

  Rng rng(opt.seed);
  Eigen::MatrixXd start(n, block);
  for (Eigen::Index j = 0; j < block; ++j)
    for (Eigen::Index i = 0; i < n; ++i) start(i, j) = rng.normal();

  EigenPairs out;
  Eigen::MatrixXd basis(n, capacity);
  for (std::size_t restart = 0; restart <= opt.max_restarts; ++restart) {
    out.restarts = restart;
    Eigen::Index used = detail::append_orthonormal(basis, 0, start, capacity);
    Eigen::Index block_begin = 0;
    while (used < capacity) {
      const Eigen::MatrixXd next = apply(basis.middleCols(block_begin, used - block_begin));
      const Eigen::Index prev_used = used;
      used += detail::append_orthonormal(basis, used, next, capacity);
      if (used == prev_used) break;  // invariant subspace reached
      block_begin = prev_used;
    }
    const auto q = basis.leftCols(used);
    const Eigen::MatrixXd aq = apply(q);
    Eigen::MatrixXd t = q.transpose() * aq;
    t = 0.5 * (t + t.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    if (es.info() != Eigen::Success) throw Error(ErrorCode::ConvergenceFailure, "Ritz eigenproblem failed");

    // SelfAdjointEigenSolver sorts ascending; take from the top.
    const Eigen::Index keep = std::min<Eigen::Index>(used, block);
    Eigen::MatrixXd s(used, keep);
    Eigen::VectorXd mu(keep);
    for (Eigen::Index j = 0; j < keep; ++j) {
      s.col(j) = es.eigenvectors().col(used - 1 - j);
      mu(j) = es.eigenvalues()(used - 1 - j);
    }
    const Eigen::MatrixXd ritz = q * s;
    const Eigen::MatrixXd a_ritz = aq * s;
    const Eigen::Index want = std::min<Eigen::Index>(nev, keep);
    double worst = 0.0;
    for (Eigen::Index j = 0; j < want; ++j)
      worst = std::max(worst, (a_ritz.col(j) - mu(j) * ritz.col(j)).norm());

    out.values = mu.head(want);
    out.vectors = ritz.leftCols(want);
    if (want == nev && worst <= opt.tol) {
      out.converged = true;
      return out;
    }
    start = ritz;
  }
  return out;
}

}  // namespace hf
