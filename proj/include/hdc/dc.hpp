#ifndef HDC_DC_HPP
#define HDC_DC_HPP

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "hdc/common.hpp"
#include "hdc/flops.hpp"
#include "hdc/hss.hpp"
#include "hdc/jacobi.hpp"
#include "hdc/secular.hpp"
#include "hdc/tridiagonal.hpp"

namespace hdc {

struct EigenDecomposition {
  Vector values;   // ascending
  Matrix vectors;  // column i pairs with values[i]
};

enum class PathOverride { Auto, ForceDense, ForceHss };

inline const char* to_string(PathOverride p) {
  switch (p) {
    case PathOverride::ForceDense: return "force-dense";
    case PathOverride::ForceHss: return "force-hss";
    default: return "auto";
  }
}

inline PathOverride path_override_from_string(const std::string& s) {
  if (s == "auto") return PathOverride::Auto;
  if (s == "force-dense") return PathOverride::ForceDense;
  if (s == "force-hss") return PathOverride::ForceHss;
  throw InvalidParameter("unknown path override '" + s + "'");
}

struct DCOptions {
  Index base_size = 32;
  Index switch_threshold = 1024;  // smallest non-deflated size solved via HSS
  double hss_tol = 1e-14;
  Index leaf_size = 128;
  Index r0 = 32;
  Index p = 10;
  Index rank_increment = 32;
  std::uint64_t seed = 0;
  PathOverride path = PathOverride::Auto;
  double tol_factor = 8.0;

  void validate() const {
    if (base_size < 2) throw InvalidParameter("options: base_size must be >= 2");
    if (switch_threshold < 2 * leaf_size)
      throw InvalidParameter("options: switch_threshold must be at least twice leaf_size");
    if (leaf_size < 1 || r0 < 1 || p < 0 || rank_increment < 1)
      throw InvalidParameter("options: structured-compression parameters out of range");
    if (!(hss_tol >= 0.0)) throw InvalidParameter("options: hss_tol must be >= 0");
    if (!(tol_factor > 0.0)) throw InvalidParameter("options: tol_factor must be positive");
  }
};

struct MergeStats {
  Index level = 0;    // recursion depth of the merge, top merge = 0
  Index n_merge = 0;  // size of the merged problem
  Index K = 0;        // non-deflated secular size
  double deflation_fraction = 0.0;
  std::string path;  // "dense" or "hss"
  Index hss_rank = 0;
  Index hss_samples = 0;
  bool hss_fallback = false;
  std::uint64_t flops_secular = 0;
  std::uint64_t flops_update = 0;
};

struct SolveStats {
  std::vector<MergeStats> merges;  // completion (bottom-up) order
  std::uint64_t flops_base = 0;
  std::uint64_t flops_secular = 0;
  std::uint64_t flops_update = 0;
  std::uint64_t flops_total = 0;
  double deflation_fraction = 0.0;  // aggregate over all merges
  Index max_hss_rank = 0;
};

/// Rank-one tear: T = diag(T1, T2) + b*v*v^T with v carrying ones at the
/// two positions adjacent to the cut; both touched diagonal entries give
/// up b. k is the size of the first part, 1 <= k < n.
inline std::tuple<SymTridiagonal, SymTridiagonal, double> split(const SymTridiagonal& T,
                                                                Index k) {
  const Index n = T.n();
  if (k < 1 || k >= n) throw InvalidParameter("split: k out of range");
  const double b = T.offdiag[k - 1];
  SymTridiagonal T1{T.diag.head(k), T.offdiag.head(k - 1)};
  SymTridiagonal T2{T.diag.tail(n - k), T.offdiag.tail(n - k - 1)};
  T1.diag[k - 1] -= b;
  T2.diag[0] -= b;
  return {std::move(T1), std::move(T2), b};
}

/// Direct solve for the recursion base: closed form up to n = 2, cyclic
/// Jacobi on the dense embedding above that.
inline EigenDecomposition base_solve(const SymTridiagonal& T, FlopCounter* fc = nullptr) {
  const Index n = T.n();
  EigenDecomposition E;
  if (n == 1) {
    E.values = T.diag;
    E.vectors = Matrix::Identity(1, 1);
    return E;
  }
  if (n == 2) {
    const double a = T.diag[0], c = T.diag[1], b = T.offdiag[0];
    E.values.resize(2);
    E.vectors.resize(2, 2);
    if (b == 0.0) {
      if (a <= c) {
        E.values << a, c;
        E.vectors << 1, 0, 0, 1;
      } else {
        E.values << c, a;
        E.vectors << 0, 1, 1, 0;
      }
      return E;
    }
    const double mid = 0.5 * (a + c);
    const double rad = std::hypot(0.5 * (a - c), b);
    const double l1 = mid - rad, l2 = mid + rad;
    Vector v2(2);
    // two algebraically equal forms; pick the one free of cancellation
    if (a >= c)
      v2 << l2 - c, b;
    else
      v2 << b, l2 - a;
    v2.normalize();
    E.values << l1, l2;
    E.vectors.col(0) << -v2[1], v2[0];
    E.vectors.col(1) = v2;
    count(fc, 24);
    return E;
  }
  Matrix A = T.to_dense();
  jacobi_eigensolve(std::move(A), E.values, E.vectors, fc);
  return E;
}

namespace detail {

/// Columns of diag(Q1, Q2) with the deflation rotations applied, plus
/// per-column support flags (top half / bottom half touched).
struct AssembledColumns {
  Matrix X;
  std::vector<char> top, bot;
};

inline AssembledColumns assemble_columns(const Matrix& Q1, const Matrix& Q2,
                                         const std::vector<GivensRecord>& rotations) {
  const Index n1 = Q1.rows(), n2 = Q2.rows(), n = n1 + n2;
  AssembledColumns a;
  a.X = Matrix::Zero(n, n);
  a.X.topLeftCorner(n1, n1) = Q1;
  a.X.bottomRightCorner(n2, n2) = Q2;
  a.top.assign(n, 0);
  a.bot.assign(n, 0);
  for (Index j = 0; j < n1; ++j) a.top[j] = 1;
  for (Index j = n1; j < n; ++j) a.bot[j] = 1;
  Vector tmp(n);
  for (const auto& g : rotations) {
    tmp = g.c * a.X.col(g.p) + g.s * a.X.col(g.q);
    a.X.col(g.q) = -g.s * a.X.col(g.p) + g.c * a.X.col(g.q);
    a.X.col(g.p) = tmp;
    const char t = a.top[g.p] | a.top[g.q];
    const char b = a.bot[g.p] | a.bot[g.q];
    a.top[g.p] = a.top[g.q] = t;
    a.bot[g.p] = a.bot[g.q] = b;
  }
  return a;
}

}  // namespace detail

/// Dense eigenvector update in Gu's block-column layout: survivor columns
/// are grouped into top-only, mixed, and bottom-only sets so the whole
/// update is exactly two rectangular products; deflated columns are copied
/// through. Output columns are in deflation slot order.
inline Matrix update_dense(const Matrix& Q1, const Matrix& Q2, const DeflationOutcome& outcome,
                           const QhatEvaluator& qhat, FlopCounter* fc = nullptr) {
  const Index n1 = Q1.rows(), n2 = Q2.rows(), n = n1 + n2;
  const Index K = outcome.K;
  if (static_cast<Index>(outcome.perm.size()) != n)
    throw DimensionMismatch("update_dense: permutation length mismatch");
  if (qhat.size() != K) throw DimensionMismatch("update_dense: secular size mismatch");

  auto asm_ = detail::assemble_columns(Q1, Q2, outcome.rotations);
  Matrix U(n, n);
  for (Index slot = K; slot < n; ++slot) U.col(slot) = asm_.X.col(outcome.perm[slot]);
  if (K == 0) return U;

  std::vector<Index> g1, g2, g3;  // survivor slots by column support
  for (Index slot = 0; slot < K; ++slot) {
    const Index col = outcome.perm[slot];
    const bool t = asm_.top[col], b = asm_.bot[col];
    if (t && b)
      g2.push_back(slot);
    else if (t)
      g1.push_back(slot);
    else
      g3.push_back(slot);
  }

  Matrix Qh(K, K);
  for (Index j = 0; j < K; ++j)
    for (Index k = 0; k < K; ++k) Qh(k, j) = qhat.entry(k, j);
  count(fc, 5ull * static_cast<std::uint64_t>(K) * static_cast<std::uint64_t>(K));

  const Index m12 = static_cast<Index>(g1.size() + g2.size());
  const Index m23 = static_cast<Index>(g2.size() + g3.size());
  Matrix Xt(n1, m12), Qt(m12, K);
  {
    Index c = 0;
    for (Index slot : g1) {
      Xt.col(c) = asm_.X.col(outcome.perm[slot]).head(n1);
      Qt.row(c++) = Qh.row(slot);
    }
    for (Index slot : g2) {
      Xt.col(c) = asm_.X.col(outcome.perm[slot]).head(n1);
      Qt.row(c++) = Qh.row(slot);
    }
  }
  Matrix Xb(n2, m23), Qb(m23, K);
  {
    Index c = 0;
    for (Index slot : g2) {
      Xb.col(c) = asm_.X.col(outcome.perm[slot]).tail(n2);
      Qb.row(c++) = Qh.row(slot);
    }
    for (Index slot : g3) {
      Xb.col(c) = asm_.X.col(outcome.perm[slot]).tail(n2);
      Qb.row(c++) = Qh.row(slot);
    }
  }
  asm_.X.resize(0, 0);

  U.topLeftCorner(n1, K).noalias() = Xt * Qt;
  U.bottomLeftCorner(n2, K).noalias() = Xb * Qb;
  if (fc) {
    fc->add_gemm(n1, K, m12);
    fc->add_gemm(n2, K, m23);
  }
  return U;
}

struct HssUpdateInfo {
  Index hss_rank = 0;
  Index samples = 0;
  bool fallback = false;
};

/// Structured eigenvector update: the rotated, permuted columns are NOT
/// regrouped (regrouping would destroy the off-diagonal low-rank structure
/// of the eigenvector matrix); instead the survivor block is multiplied
/// against a compressed representation of the secular eigenvector matrix,
/// realized through its transpose action.
inline Matrix update_hss(const Matrix& Q1, const Matrix& Q2, const DeflationOutcome& outcome,
                         const QhatEvaluator& qhat, const DCOptions& opts,
                         std::uint64_t merge_seed, HssUpdateInfo& info,
                         FlopCounter* fc = nullptr) {
  const Index n1 = Q1.rows(), n2 = Q2.rows(), n = n1 + n2;
  const Index K = outcome.K;
  if (qhat.size() != K) throw DimensionMismatch("update_hss: secular size mismatch");

  auto asm_ = detail::assemble_columns(Q1, Q2, outcome.rotations);
  Matrix U(n, n);
  for (Index slot = K; slot < n; ++slot) U.col(slot) = asm_.X.col(outcome.perm[slot]);
  if (K == 0) return U;

  Matrix XsT(K, n);
  for (Index slot = 0; slot < K; ++slot) XsT.row(slot) = asm_.X.col(outcome.perm[slot]);
  asm_.X.resize(0, 0);

  MatrixSource src;
  src.n = K;
  src.multiply = [&qhat](const Matrix& X, bool transpose, FlopCounter* f) {
    return qhat.apply(X, transpose, f);
  };
  src.entry = [&qhat](Index i, Index j) { return qhat.entry(i, j); };

  ClusterTree tree = build_cluster_tree(K, std::min(opts.leaf_size, K));
  HSSMatrix H = compress_randomized(src, tree, std::min(opts.r0, K), opts.p, opts.hss_tol,
                                    opts.rank_increment, merge_seed, fc);
  info.hss_rank = H.diag.hss_rank;
  info.samples = H.diag.samples_used;
  info.fallback = H.diag.exact_fallback;

  Matrix Yt = hss_matmat(H, XsT, /*transpose=*/true, fc);  // Qhat^T X^T
  U.leftCols(K) = Yt.transpose();
  return U;
}

/// One Cuppen merge: build the rank-one system from the boundary rows,
/// deflate, solve the secular equation, reweight, update eigenvectors on
/// the dense or structured path, and return globally sorted eigenpairs.
inline EigenDecomposition merge(const Matrix& Q1, const Vector& D1, const Matrix& Q2,
                                const Vector& D2, double b_k, const DCOptions& opts,
                                std::uint64_t merge_seed, MergeStats& stats) {
  const Index n1 = Q1.rows(), n2 = Q2.rows(), n = n1 + n2;
  if (Q1.cols() != n1 || Q2.cols() != n2 || D1.size() != n1 || D2.size() != n2)
    throw DimensionMismatch("merge: decomposition shapes disagree");
  stats.n_merge = n;

  FlopCounter fsec, fupd;
  Vector slot_values(n);
  Matrix U;

  if (b_k == 0.0) {
    stats.K = 0;
    stats.deflation_fraction = 1.0;
    stats.path = "dense";
    slot_values << D1, D2;
    U = Matrix::Zero(n, n);
    U.topLeftCorner(n1, n1) = Q1;
    U.bottomRightCorner(n2, n2) = Q2;
  } else {
    Vector d_raw(n), z_raw(n);
    d_raw << D1, D2;
    z_raw.head(n1) = Q1.row(n1 - 1).transpose();
    z_raw.tail(n2) = Q2.row(0).transpose();

    DeflationOutcome outcome = normalize_rankone(d_raw, z_raw, b_k, opts.tol_factor);
    const Index K = outcome.K;
    stats.K = K;
    stats.deflation_fraction = static_cast<double>(n - K) / static_cast<double>(n);

    SecularSystem& sys = outcome.system;
    std::vector<SecularRoot> roots;
    Vector z_hat;
    if (K > 0) {
      roots = solve_secular(sys, nullptr, &fsec);
      z_hat = lowner_reweight(sys, roots, &fsec);
    }
    QhatEvaluator qhat(sys, z_hat, roots);

    for (Index i = 0; i < K; ++i)
      slot_values[i] = outcome.negated ? -roots[i].lambda : roots[i].lambda;
    for (Index j = K; j < n; ++j) {
      const double v = outcome.deflated_values[j - K];
      slot_values[j] = outcome.negated ? -v : v;
    }

    bool use_hss = false;
    switch (opts.path) {
      case PathOverride::Auto: use_hss = K >= opts.switch_threshold; break;
      case PathOverride::ForceDense: use_hss = false; break;
      case PathOverride::ForceHss: use_hss = K > 0; break;
    }
    stats.path = use_hss ? "hss" : "dense";
    if (use_hss) {
      HssUpdateInfo info;
      U = update_hss(Q1, Q2, outcome, qhat, opts, merge_seed, info, &fupd);
      stats.hss_rank = info.hss_rank;
      stats.hss_samples = info.samples;
      stats.hss_fallback = info.fallback;
    } else {
      U = update_dense(Q1, Q2, outcome, qhat, &fupd);
    }
  }

  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index(0));
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return slot_values[a] < slot_values[b]; });

  EigenDecomposition E;
  E.values.resize(n);
  E.vectors.resize(n, n);
  for (Index k = 0; k < n; ++k) {
    E.values[k] = slot_values[order[k]];
    E.vectors.col(k) = U.col(order[k]);
  }
  stats.flops_secular = fsec.flops;
  stats.flops_update = fupd.flops;
  return E;
}

/// Full divide-and-conquer eigensolve: bisection at ceil(n/2) down to the
/// base size, then bottom-up merges.
inline EigenDecomposition solve(const SymTridiagonal& T, const DCOptions& opts,
                                SolveStats& stats) {
  opts.validate();
  T.validate();
  stats = SolveStats{};
  std::uint64_t merge_counter = 0;

  auto rec = [&](auto&& self, const SymTridiagonal& Tl, Index depth) -> EigenDecomposition {
    const Index n = Tl.n();
    if (n <= opts.base_size) {
      FlopCounter fb;
      EigenDecomposition E = base_solve(Tl, &fb);
      stats.flops_base += fb.flops;
      return E;
    }
    const Index k = (n + 1) / 2;
    auto [T1, T2, b] = split(Tl, k);
    EigenDecomposition E1 = self(self, T1, depth + 1);
    EigenDecomposition E2 = self(self, T2, depth + 1);
    MergeStats ms;
    ms.level = depth;
    const std::uint64_t mseed =
        opts.seed ^ (0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(++merge_counter));
    EigenDecomposition E = merge(E1.vectors, E1.values, E2.vectors, E2.values, b, opts, mseed, ms);
    stats.merges.push_back(std::move(ms));
    return E;
  };

  EigenDecomposition E = rec(rec, T, 0);

  std::uint64_t merged_total = 0, deflated_total = 0;
  for (const auto& m : stats.merges) {
    stats.flops_secular += m.flops_secular;
    stats.flops_update += m.flops_update;
    stats.max_hss_rank = std::max(stats.max_hss_rank, m.hss_rank);
    merged_total += static_cast<std::uint64_t>(m.n_merge);
    deflated_total += static_cast<std::uint64_t>(m.n_merge - m.K);
  }
  stats.flops_total = stats.flops_base + stats.flops_secular + stats.flops_update;
  stats.deflation_fraction =
      merged_total ? static_cast<double>(deflated_total) / static_cast<double>(merged_total) : 0.0;
  return E;
}

struct VerifyMetrics {
  double orthogonality = 0.0;  // max-norm of I - U U^T
  double max_residual = 0.0;   // max_i ||T u_i - lambda_i u_i|| / ||T||_F
  bool ascending = false;
};

inline VerifyMetrics verify(const SymTridiagonal& T, const EigenDecomposition& E) {
  const Index n = T.n();
  if (E.values.size() != n || E.vectors.rows() != n || E.vectors.cols() != n)
    throw DimensionMismatch("verify: decomposition shape mismatch");
  VerifyMetrics m;

  Matrix G = E.vectors * E.vectors.transpose();
  G.diagonal().array() -= 1.0;
  m.orthogonality = G.cwiseAbs().maxCoeff();

  const double tnorm = T.frobenius_norm();
  const double denom = tnorm > 0.0 ? tnorm : 1.0;
  Vector y(n);
  for (Index i = 0; i < n; ++i) {
    T.apply(E.vectors.col(i), y);
    y -= E.values[i] * E.vectors.col(i);
    m.max_residual = std::max(m.max_residual, y.norm() / denom);
  }

  m.ascending = true;
  for (Index i = 0; i + 1 < n; ++i)
    if (E.values[i] > E.values[i + 1]) m.ascending = false;
  return m;
}

}  // namespace hdc

#endif  // HDC_DC_HPP
