#ifndef HDC_SECULAR_HPP
#define HDC_SECULAR_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "hdc/common.hpp"
#include "hdc/flops.hpp"

namespace hdc {

/// Deflated diagonal-plus-rank-one system: D + rho * z z^T with d strictly
/// ascending, z of unit 2-norm and rho > 0.
struct SecularSystem {
  Vector d;
  Vector z;
  double rho = 0.0;

  Index size() const { return d.size(); }

  void validate() const {
    const Index k = d.size();
    if (z.size() != k) throw DimensionMismatch("secular system: d and z lengths differ");
    if (k == 0) return;
    if (!(rho > 0.0)) throw InvalidParameter("secular system: rho must be positive");
    for (Index i = 0; i + 1 < k; ++i)
      if (!(d[i] < d[i + 1])) throw InvalidParameter("secular system: d must be strictly ascending");
    const double nz = z.norm();
    if (std::abs(nz - 1.0) > 4.0 * kEps * std::sqrt(static_cast<double>(k)))
      throw InvalidParameter("secular system: z must have unit norm");
  }
};

/// Root of the secular equation stored as (anchor pole, offset): the value
/// is d[pole] + mu, and mu keeps full relative accuracy next to the pole.
struct SecularRoot {
  Index pole = 0;
  double mu = 0.0;
  double lambda = 0.0;
};

/// Plane rotation over coordinates (p, q). Acting on columns:
/// col_p <- c*col_p + s*col_q, col_q <- -s*col_p + c*col_q; the q side is
/// the deflated one.
struct GivensRecord {
  Index p = 0;
  Index q = 0;
  double c = 1.0;
  double s = 0.0;
};

/// Result of deflating a rank-one modification. Slot k of the deflated
/// layout (survivors ascending, then deflated entries) is fed by input
/// coordinate perm[k]; rotations are indexed in the same coordinates as
/// the input of deflate (for normalize_rankone, the raw input order).
struct DeflationOutcome {
  Index K = 0;
  std::vector<Index> perm;
  std::vector<GivensRecord> rotations;
  SecularSystem system;
  Vector deflated_values;
  bool negated = false;  // problem was solved as -(D + rho z z^T)
  double tol = 0.0;
};

/// Two-case deflation: entries with rho*|z_i| below tolerance are already
/// eigenpairs; near-equal pole pairs are merged by a rotation that zeroes
/// one z entry and leaves an off-diagonal perturbation below tolerance,
/// which is dropped. Surviving z is rescaled to unit norm with the factor
/// absorbed into rho.
inline DeflationOutcome deflate(const Vector& d, const Vector& z, double rho,
                                double tol_factor = 8.0) {
  const Index n = d.size();
  if (n < 1) throw InvalidDimension("deflate: empty system");
  if (z.size() != n) throw DimensionMismatch("deflate: d and z lengths differ");
  for (Index i = 0; i + 1 < n; ++i)
    if (d[i] > d[i + 1]) throw InvalidParameter("deflate: d must be ascending");
  if (!(rho >= 0.0) || !std::isfinite(rho)) throw InvalidParameter("deflate: rho must be nonnegative");

  DeflationOutcome out;
  out.tol = tol_factor * kEps * std::max(d.cwiseAbs().maxCoeff(), rho);

  Vector dw = d, zw = z;
  std::vector<char> gone(n, 0);
  Index last_surv = -1;
  for (Index i = 0; i < n; ++i) {
    if (rho * std::abs(zw[i]) <= out.tol) {
      gone[i] = 1;
      continue;
    }
    if (last_surv >= 0) {
      const Index p = last_surv;
      const double tau = std::hypot(zw[p], zw[i]);
      const double c = zw[p] / tau, s = zw[i] / tau;
      if (std::abs(dw[i] - dw[p]) * std::abs(c * s) <= out.tol) {
        zw[p] = tau;
        zw[i] = 0.0;
        const double dp = dw[p], di = dw[i];
        dw[p] = c * c * dp + s * s * di;
        dw[i] = s * s * dp + c * c * di;
        out.rotations.push_back({p, i, c, s});
        gone[i] = 1;
        continue;
      }
    }
    last_surv = i;
  }

  std::vector<Index> survivors, removed;
  for (Index i = 0; i < n; ++i) (gone[i] ? removed : survivors).push_back(i);
  out.K = static_cast<Index>(survivors.size());

  out.perm.reserve(n);
  out.perm.insert(out.perm.end(), survivors.begin(), survivors.end());
  out.perm.insert(out.perm.end(), removed.begin(), removed.end());

  out.system.d.resize(out.K);
  out.system.z.resize(out.K);
  double s2 = 0.0;
  for (Index k = 0; k < out.K; ++k) {
    out.system.d[k] = dw[survivors[k]];
    out.system.z[k] = zw[survivors[k]];
    s2 += out.system.z[k] * out.system.z[k];
  }
  if (out.K > 0) {
    const double snorm = std::sqrt(s2);
    out.system.z /= snorm;
    out.system.rho = rho * s2;
  }
  out.deflated_values.resize(n - out.K);
  for (Index k = 0; k < static_cast<Index>(removed.size()); ++k)
    out.deflated_values[k] = dw[removed[k]];
  return out;
}

/// Bring a raw rank-one modification d + b_k * z z^T into deflated form.
/// The norm of z is folded into rho; a negative b_k is handled by solving
/// the negated problem (flagged in the outcome) so the root finder only
/// ever sees rho > 0. Indices in the outcome refer to the raw input order.
inline DeflationOutcome normalize_rankone(const Vector& d_raw, const Vector& z_raw, double b_k,
                                          double tol_factor = 8.0) {
  const Index n = d_raw.size();
  if (n < 1) throw InvalidDimension("normalize_rankone: empty system");
  if (z_raw.size() != n) throw DimensionMismatch("normalize_rankone: d and z lengths differ");
  if (!all_finite(d_raw.data(), n) || !all_finite(z_raw.data(), n) || !std::isfinite(b_k))
    throw NumericError("normalize_rankone: non-finite input");

  const bool negated = b_k < 0.0;
  const double zn2 = z_raw.squaredNorm();
  const double rho = std::abs(b_k) * zn2;

  Vector d_work = negated ? Vector(-d_raw) : d_raw;
  Vector z_work = zn2 > 0.0 ? Vector(z_raw / std::sqrt(zn2)) : z_raw;

  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index(0));
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return d_work[a] < d_work[b]; });
  Vector ds(n), zs(n);
  for (Index k = 0; k < n; ++k) {
    ds[k] = d_work[order[k]];
    zs[k] = z_work[order[k]];
  }

  DeflationOutcome out = deflate(ds, zs, rho, tol_factor);
  out.negated = negated;
  for (auto& p : out.perm) p = order[p];
  for (auto& g : out.rotations) {
    g.p = order[g.p];
    g.q = order[g.q];
  }
  return out;
}

/// Per-root iteration record (development and property-test visibility).
struct SecularRootDiagnostics {
  Index iterations = 0;
  double eval_min = 0.0;  // most negative mu evaluated
  double eval_max = 0.0;
  double residual = 0.0;
};

namespace detail {

struct SecularTerms {
  double f;        // 1 + rho * sum z_k^2 / delta_k
  double abs_sum;  // sum |z_k^2 / delta_k|
};

inline SecularTerms eval_secular(const SecularSystem& sys, Index anchor, double mu,
                                 Vector& delta) {
  const Index k = sys.size();
  double sum = 0.0, abs_sum = 0.0;
  for (Index i = 0; i < k; ++i) {
    delta[i] = (sys.d[i] - sys.d[anchor]) - mu;
    const double term = sys.z[i] * sys.z[i] / delta[i];
    sum += term;
    abs_sum += std::abs(term);
  }
  return {1.0 + sys.rho * sum, abs_sum};
}

// Rational two-pole model: fit r + s1/(D1 - t) + s2/(D2 - t) to f with the
// current value and split derivatives, then return the step t solving the
// model (quadratic). Candidates outside (lo-mu, hi-mu) are rejected by the
// caller.
inline bool model_step(double f, double rho, double psi1p, double psi2p, double D1, double D2,
                       double& t_small, double& t_other) {
  const double s1 = rho * psi1p * D1 * D1;
  const double s2 = rho * psi2p * D2 * D2;
  const double r = f - s1 / D1 - s2 / D2;
  const double a = r;
  const double b = -(r * (D1 + D2) + s1 + s2);
  const double c = r * D1 * D2 + s1 * D2 + s2 * D1;
  if (a == 0.0) {
    if (b == 0.0) return false;
    t_small = -c / b;
    t_other = t_small;
    return std::isfinite(t_small);
  }
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0 || !std::isfinite(disc)) return false;
  const double sq = std::sqrt(disc);
  const double q = -0.5 * (b + (b >= 0.0 ? sq : -sq));
  const double t1 = q / a;
  const double t2 = (q != 0.0) ? c / q : t1;
  if (std::abs(t1) <= std::abs(t2)) {
    t_small = t1;
    t_other = t2;
  } else {
    t_small = t2;
    t_other = t1;
  }
  return std::isfinite(t_small) && std::isfinite(t_other);
}

inline SecularRoot solve_one_root(const SecularSystem& sys, Index i,
                                  SecularRootDiagnostics* diag) {
  const Index K = sys.size();
  const double rho = sys.rho;

  if (K == 1) {
    if (diag) *diag = {0, rho, rho, 0.0};
    return {0, rho, sys.d[0] + rho};
  }

  Vector delta(K);

  // Bracket and anchor. Interior root i lies in (d_i, d_{i+1}); the last
  // root lies in (d_{K-1}, d_{K-1} + rho].
  Index anchor, left, right;
  double lo, hi;       // open bracket for mu, relative to anchor
  double mid_mu = 0.0;  // bracket-selection evaluation point, anchor-relative
  Index mid_evals = 0;
  if (i < K - 1) {
    left = i;
    right = i + 1;
    const double gap = sys.d[right] - sys.d[left];
    const auto mid = eval_secular(sys, left, 0.5 * gap, delta);
    mid_evals = 1;
    if (mid.f >= 0.0) {
      anchor = left;
      lo = 0.0;
      hi = 0.5 * gap;
      mid_mu = 0.5 * gap;
    } else {
      anchor = right;
      lo = -0.5 * gap;
      hi = 0.0;
      mid_mu = -0.5 * gap;
    }
  } else {
    left = K - 2;
    right = K - 1;
    anchor = K - 1;
    lo = 0.0;
    hi = rho;
  }

  double mu = 0.5 * (lo + hi);
  if (!(mu > lo && mu < hi)) mu = std::nextafter(lo, hi);

  SecularRootDiagnostics d{mid_evals, mu, mu, 0.0};
  if (mid_evals) {
    d.eval_min = std::min(d.eval_min, mid_mu);
    d.eval_max = std::max(d.eval_max, mid_mu);
  }
  const double res_factor = 8.0 * static_cast<double>(K) * kEps;

  double f = 0.0;
  for (int iter = 0; iter < 100; ++iter) {
    ++d.iterations;
    d.eval_min = std::min(d.eval_min, mu);
    d.eval_max = std::max(d.eval_max, mu);

    const auto ev = eval_secular(sys, anchor, mu, delta);
    f = ev.f;
    d.residual = std::abs(f);
    if (std::abs(f) <= res_factor * (1.0 + rho * ev.abs_sum)) break;

    if (f > 0.0)
      hi = mu;
    else
      lo = mu;

    // split derivative sums at the bracketing poles
    double psi1p = 0.0, psi2p = 0.0;
    for (Index k = 0; k <= left; ++k) psi1p += sys.z[k] * sys.z[k] / (delta[k] * delta[k]);
    for (Index k = right; k < K; ++k) psi2p += sys.z[k] * sys.z[k] / (delta[k] * delta[k]);
    const double D1 = delta[left];
    const double D2 = (i < K - 1) ? delta[right] : delta[K - 1];

    double step = 0.0, step_other = 0.0;
    bool have_model = model_step(f, rho, psi1p, psi2p, D1, D2, step, step_other);
    double mu_next = mu + step;
    if (have_model && !(mu_next > lo && mu_next < hi)) {
      mu_next = mu + step_other;
      if (!(mu_next > lo && mu_next < hi)) have_model = false;
    }
    if (!have_model) mu_next = 0.5 * (lo + hi);
    if (!(mu_next > lo && mu_next < hi)) break;  // bracket exhausted at this precision

    const double change = std::abs(mu_next - mu);
    mu = mu_next;
    if (change <= 2.0 * kEps * std::abs(mu)) {
      ++d.iterations;
      d.eval_min = std::min(d.eval_min, mu);
      d.eval_max = std::max(d.eval_max, mu);
      const auto last = eval_secular(sys, anchor, mu, delta);
      d.residual = std::abs(last.f);
      f = last.f;
      break;
    }
    if (iter == 99)
      throw ConvergenceError("secular root " + std::to_string(i) + " did not converge in [" +
                             std::to_string(sys.d[anchor] + lo) + ", " +
                             std::to_string(sys.d[anchor] + hi) + "]");
  }

  if (diag) *diag = d;
  return {anchor, mu, sys.d[anchor] + mu};
}

}  // namespace detail

/// All K roots of f(lambda) = 1 + rho * sum z_k^2 / (d_k - lambda),
/// ascending, each anchored at its nearest bracketing pole. Safeguarded
/// rational iteration; every evaluation stays inside the root's bracket.
inline std::vector<SecularRoot> solve_secular(const SecularSystem& sys,
                                              std::vector<SecularRootDiagnostics>* diags = nullptr,
                                              FlopCounter* fc = nullptr) {
  const Index K = sys.size();
  std::vector<SecularRoot> roots(K);
  if (diags) diags->assign(K, {});
  std::uint64_t evals = 0;
  for (Index i = 0; i < K; ++i) {
    SecularRootDiagnostics d;
    roots[i] = detail::solve_one_root(sys, i, &d);
    if (diags) (*diags)[i] = d;
    evals += static_cast<std::uint64_t>(d.iterations);
  }
  count(fc, evals * 6ull * static_cast<std::uint64_t>(K));
  return roots;
}

/// Recompute the rank-one vector so the computed roots are the exact
/// eigenvalues of D + rho * zhat zhat^T. Products are accumulated ratio by
/// ratio with pole differences matched against root offsets, which keeps
/// every factor near one and free of cancellation.
inline Vector lowner_reweight(const SecularSystem& sys, const std::vector<SecularRoot>& roots,
                              FlopCounter* fc = nullptr) {
  const Index K = sys.size();
  if (static_cast<Index>(roots.size()) != K)
    throw DimensionMismatch("lowner_reweight: root count mismatch");
  Vector z_hat(K);
  for (Index i = 0; i < K; ++i) {
    double prod = 1.0;
    for (Index j = 0; j < K; ++j) {
      if (j == i) continue;
      const double num = (sys.d[roots[j].pole] - sys.d[i]) + roots[j].mu;  // lambda_j - d_i
      const double den = sys.d[j] - sys.d[i];
      prod *= num / den;
    }
    const double own = (sys.d[roots[i].pole] - sys.d[i]) + roots[i].mu;  // lambda_i - d_i
    const double val = own * prod / sys.rho;
    if (val < 0.0) {
      if (val < -1e3 * kEps * std::abs(own * prod / sys.rho) - 1e-300)
        throw NumericError("lowner_reweight: negative radicand at index " + std::to_string(i) +
                           " (corrupted roots)");
      z_hat[i] = 0.0;
      continue;
    }
    z_hat[i] = std::copysign(std::sqrt(val), sys.z[i]);
  }
  count(fc, 4ull * static_cast<std::uint64_t>(K) * static_cast<std::uint64_t>(K));
  return z_hat;
}

/// Entry-addressable evaluator of the normalized eigenvector matrix of
/// D + rho * zhat zhat^T. Column i is zhat_k / (d_k - lambda_i) scaled to
/// unit norm with its first component nonnegative. Serves as both the
/// column oracle and the sampling operator for structured compression.
class QhatEvaluator {
 public:
  QhatEvaluator(const SecularSystem& sys, Vector z_hat, std::vector<SecularRoot> roots)
      : d_(sys.d), z_hat_(std::move(z_hat)), roots_(std::move(roots)) {
    const Index K = d_.size();
    if (z_hat_.size() != K || static_cast<Index>(roots_.size()) != K)
      throw DimensionMismatch("qhat: system/root sizes differ");
    scale_.resize(K);
    for (Index j = 0; j < K; ++j) {
      double nrm2 = 0.0;
      for (Index k = 0; k < K; ++k) {
        const double v = z_hat_[k] / delta(k, j);
        nrm2 += v * v;
      }
      const double inv = (nrm2 > 0.0) ? 1.0 / std::sqrt(nrm2) : 1.0;
      const double first = z_hat_[0] / delta(0, j);
      scale_[j] = (first < 0.0) ? -inv : inv;
    }
  }

  Index size() const { return d_.size(); }

  double delta(Index k, Index j) const { return (d_[k] - d_[roots_[j].pole]) - roots_[j].mu; }

  double entry(Index k, Index j) const { return scale_[j] * z_hat_[k] / delta(k, j); }

  Vector column(Index j) const {
    const Index K = size();
    Vector v(K);
    for (Index k = 0; k < K; ++k) v[k] = entry(k, j);
    return v;
  }

  /// Y = Q X (or Q^T X). Entries are generated panel by panel and folded
  /// with a dense product; O(K^2 cols) and reproducible for fixed inputs.
  Matrix apply(const Matrix& X, bool transpose, FlopCounter* fc = nullptr) const {
    const Index K = size();
    if (X.rows() != K) throw DimensionMismatch("qhat apply: X row count mismatch");
    const Index cols = X.cols();
    Matrix Y(K, cols);
    constexpr Index kPanel = 256;
    if (!transpose) {
      Matrix panel;
      for (Index r0 = 0; r0 < K; r0 += kPanel) {
        const Index h = std::min(kPanel, K - r0);
        panel.resize(h, K);
        for (Index j = 0; j < K; ++j)
          for (Index r = 0; r < h; ++r) panel(r, j) = entry(r0 + r, j);
        Y.middleRows(r0, h).noalias() = panel * X;
        count(fc, static_cast<std::uint64_t>(h) * K * (5ull + 2ull * cols));
      }
    } else {
      Matrix panel;
      for (Index c0 = 0; c0 < K; c0 += kPanel) {
        const Index w = std::min(kPanel, K - c0);
        panel.resize(K, w);
        for (Index j = 0; j < w; ++j)
          for (Index k = 0; k < K; ++k) panel(k, j) = entry(k, c0 + j);
        Y.middleRows(c0, w).noalias() = panel.transpose() * X;
        count(fc, static_cast<std::uint64_t>(w) * K * (5ull + 2ull * cols));
      }
    }
    return Y;
  }

 private:
  Vector d_;
  Vector z_hat_;
  std::vector<SecularRoot> roots_;
  Vector scale_;
};

/// Single normalized eigenvector column for one root.
inline Vector qhat_column(const SecularSystem& sys, const Vector& z_hat,
                          const std::vector<SecularRoot>& roots, Index i) {
  return QhatEvaluator(sys, z_hat, roots).column(i);
}

/// Q X or Q^T X without forming Q: convenience wrapper over the evaluator.
inline Matrix qhat_apply(const SecularSystem& sys, const Vector& z_hat,
                         const std::vector<SecularRoot>& roots, const Matrix& X, bool transpose,
                         FlopCounter* fc = nullptr) {
  return QhatEvaluator(sys, z_hat, roots).apply(X, transpose, fc);
}

}  // namespace hdc

#endif  // HDC_SECULAR_HPP
