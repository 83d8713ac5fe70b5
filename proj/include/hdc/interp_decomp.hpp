#ifndef HDC_INTERP_DECOMP_HPP
#define HDC_INTERP_DECOMP_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "hdc/common.hpp"
#include "hdc/flops.hpp"

namespace hdc {

/// Row interpolative decomposition M ~ interp * M(selected, :). The rows
/// of interp at the selected positions form an exact identity.
struct InterpDecomposition {
  Matrix interp;                // m x rank
  std::vector<Index> selected;  // rank row indices of M
  bool capped = false;          // stopped by max_rank, not by tolerance

  Index rank() const { return static_cast<Index>(selected.size()); }
};

/// Row ID by column-pivoted Householder triangularization of M^T with the
/// diagonal-decay stopping rule |R_kk| <= tol * |R_11|. Pivot column norms
/// are recomputed each step; ties take the lowest index, so the result is
/// a deterministic function of the input bits. max_rank < 0 means no cap.
inline InterpDecomposition interpolative_decomposition(const Matrix& M, double tol,
                                                       Index max_rank = -1,
                                                       FlopCounter* fc = nullptr) {
  const Index m = M.rows(), s = M.cols();
  if (!(tol >= 0.0)) throw InvalidParameter("interpolative decomposition: tol must be >= 0");
  if (!all_finite(M.data(), m * s)) throw NumericError("interpolative decomposition: non-finite input");

  InterpDecomposition out;
  if (m == 0 || s == 0) {
    out.interp.resize(m, 0);
    return out;
  }

  Matrix A = M.transpose();  // s x m, factored in place
  std::vector<Index> piv(m);
  std::iota(piv.begin(), piv.end(), Index(0));

  const Index kmax = std::min(s, m);
  Index r = 0;
  double r00 = 0.0;
  std::uint64_t flops = 0;

  for (Index k = 0; k < kmax; ++k) {
    if (max_rank >= 0 && k >= max_rank) {
      out.capped = true;
      break;
    }
    Index best = -1;
    double best2 = -1.0;
    for (Index j = k; j < m; ++j) {
      const double nrm2 = A.col(j).tail(s - k).squaredNorm();
      if (nrm2 > best2) {
        best2 = nrm2;
        best = j;
      }
    }
    flops += 2ull * static_cast<std::uint64_t>(s - k) * static_cast<std::uint64_t>(m - k);
    const double pivnorm = std::sqrt(std::max(best2, 0.0));
    if (k == 0) {
      r00 = pivnorm;
      if (r00 == 0.0) break;
    } else if (pivnorm <= tol * r00) {
      break;
    }

    if (best != k) {
      A.col(k).swap(A.col(best));
      std::swap(piv[k], piv[best]);
    }

    // reflector zeroing A(k+1:, k); v normalized as x - beta*e1
    const Index h = s - k;
    const double alpha = A(k, k);
    double beta = -std::copysign(pivnorm, alpha);
    Vector v = A.col(k).tail(h);
    v[0] -= beta;
    const double vnorm2 = v.squaredNorm();
    if (vnorm2 > 0.0) {
      for (Index j = k + 1; j < m; ++j) {
        auto tail = A.col(j).tail(h);
        const double dot = v.dot(tail);
        tail -= (2.0 * dot / vnorm2) * v;
      }
      flops += 4ull * static_cast<std::uint64_t>(h) * static_cast<std::uint64_t>(m - k - 1);
    }
    A(k, k) = beta;
    A.col(k).tail(h - 1).setZero();
    r = k + 1;
  }

  out.selected.assign(piv.begin(), piv.begin() + r);
  out.interp = Matrix::Zero(m, r);
  for (Index k = 0; k < r; ++k) out.interp(piv[k], k) = 1.0;
  if (r > 0 && r < m) {
    // remaining rows expressed through the selected ones: R11^{-1} R12
    Matrix T = A.topLeftCorner(r, r).triangularView<Eigen::Upper>().solve(
        A.block(0, r, r, m - r));
    flops += static_cast<std::uint64_t>(r) * static_cast<std::uint64_t>(r) *
             static_cast<std::uint64_t>(m - r);
    for (Index j = 0; j < m - r; ++j) out.interp.row(piv[r + j]) = T.col(j).transpose();
  }
  count(fc, flops);
  return out;
}

}  // namespace hdc

#endif  // HDC_INTERP_DECOMP_HPP
