#ifndef HDC_JACOBI_HPP
#define HDC_JACOBI_HPP

#include <algorithm>
#include <numeric>
#include <vector>

#include "hdc/common.hpp"
#include "hdc/flops.hpp"

namespace hdc {

/// Cyclic Jacobi for a dense symmetric matrix. Unconditionally orthogonal,
/// used for the recursion base blocks where its cubic cost is negligible.
/// Returns ascending eigenvalues in `values` and the matching eigenvector
/// columns in `vectors`.
inline void jacobi_eigensolve(Matrix A, Vector& values, Matrix& vectors,
                              FlopCounter* fc = nullptr) {
  const Index n = A.rows();
  if (n != A.cols()) throw DimensionMismatch("jacobi: matrix must be square");
  vectors = Matrix::Identity(n, n);
  values.resize(n);
  if (n == 1) {
    values[0] = A(0, 0);
    return;
  }

  const double norm = A.norm();
  const double stop = static_cast<double>(n) * kEps * norm;

  const int max_sweeps = 64;
  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < j; ++i) off += A(i, j) * A(i, j);
    off = std::sqrt(2.0 * off);
    if (off <= stop || norm == 0.0) break;

    for (Index p = 0; p < n - 1; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const double apq = A(p, q);
        if (apq == 0.0) continue;
        // skip rotations that cannot change the result
        if (std::abs(apq) < 0.25 * kEps * stop) continue;
        const double tau = (A(q, q) - A(p, p)) / (2.0 * apq);
        const double t = (tau >= 0.0) ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                      : -1.0 / (-tau + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        for (Index k = 0; k < n; ++k) {
          const double akp = A(k, p), akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (Index k = 0; k < n; ++k) {
          const double apk = A(p, k), aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
        for (Index k = 0; k < n; ++k) {
          const double vkp = vectors(k, p), vkq = vectors(k, q);
          vectors(k, p) = c * vkp - s * vkq;
          vectors(k, q) = s * vkp + c * vkq;
        }
        count(fc, 18ull * static_cast<std::uint64_t>(n));
      }
    }
  }
  if (sweep == max_sweeps) throw ConvergenceError("jacobi: sweep limit reached");

  for (Index i = 0; i < n; ++i) values[i] = A(i, i);

  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index(0));
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return values[a] < values[b]; });
  Vector sorted_values(n);
  Matrix sorted_vectors(n, n);
  for (Index k = 0; k < n; ++k) {
    sorted_values[k] = values[order[k]];
    sorted_vectors.col(k) = vectors.col(order[k]);
  }
  values.swap(sorted_values);
  vectors.swap(sorted_vectors);
}

}  // namespace hdc

#endif  // HDC_JACOBI_HPP
