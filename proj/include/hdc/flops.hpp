#ifndef HDC_FLOPS_HPP
#define HDC_FLOPS_HPP

#include <cstdint>

#include "hdc/common.hpp"

namespace hdc {

/// Accumulator for floating-point operation counts. Counts are analytic
/// (2mnk per matrix product and so on), deterministic, and additive, so
/// they can be compared across algorithmic paths.
struct FlopCounter {
  std::uint64_t flops = 0;

  void add(std::uint64_t f) { flops += f; }
  void add_gemm(Index m, Index n, Index k) {
    flops += 2ull * static_cast<std::uint64_t>(m) * static_cast<std::uint64_t>(n) *
             static_cast<std::uint64_t>(k);
  }
};

inline void count(FlopCounter* c, std::uint64_t f) {
  if (c) c->flops += f;
}

namespace kernel {

// Deterministic small matrix products used by the structured passes.
// The reduction order for each output column is fixed (k ascending, rows
// ascending) and independent of how callers block their column sets, so
// results are bit-stable across block widths.

/// y += A * x with A m-by-k (column-major), x length k, y length m.
inline void gemv_acc(const Matrix& A, const double* x, double* y, FlopCounter* fc) {
  const Index m = A.rows(), k = A.cols();
  for (Index j = 0; j < k; ++j) {
    const double xj = x[j];
    const double* col = A.data() + j * m;
    for (Index i = 0; i < m; ++i) y[i] += col[i] * xj;
  }
  count(fc, 2ull * m * k);
}

/// y += A^T * x with A k-by-m, x length k, y length m.
inline void gemv_trans_acc(const Matrix& A, const double* x, double* y, FlopCounter* fc) {
  const Index k = A.rows(), m = A.cols();
  for (Index j = 0; j < m; ++j) {
    const double* col = A.data() + j * k;
    double s = 0.0;
    for (Index i = 0; i < k; ++i) s += col[i] * x[i];
    y[j] += s;
  }
  count(fc, 2ull * m * k);
}

/// C += A * B, column by column.
inline void gemm_acc(const Matrix& A, const Matrix& B, Matrix& C, FlopCounter* fc) {
  for (Index j = 0; j < B.cols(); ++j)
    gemv_acc(A, B.data() + j * B.rows(), C.data() + j * C.rows(), fc);
}

/// C += A^T * B, column by column.
inline void gemm_trans_acc(const Matrix& A, const Matrix& B, Matrix& C, FlopCounter* fc) {
  for (Index j = 0; j < B.cols(); ++j)
    gemv_trans_acc(A, B.data() + j * B.rows(), C.data() + j * C.rows(), fc);
}

}  // namespace kernel

}  // namespace hdc

#endif  // HDC_FLOPS_HPP
