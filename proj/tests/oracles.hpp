#ifndef HDC_TESTS_ORACLES_HPP
#define HDC_TESTS_ORACLES_HPP

// Reference computations for the test suite. Everything here goes through
// Eigen's own solvers or plain dense arithmetic, independent of the library
// code under test.

#include <random>
#include <utility>

#include <Eigen/Dense>

#include "hdc/tridiagonal.hpp"

namespace oracle {

using hdc::Index;
using hdc::Matrix;
using hdc::SymTridiagonal;
using hdc::Vector;

inline std::pair<Vector, Matrix> eig_sym(const Matrix& A) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(A);
  return {es.eigenvalues(), es.eigenvectors()};
}

inline Vector eigenvalues(const SymTridiagonal& T) { return eig_sym(T.to_dense()).first; }

inline Vector singular_values(const Matrix& A) {
  Eigen::BDCSVD<Matrix> svd(A);
  return svd.singularValues();
}

inline double max_abs(const Matrix& M) { return M.size() == 0 ? 0.0 : M.cwiseAbs().maxCoeff(); }

inline double orthogonality(const Matrix& U) {
  Matrix G = U * U.transpose();
  G.diagonal().array() -= 1.0;
  return max_abs(G);
}

inline SymTridiagonal random_tridiag(std::uint64_t seed, Index n, double lo = -2.0,
                                     double hi = 2.0) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  SymTridiagonal T;
  T.diag.resize(n);
  T.offdiag.resize(std::max<Index>(n - 1, 0));
  for (Index i = 0; i < n; ++i) T.diag[i] = dist(gen);
  for (Index i = 0; i + 1 < n; ++i) T.offdiag[i] = dist(gen);
  return T;
}

// Aligns columns of B to columns of A by greedy max-|dot| matching with sign
// fixing, then reports the worst deviation of AᵀB·S from the identity. Both
// inputs must have orthonormal columns; columns of (near-)degenerate
// eigenvalues are only determined up to such a permutation and sign.
inline double subspace_alignment(const Matrix& A, const Matrix& B) {
  const Matrix M = A.transpose() * B;
  const Index n = M.cols();
  Matrix aligned(M.rows(), n);
  std::vector<bool> used(static_cast<std::size_t>(M.rows()), false);
  std::vector<Index> target(static_cast<std::size_t>(n), 0);
  for (Index j = 0; j < n; ++j) {
    Index best = -1;
    double best_abs = -1.0;
    for (Index i = 0; i < M.rows(); ++i) {
      if (used[static_cast<std::size_t>(i)]) continue;
      if (std::abs(M(i, j)) > best_abs) {
        best_abs = std::abs(M(i, j));
        best = i;
      }
    }
    used[static_cast<std::size_t>(best)] = true;
    target[static_cast<std::size_t>(j)] = best;
  }
  // permute column j of M into row slot target[j] and fix the sign
  Matrix G = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    const Index i = target[static_cast<std::size_t>(j)];
    const double s = M(i, j) < 0.0 ? -1.0 : 1.0;
    G.col(i) = s * M.col(j);
  }
  G.diagonal().array() -= 1.0;
  return max_abs(G);
}

}  // namespace oracle

#endif  // HDC_TESTS_ORACLES_HPP
