#ifndef HDC_MATGEN_HPP
#define HDC_MATGEN_HPP

#include <cmath>
#include <string>

#include "hdc/common.hpp"
#include "hdc/tridiagonal.hpp"

namespace hdc {
namespace matgen {

/// Kac/Clement matrix of dimension n: zero diagonal,
/// offdiag[i] = sqrt((i+1) * (n-1-i)). Exact spectrum {n-1-2k, k=0..n-1}.
inline SymTridiagonal clement(Index n) {
  if (n < 1) throw InvalidDimension("clement: n must be positive");
  SymTridiagonal T;
  T.diag = Vector::Zero(n);
  T.offdiag.resize(n - 1);
  for (Index i = 0; i + 1 < n; ++i)
    T.offdiag[i] = std::sqrt(static_cast<double>(i + 1) * static_cast<double>(n - 1 - i));
  return T;
}

/// Hermite recurrence matrix: zero diagonal, offdiag[i] = sqrt(i+1).
inline SymTridiagonal hermite(Index n) {
  if (n < 1) throw InvalidDimension("hermite: n must be positive");
  SymTridiagonal T;
  T.diag = Vector::Zero(n);
  T.offdiag.resize(n - 1);
  for (Index i = 0; i + 1 < n; ++i) T.offdiag[i] = std::sqrt(static_cast<double>(i + 1));
  return T;
}

/// Toeplitz tridiagonal with diagonal 2 and off-diagonal 1.
/// Exact spectrum 2 + 2 cos(k pi / (n+1)), k = 1..n.
inline SymTridiagonal toeplitz211(Index n) {
  if (n < 1) throw InvalidDimension("toeplitz211: n must be positive");
  SymTridiagonal T;
  T.diag = Vector::Constant(n, 2.0);
  T.offdiag = Vector::Constant(n - 1, 1.0);
  return T;
}

inline double toeplitz211_eigenvalue(Index n, Index k) {
  // k = 1..n, ascending order is k = n..1
  return 2.0 + 2.0 * std::cos(static_cast<double>(k) * M_PI / static_cast<double>(n + 1));
}

namespace detail {

inline double sht_c(double l, double m) {
  const double num = (l - m + 1.0) * (l - m + 2.0) * (l + m + 1.0) * (l + m + 2.0);
  const double den = (2.0 * l + 1.0) * (2.0 * l + 3.0) * (2.0 * l + 3.0) * (2.0 * l + 5.0);
  return std::sqrt(num / den);
}

inline double sht_d(double l, double m) {
  return (2.0 * l * (l + 1.0) - 2.0 * m * m - 1.0) / ((2.0 * l - 1.0) * (2.0 * l + 3.0));
}

}  // namespace detail

/// Spherical-harmonic-transform recurrence matrix: diag[j] = d_{m+2j},
/// offdiag[j] = c_{m+2j}.
inline SymTridiagonal sht(Index n, Index m) {
  if (n < 1) throw InvalidDimension("sht: n must be positive");
  if (m < 0) throw InvalidParameter("sht: m must be nonnegative");
  SymTridiagonal T;
  T.diag.resize(n);
  T.offdiag.resize(n - 1);
  const double md = static_cast<double>(m);
  for (Index j = 0; j < n; ++j) {
    const double l = md + 2.0 * static_cast<double>(j);
    T.diag[j] = detail::sht_d(l, md);
    if (j + 1 < n) T.offdiag[j] = detail::sht_c(l, md);
  }
  return T;
}

enum class ToeplitzKind { DiagDominant, Kinetic };

/// Dense Toeplitz test entries. DiagDominant: a_ii = n^2, a_ij = i - j
/// (1-based), which is intentionally nonsymmetric. Kinetic: a_ii =
/// pi^2/(6 d^2), a_ij = (-1)^{i-j} / ((i-j)^2 d^2).
inline double toeplitz_entry(Index n, ToeplitzKind kind, double d, Index i, Index j) {
  if (kind == ToeplitzKind::DiagDominant)
    return (i == j) ? static_cast<double>(n) * static_cast<double>(n)
                    : static_cast<double>(i - j);
  if (i == j) return M_PI * M_PI / 6.0 / (d * d);
  const double k = static_cast<double>(i - j);
  const double sign = ((i - j) % 2 == 0) ? 1.0 : -1.0;
  return sign / (k * k) / (d * d);
}

inline Matrix toeplitz_dense(Index n, ToeplitzKind kind, double d = 0.1) {
  if (n < 1) throw InvalidDimension("toeplitz_dense: n must be positive");
  if (kind == ToeplitzKind::Kinetic && !(d > 0.0))
    throw InvalidParameter("toeplitz_dense: d must be positive");
  Matrix A(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) A(i, j) = toeplitz_entry(n, kind, d, i, j);
  return A;
}

}  // namespace matgen
}  // namespace hdc

#endif  // HDC_MATGEN_HPP
