#ifndef HDC_TRIDIAGONAL_HPP
#define HDC_TRIDIAGONAL_HPP

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hdc/common.hpp"

namespace hdc {

/// Symmetric tridiagonal matrix stored as its diagonal and off-diagonal.
struct SymTridiagonal {
  Vector diag;     // length n
  Vector offdiag;  // length n-1

  Index n() const { return diag.size(); }

  void validate() const {
    if (diag.size() < 1) throw InvalidDimension("tridiagonal: dimension must be positive");
    if (offdiag.size() != diag.size() - 1)
      throw InvalidDimension("tridiagonal: off-diagonal length must be n-1");
    if (!all_finite(diag.data(), diag.size()) ||
        !all_finite(offdiag.data(), offdiag.size()))
      throw NumericError("tridiagonal: non-finite entry");
  }

  Matrix to_dense() const {
    Matrix A = Matrix::Zero(n(), n());
    for (Index i = 0; i < n(); ++i) A(i, i) = diag[i];
    for (Index i = 0; i + 1 < n(); ++i) {
      A(i, i + 1) = offdiag[i];
      A(i + 1, i) = offdiag[i];
    }
    return A;
  }

  /// y = T x
  void apply(const Vector& x, Vector& y) const {
    const Index m = n();
    y.resize(m);
    for (Index i = 0; i < m; ++i) {
      double s = diag[i] * x[i];
      if (i > 0) s += offdiag[i - 1] * x[i - 1];
      if (i + 1 < m) s += offdiag[i] * x[i + 1];
      y[i] = s;
    }
  }

  double frobenius_norm() const {
    double s = diag.squaredNorm() + 2.0 * offdiag.squaredNorm();
    return std::sqrt(s);
  }
};

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& token, const std::string& what) {
  try {
    size_t pos = 0;
    double v = std::stod(token, &pos);
    if (pos != token.size()) throw ParseError(what + ": trailing characters in '" + token + "'");
    if (!std::isfinite(v)) throw ParseError(what + ": not a finite number ('" + token + "')");
    return v;
  } catch (const std::invalid_argument&) {
    throw ParseError(what + ": not a number ('" + token + "')");
  } catch (const std::out_of_range&) {
    throw ParseError(what + ": out of range ('" + token + "')");
  }
}

inline std::vector<std::string> split_tokens(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> toks;
  std::string t;
  while (is >> t) toks.push_back(t);
  return toks;
}

}  // namespace detail

/// Text format, three records:
///   line 1: n
///   line 2: n diagonal entries
///   line 3: n-1 off-diagonal entries (line present and empty for n = 1)
/// Entries are printed with 17 significant digits so read(write(T)) is
/// bit-exact.
inline std::string serialize_tridiag(const SymTridiagonal& T) {
  T.validate();
  std::ostringstream os;
  os << T.n() << "\n";
  for (Index i = 0; i < T.n(); ++i) os << (i ? " " : "") << detail::format_double(T.diag[i]);
  os << "\n";
  for (Index i = 0; i + 1 < T.n(); ++i)
    os << (i ? " " : "") << detail::format_double(T.offdiag[i]);
  os << "\n";
  return os.str();
}

inline void write_tridiag(const SymTridiagonal& T, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << serialize_tridiag(T);
  if (!out) throw IoError("write failed for '" + path + "'");
}

inline SymTridiagonal parse_tridiag(std::istream& in, const std::string& origin) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(origin + ": empty file (missing dimension record)");
  auto head = detail::split_tokens(line);
  if (head.size() != 1) throw ParseError(origin + ": dimension record must hold a single integer");
  long long n = 0;
  try {
    size_t pos = 0;
    n = std::stoll(head[0], &pos);
    if (pos != head[0].size()) throw std::invalid_argument("");
  } catch (...) {
    throw ParseError(origin + ": bad dimension '" + head[0] + "'");
  }
  if (n < 1) throw ParseError(origin + ": dimension must be positive");

  SymTridiagonal T;
  T.diag.resize(n);
  T.offdiag.resize(n - 1);

  if (!std::getline(in, line)) throw ParseError(origin + ": missing diagonal record");
  auto dtoks = detail::split_tokens(line);
  if (static_cast<long long>(dtoks.size()) != n)
    throw ParseError(origin + ": diagonal record has " + std::to_string(dtoks.size()) +
                     " entries, expected " + std::to_string(n));
  for (Index i = 0; i < n; ++i)
    T.diag[i] = detail::parse_double(dtoks[i], origin + ": diagonal entry " + std::to_string(i + 1));

  if (!std::getline(in, line)) {
    if (n == 1)
      line.clear();  // tolerate a missing trailing empty record
    else
      throw ParseError(origin + ": missing off-diagonal record");
  }
  auto otoks = detail::split_tokens(line);
  if (static_cast<long long>(otoks.size()) != n - 1)
    throw ParseError(origin + ": off-diagonal record has " + std::to_string(otoks.size()) +
                     " entries, expected " + std::to_string(n - 1));
  for (Index i = 0; i + 1 < n; ++i)
    T.offdiag[i] =
        detail::parse_double(otoks[i], origin + ": off-diagonal entry " + std::to_string(i + 1));
  return T;
}

inline SymTridiagonal read_tridiag(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return parse_tridiag(in, path);
}

/// Dense matrices share the same text style:
///   line 1: the word "dense"
///   line 2: rows cols
///   then one line per row with cols entries
inline std::string serialize_dense(const Matrix& A) {
  std::ostringstream os;
  os << "dense\n" << A.rows() << " " << A.cols() << "\n";
  for (Index i = 0; i < A.rows(); ++i) {
    for (Index j = 0; j < A.cols(); ++j) os << (j ? " " : "") << detail::format_double(A(i, j));
    os << "\n";
  }
  return os.str();
}

inline void write_dense(const Matrix& A, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << serialize_dense(A);
  if (!out) throw IoError("write failed for '" + path + "'");
}

inline Matrix read_dense(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || detail::split_tokens(line) != std::vector<std::string>{"dense"})
    throw ParseError(path + ": expected 'dense' header");
  if (!std::getline(in, line)) throw ParseError(path + ": missing shape record");
  auto shape = detail::split_tokens(line);
  if (shape.size() != 2) throw ParseError(path + ": shape record must hold rows and cols");
  long long rows = std::stoll(shape[0]), cols = std::stoll(shape[1]);
  if (rows < 1 || cols < 1) throw ParseError(path + ": shape must be positive");
  Matrix A(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    if (!std::getline(in, line)) throw ParseError(path + ": missing row " + std::to_string(i + 1));
    auto toks = detail::split_tokens(line);
    if (static_cast<long long>(toks.size()) != cols)
      throw ParseError(path + ": row " + std::to_string(i + 1) + " has " +
                       std::to_string(toks.size()) + " entries, expected " + std::to_string(cols));
    for (Index j = 0; j < cols; ++j)
      A(i, j) = detail::parse_double(
          toks[j], path + ": entry (" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
  }
  return A;
}

/// FNV-1a over the serialized text; the CLI prints it after gen.
inline std::uint64_t content_checksum(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace hdc

#endif  // HDC_TRIDIAGONAL_HPP
