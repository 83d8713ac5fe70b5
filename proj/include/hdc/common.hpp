#ifndef HDC_COMMON_HPP
#define HDC_COMMON_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace hdc {

#define HDC_VERSION_STRING "1.0.0"

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;   // column-major dense matrix
using Vector = Eigen::VectorXd;

inline constexpr double kEps = std::numeric_limits<double>::epsilon();

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct InvalidDimension : Error {
  explicit InvalidDimension(const std::string& msg) : Error(msg) {}
};

struct InvalidParameter : Error {
  explicit InvalidParameter(const std::string& msg) : Error(msg) {}
};

struct DimensionMismatch : Error {
  explicit DimensionMismatch(const std::string& msg) : Error(msg) {}
};

struct ParseError : Error {
  explicit ParseError(const std::string& msg) : Error(msg) {}
};

struct NumericError : Error {
  explicit NumericError(const std::string& msg) : Error(msg) {}
};

struct ConvergenceError : Error {
  explicit ConvergenceError(const std::string& msg) : Error(msg) {}
};

struct IoError : Error {
  explicit IoError(const std::string& msg) : Error(msg) {}
};

inline bool all_finite(const double* data, Index n) {
  for (Index i = 0; i < n; ++i)
    if (!std::isfinite(data[i])) return false;
  return true;
}

}  // namespace hdc

#endif  // HDC_COMMON_HPP
