#ifndef HDC_RNG_HPP
#define HDC_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <string>

#include "hdc/common.hpp"

namespace hdc {

/// Philox4x32-10 counter-based generator. Stateless: every block of four
/// 32-bit words is a pure function of (key, counter), which makes any
/// entry of a random matrix addressable on its own. That keeps sampling
/// reproducible when sample columns are appended adaptively and when
/// nodes are processed in any order.
struct Philox4x32 {
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                            std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = static_cast<std::uint64_t>(ctr[0]) * kMul0;
      const std::uint64_t p1 = static_cast<std::uint64_t>(ctr[2]) * kMul1;
      const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }
};

inline const char* rng_name() { return "philox4x32-10"; }

/// Standard normal variates addressed by (seed, stream, i, j).
/// Box-Muller on two uniforms from one Philox block.
struct GaussianSampler {
  std::uint64_t seed = 0;
  std::uint32_t stream = 0;

  double operator()(Index i, Index j) const {
    const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed),
                                              static_cast<std::uint32_t>(seed >> 32)};
    const std::array<std::uint32_t, 4> ctr = {static_cast<std::uint32_t>(i),
                                              static_cast<std::uint32_t>(j), stream, 0u};
    const auto words = Philox4x32::block(ctr, key);
    // map to (0,1); +0.5 keeps u strictly inside the interval
    const double u1 = (static_cast<double>(words[0]) + 0.5) * 0x1p-32;
    const double u2 = (static_cast<double>(words[1]) + 0.5) * 0x1p-32;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  /// Fill a dense block with entries (row_offset+i, col_offset+j).
  void fill(Matrix& M, Index row_offset = 0, Index col_offset = 0) const {
    for (Index j = 0; j < M.cols(); ++j)
      for (Index i = 0; i < M.rows(); ++i)
        M(i, j) = (*this)(row_offset + i, col_offset + j);
  }
};

/// Uniform double in [lo, hi) addressed by (seed, stream, i, j); used by
/// tests and by the CLI when drawing an entropy seed is not wanted.
inline double uniform_at(std::uint64_t seed, std::uint32_t stream, Index i, Index j,
                         double lo, double hi) {
  const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed),
                                            static_cast<std::uint32_t>(seed >> 32)};
  const std::array<std::uint32_t, 4> ctr = {static_cast<std::uint32_t>(i),
                                            static_cast<std::uint32_t>(j), stream, 1u};
  const auto words = Philox4x32::block(ctr, key);
  const double u = (static_cast<double>(words[0]) + 0.5) * 0x1p-32;
  return lo + (hi - lo) * u;
}

}  // namespace hdc

#endif  // HDC_RNG_HPP
