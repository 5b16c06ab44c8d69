// Counter-based random source (SplitMix64 used in counter mode).
//
// Every random value is a pure function of (seed, stream, counter), so
// matrices can be filled entry-by-entry in any order -- including in
// parallel -- and the result is bit-identical to sequential generation.
// Streams are split per entry: stream id = row*n + col for matrix fills.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

#include <Eigen/Core>

namespace perturb {

namespace rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// SplitMix64 finalizer: a 64-bit bijective mixer.
inline std::uint64_t mix(std::uint64_t z) {
  z += kGolden;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Random 64-bit word at (seed, stream, counter).
inline std::uint64_t word(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  const std::uint64_t key = mix(seed ^ mix(stream));
  return mix(key + counter * kGolden);
}

// Uniform in (0, 1]: 53 mantissa bits, never exactly 0 (safe for log()).
inline double uniform01(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  return static_cast<double>((word(seed, stream, counter) >> 11) + 1) * 0x1.0p-53;
}

// Standard normal via Box-Muller; consumes counters 2k and 2k+1.
inline double gaussian(std::uint64_t seed, std::uint64_t stream, std::uint64_t pair_index) {
  const double u1 = uniform01(seed, stream, 2 * pair_index);
  const double u2 = uniform01(seed, stream, 2 * pair_index + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// Rademacher +/-1.
inline double rademacher(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  return (word(seed, stream, counter) & 1ull) ? 1.0 : -1.0;
}

// Seeded n x m matrix of i.i.d. standard normals (stream split per entry).
inline Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      m(i, j) = gaussian(seed, static_cast<std::uint64_t>(i) * cols + j, 0);
  return m;
}

// Seeded uniform draw from the unit sphere in R^n.
inline Eigen::VectorXd unit_vector(Eigen::Index n, std::uint64_t seed) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = gaussian(seed, static_cast<std::uint64_t>(i), 0);
  const double norm = v.norm();
  // A vanishing Gaussian vector has probability ~0; perturb deterministically if it happens.
  if (norm == 0.0) {
    v.setZero();
    v(0) = 1.0;
    return v;
  }
  return v / norm;
}

}  // namespace rng

}  // namespace perturb
