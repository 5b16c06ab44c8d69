// Shared helpers for the test suites: seeded instances and noise scaling.

#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "perturb/noise.hpp"
#include "perturb/spectral.hpp"

namespace testsupport {

// Wigner noise rescaled so its spectral norm is exactly `target`.
inline perturb::SymmetricMatrix scaled_wigner(Eigen::Index n, std::uint64_t seed, double target) {
  auto raw = perturb::wigner(n, seed);
  const double norm = perturb::spectral_norm(raw);
  return perturb::SymmetricMatrix(raw.matrix() * (target / norm));
}

// Random full-rank symmetric matrix with all pairwise eigenvalue gaps >= min_gap.
inline perturb::GroundInstance gapped_instance(Eigen::Index n, std::uint64_t seed,
                                               double min_gap = 0.5) {
  Eigen::VectorXd spectrum(n);
  double value = static_cast<double>(n) * 2.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    spectrum(i) = value;
    value -= min_gap + perturb::rng::uniform01(seed, 1000 + static_cast<std::uint64_t>(i), 0);
  }
  return perturb::low_rank_ground(n, spectrum, seed);
}

// Low-rank instance with the spectrum (100, 90, 40, 10) padded by zeros:
// p = 1 satisfies the moderate-gap window for ||E|| <= 2.5.
inline perturb::GroundInstance window_instance(Eigen::Index n, std::uint64_t seed) {
  Eigen::VectorXd spectrum(4);
  spectrum << 100.0, 90.0, 40.0, 10.0;
  return perturb::low_rank_ground(n, spectrum, seed);
}

}  // namespace testsupport
