// Seeded instance generators: Wigner noise, random sparsification, low-rank
// ground matrices with prescribed spectra, and rectangular Gaussian noise.
//
// Everything is a pure function of (spec, seed) through the counter-based
// generator in rng.hpp, so identical specs produce bit-identical matrices.

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "perturb/errors.hpp"
#include "perturb/rng.hpp"
#include "perturb/spectral.hpp"

namespace perturb {

enum class SubGaussian { Gaussian, Rademacher };

struct NoiseSpec {
  enum class Kind { Wigner, Sparsify, CustomFile } kind = Kind::Wigner;
  Eigen::Index n = 1;
  std::uint64_t seed = 0;
  double rho = 1.0;                                // sparsify only, in (0, 1]
  double entry_bound_k = 0.0;                      // sparsify only, recorded ||A||_inf
  SubGaussian subgaussian = SubGaussian::Gaussian; // wigner only
};

struct GroundSpec {
  Eigen::Index n = 1;
  Eigen::Index rank = 1;
  Eigen::VectorXd spectrum;  // nonzero values, descending by absolute value
  std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// Wigner matrices

// Random symmetric matrix whose upper-triangle (including diagonal) entries
// are i.i.d. mean-0 variance-1 sub-Gaussian draws; ||E|| concentrates near
// 2 sqrt(n).
inline SymmetricMatrix wigner(const NoiseSpec& spec) {
  if (spec.kind != NoiseSpec::Kind::Wigner) throw ArgumentError("wigner: spec.kind mismatch");
  if (spec.n < 1) throw ArgumentError("wigner: need n >= 1");
  const Eigen::Index n = spec.n;
  Eigen::MatrixXd e(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const std::uint64_t stream = static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(n) +
                                   static_cast<std::uint64_t>(j);
      const double v = spec.subgaussian == SubGaussian::Gaussian
                           ? rng::gaussian(spec.seed, stream, 0)
                           : rng::rademacher(spec.seed, stream, 0);
      e(i, j) = v;
      e(j, i) = v;
    }
  }
  return SymmetricMatrix(e);
}

inline SymmetricMatrix wigner(Eigen::Index n, std::uint64_t seed,
                              SubGaussian law = SubGaussian::Gaussian) {
  NoiseSpec spec;
  spec.kind = NoiseSpec::Kind::Wigner;
  spec.n = n;
  spec.seed = seed;
  spec.subgaussian = law;
  return wigner(spec);
}

// i.i.d. standard normal m x n matrix (rectangular noise).
inline Eigen::MatrixXd rectangular_gaussian(Eigen::Index m, Eigen::Index n, std::uint64_t seed) {
  if (m < 1 || n < 1) throw ArgumentError("rectangular_gaussian: need m, n >= 1");
  return rng::gaussian_matrix(m, n, seed);
}

// ---------------------------------------------------------------------------
// Sparsification

struct SparsifyResult {
  SymmetricMatrix a_tilde;  // kept entries scaled by 1/rho; E[~A] = A entrywise
  SymmetricMatrix noise;    // E = ~A - A
  double entry_bound_k = 0.0;
  long kept_entries = 0;  // nnz of ~A, for multiply-count accounting
};

// Keeps each symmetric entry pair {i,j} (diagonal entries count as their own
// pair) independently with probability rho and rescales survivors by 1/rho.
// Surviving entries are exactly A_ij / rho, bit for bit.
inline SparsifyResult sparsify(const SymmetricMatrix& a, double rho, std::uint64_t seed) {
  if (!(rho > 0.0) || rho > 1.0) throw ArgumentError("sparsify: rho must be in (0, 1]");
  const Eigen::Index n = a.size();
  Eigen::MatrixXd kept = Eigen::MatrixXd::Zero(n, n);
  long nnz = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const std::uint64_t stream = static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(n) +
                                   static_cast<std::uint64_t>(j);
      if (rng::uniform01(seed, stream, 0) <= rho) {
        const double v = a(i, j) / rho;
        kept(i, j) = v;
        kept(j, i) = v;
        if (v != 0.0) nnz += (i == j) ? 1 : 2;
      }
    }
  }
  SparsifyResult out{SymmetricMatrix(kept), SymmetricMatrix(kept - a.matrix()),
                     a.max_abs_entry(), nnz};
  return out;
}

// Advisory flag for the sparsification density regime: rho * n / log^4(n) >= 1.
inline bool sparsify_density_advisory_ok(Eigen::Index n, double rho) {
  if (n < 2) return true;
  const double l = std::log(static_cast<double>(n));
  return rho * static_cast<double>(n) / (l * l * l * l) >= 1.0;
}

// ---------------------------------------------------------------------------
// Low-rank ground truth

struct GroundInstance {
  SymmetricMatrix a;
  SpectralData data;
};

// A = sum_i s_i q_i q_i^T with prescribed nonzero spectrum and a seeded
// orthonormal frame Q.  The returned SpectralData is assembled from the
// construction itself: prescribed values padded with zeros, sorted
// descending, with the orthonormal complement filling the kernel.
inline GroundInstance low_rank_ground(const GroundSpec& spec) {
  if (spec.n < 1) throw ArgumentError("low_rank_ground: need n >= 1");
  if (spec.rank < 1 || spec.rank > spec.n)
    throw ArgumentError("low_rank_ground: need 1 <= rank <= n");
  if (spec.spectrum.size() != spec.rank)
    throw ArgumentError("low_rank_ground: spectrum length must equal rank");
  for (Eigen::Index i = 0; i < spec.rank; ++i) {
    if (spec.spectrum(i) == 0.0)
      throw ArgumentError("low_rank_ground: prescribed spectrum entries must be nonzero");
    if (i + 1 < spec.rank && std::abs(spec.spectrum(i)) < std::abs(spec.spectrum(i + 1)))
      throw ArgumentError("low_rank_ground: spectrum must be descending in absolute value");
  }
  const Eigen::Index n = spec.n;

  // Full orthonormal frame from a seeded Gaussian matrix; R's diagonal signs
  // are absorbed into Q so the frame is a deterministic function of the seed.
  Eigen::MatrixXd gauss = rng::gaussian_matrix(n, n, spec.seed);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gauss);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < n; ++i)
    if (r(i, i) < 0.0) q.col(i) = -q.col(i);

  // Order: positives descending, kernel zeros, negatives descending.
  struct Pair {
    double value;
    Eigen::Index col;  // column of q (construction order); -1 marks kernel fill
  };
  std::vector<Pair> pairs;
  pairs.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < spec.rank; ++i) pairs.push_back({spec.spectrum(i), i});
  for (Eigen::Index i = spec.rank; i < n; ++i) pairs.push_back({0.0, i});
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const Pair& a, const Pair& b) { return a.value > b.value; });

  GroundInstance out{SymmetricMatrix::zero(n), {}};
  out.data.eigenvalues.resize(n);
  out.data.eigenvectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.data.eigenvalues(i) = pairs[static_cast<std::size_t>(i)].value;
    out.data.eigenvectors.col(i) = q.col(pairs[static_cast<std::size_t>(i)].col);
    detail::fix_sign(out.data.eigenvectors.col(i));
  }
  out.data.source_norm =
      spec.rank > 0 ? std::abs(spec.spectrum(0)) : 0.0;

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < spec.rank; ++i) {
    const auto qi = q.col(i);
    a.noalias() += spec.spectrum(i) * qi * qi.transpose();
  }
  out.a = SymmetricMatrix(a);
  return out;
}

inline GroundInstance low_rank_ground(Eigen::Index n, const Eigen::VectorXd& spectrum,
                                      std::uint64_t seed) {
  GroundSpec spec;
  spec.n = n;
  spec.rank = spectrum.size();
  spec.spectrum = spectrum;
  spec.seed = seed;
  return low_rank_ground(spec);
}

// Rectangular ground truth A = U diag(sigma) V^T with seeded orthonormal
// factors; used by the singular-space and rectangular experiments.
struct RectangularGround {
  Eigen::MatrixXd a;
  Eigen::MatrixXd u;  // m x r
  Eigen::MatrixXd v;  // n x r
  Eigen::VectorXd sigma;
};

inline RectangularGround rectangular_ground(Eigen::Index m, Eigen::Index n,
                                            const Eigen::VectorXd& sigma, std::uint64_t seed) {
  const Eigen::Index r = sigma.size();
  if (r < 1 || r > std::min(m, n))
    throw ArgumentError("rectangular_ground: need 1 <= #singular values <= min(m,n)");
  for (Eigen::Index i = 0; i < r; ++i) {
    if (sigma(i) <= 0.0) throw ArgumentError("rectangular_ground: singular values must be positive");
    if (i + 1 < r && sigma(i) < sigma(i + 1))
      throw ArgumentError("rectangular_ground: singular values must be descending");
  }
  auto orthonormal = [](Eigen::Index rows, Eigen::Index cols, std::uint64_t s) {
    Eigen::MatrixXd g = rng::gaussian_matrix(rows, rows, s);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd rr = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index i = 0; i < rows; ++i)
      if (rr(i, i) < 0.0) q.col(i) = -q.col(i);
    return q.leftCols(cols).eval();
  };
  RectangularGround out;
  out.u = orthonormal(m, r, seed);
  out.v = orthonormal(n, r, seed + 0x9E37u);
  out.sigma = sigma;
  out.a = out.u * sigma.asDiagonal() * out.v.transpose();
  return out;
}

}  // namespace perturb
