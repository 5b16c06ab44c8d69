// Classical power iteration and its sparsified variant with an a-priori
// eigenvector error certificate.
//
// The sparsified certificate is probabilistic: it substitutes the entrywise
// concentration bounds ||E|| <= 2K sqrt(n/rho) and
// x <= (2 sqrt(2) K / sqrt(rho)) log n, and carries the failure probability
// r^2 / n^2 of the cross-term event.

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "perturb/bounds.hpp"
#include "perturb/errors.hpp"
#include "perturb/noise.hpp"
#include "perturb/rng.hpp"
#include "perturb/spectral.hpp"

namespace perturb {

struct PowerConfig {
  int max_iterations = 1000;
  double stop_tol = 1e-12;             // residual ||Mv - (v^T M v) v||
  std::uint64_t v0_seed = 0;           // seeded uniform draw on the sphere...
  std::optional<Eigen::VectorXd> v0;   // ...unless an explicit start is given
  bool early_stop = true;              // acceptance runs fix N and disable this
};

struct EigvecResult {
  Eigen::VectorXd vector;
  int iterations_used = 0;
  double rayleigh = 0.0;
  std::vector<double> alignment_history;  // |<v_k, u1>| per step, when u1 given
  bool alignment_stalled = false;          // ended far from u1 despite history
};

// v_k = M v_{k-1} / ||M v_{k-1}||, stopping at max_iterations or at the
// residual threshold.  A kernel start (||M v|| = 0) is a breakdown error.
inline EigvecResult power_iteration(const SymmetricMatrix& m, const PowerConfig& cfg,
                                    const Eigen::VectorXd* ground_truth_u1 = nullptr) {
  if (cfg.max_iterations < 1) throw ArgumentError("power_iteration: need max_iterations >= 1");
  if (!(cfg.stop_tol > 0.0)) throw ArgumentError("power_iteration: need stop_tol > 0");
  if (m.matrix().norm() == 0.0) throw ArgumentError("power_iteration: M is zero");

  const Eigen::Index n = m.size();
  Eigen::VectorXd v;
  if (cfg.v0.has_value()) {
    if (cfg.v0->size() != n) throw ArgumentError("power_iteration: v0 dimension mismatch");
    const double norm = cfg.v0->norm();
    if (norm == 0.0) throw ArgumentError("power_iteration: v0 is zero");
    v = *cfg.v0 / norm;
  } else {
    v = rng::unit_vector(n, cfg.v0_seed);
  }

  EigvecResult out;
  for (int k = 1; k <= cfg.max_iterations; ++k) {
    Eigen::VectorXd w = m.matrix() * v;
    const double wn = w.norm();
    if (wn == 0.0)
      throw NumericalError("power_iteration: breakdown at iteration " + std::to_string(k) +
                           " (iterate in the kernel)");
    v = w / wn;
    out.iterations_used = k;
    if (ground_truth_u1) out.alignment_history.push_back(std::abs(v.dot(*ground_truth_u1)));
    if (cfg.early_stop) {
      const Eigen::VectorXd mv = m.matrix() * v;
      if ((mv - v.dot(mv) * v).norm() <= cfg.stop_tol) break;
    }
  }
  out.vector = v;
  out.rayleigh = v.dot(m.matrix() * v);
  if (ground_truth_u1 && !out.alignment_history.empty())
    out.alignment_stalled = out.alignment_history.back() < 0.5;
  return out;
}

// Eigenvector distance up to sign: min(||u - w||, ||u + w||).
inline double sign_aligned_distance(const Eigen::VectorXd& u, const Eigen::VectorXd& w) {
  if (u.size() != w.size()) throw ArgumentError("sign_aligned_distance: dimension mismatch");
  return std::min((u - w).norm(), (u + w).norm());
}

// ---------------------------------------------------------------------------
// Sparsified leading eigenvector

struct SparsifiedCertificate {
  std::optional<double> value;             // (72 K / sqrt(rho)) ( sqrt(n)/|l1| log(6 s1/d1) + r^2 log n / d1 )
  std::vector<PreconditionCheck> checks;   // 8K sqrt(n/rho) <= delta_1 <= |lambda_1|/4
  double dk_comparison = 0.0;              // pi * 2 K sqrt(n/rho) / delta_1
  double failure_probability = 0.0;        // r^2 / n^2 for the cross-term event
  bool rho_advisory_ok = false;            // rho * n / log^4 n >= 1
  int halving_r = 0;
};

struct SparsifiedPowerResult {
  EigvecResult eig;
  SparsifiedCertificate certificate;
  double realized_noise_norm = 0.0;
  double observed_density = 0.0;  // nnz(~A) / n^2, the multiply-count ratio
  long kept_entries = 0;
};

inline SparsifiedCertificate sparsified_certificate(const SpectralData& d, double entry_bound_k,
                                                    double rho) {
  const int n = static_cast<int>(d.size());
  SparsifiedCertificate cert;
  const double delta_1 = d.lambda(1) - d.lambda(2);
  const double lambda_1 = d.lambda(1);
  const double noise_cap = 2.0 * entry_bound_k * std::sqrt(static_cast<double>(n) / rho);
  cert.checks.push_back(
      detail::make_check("8K sqrt(n/rho) <= delta_1", delta_1 - 4.0 * noise_cap));
  cert.checks.push_back(
      detail::make_check("delta_1 <= |lambda_1|/4", std::abs(lambda_1) / 4.0 - delta_1));
  cert.halving_r = halving_index(d, 1);
  cert.rho_advisory_ok = sparsify_density_advisory_ok(n, rho);
  cert.failure_probability = static_cast<double>(cert.halving_r) * cert.halving_r /
                             (static_cast<double>(n) * static_cast<double>(n));
  if (delta_1 > 0.0)
    cert.dk_comparison = M_PI * noise_cap / delta_1;
  if (detail::all_ok(cert.checks)) {
    const double r = cert.halving_r;
    cert.value = 72.0 * entry_bound_k / std::sqrt(rho) *
                 (std::sqrt(static_cast<double>(n)) / std::abs(lambda_1) *
                      std::log(6.0 * d.source_norm / delta_1) +
                  r * r * std::log(static_cast<double>(n)) / delta_1);
  }
  return cert;
}

// Sparsifies A, runs power iteration on ~A, and attaches the certificate.
inline SparsifiedPowerResult sparsified_leading_eigvec(const SymmetricMatrix& a,
                                                       const SpectralData& d, double rho,
                                                       std::uint64_t seed, const PowerConfig& cfg) {
  SparsifiedPowerResult out;
  auto sp = sparsify(a, rho, seed);
  const Eigen::VectorXd u1 = d.eigenvectors.col(0);
  out.eig = power_iteration(sp.a_tilde, cfg, &u1);
  out.certificate = sparsified_certificate(d, sp.entry_bound_k, rho);
  out.realized_noise_norm = spectral_norm(sp.noise);
  out.kept_entries = sp.kept_entries;
  out.observed_density =
      static_cast<double>(sp.kept_entries) / (static_cast<double>(a.size()) * a.size());
  return out;
}

inline SparsifiedPowerResult sparsified_leading_eigvec(const SymmetricMatrix& a, double rho,
                                                       std::uint64_t seed, const PowerConfig& cfg) {
  return sparsified_leading_eigvec(a, spectral_decompose(a), rho, seed, cfg);
}

// Variant fed with explicit noise (custom-file noise path): runs power
// iteration on A + E and certifies with realized quantities through the
// moderate-gap bound, converted to an eigenvector distance by sqrt(2).
inline SparsifiedPowerResult custom_noise_leading_eigvec(const SymmetricMatrix& a,
                                                         const SpectralData& d,
                                                         const SymmetricMatrix& noise,
                                                         const PowerConfig& cfg) {
  if (noise.size() != a.size())
    throw ArgumentError("custom_noise_leading_eigvec: noise dimension mismatch");
  SparsifiedPowerResult out;
  const SymmetricMatrix a_tilde(a.matrix() + noise.matrix());
  const Eigen::VectorXd u1 = d.eigenvectors.col(0);
  out.eig = power_iteration(a_tilde, cfg, &u1);
  out.realized_noise_norm = spectral_norm(noise);
  long nnz = 0;
  for (Eigen::Index i = 0; i < a_tilde.size(); ++i)
    for (Eigen::Index j = 0; j < a_tilde.size(); ++j)
      if (a_tilde(i, j) != 0.0) ++nnz;
  out.kept_entries = nnz;
  out.observed_density = static_cast<double>(nnz) / (static_cast<double>(a.size()) * a.size());

  SparsifiedCertificate cert;
  const double delta_1 = d.lambda(1) - d.lambda(2);
  cert.checks = check_moderate_gap(out.realized_noise_norm, d.lambda(1), delta_1);
  cert.halving_r = halving_index(d, 1);
  cert.rho_advisory_ok = true;  // no sparsification density involved
  if (delta_1 > 0.0)
    cert.dk_comparison = M_PI * out.realized_noise_norm / delta_1;
  if (detail::all_ok(cert.checks)) {
    if (out.realized_noise_norm == 0.0) {
      cert.value = 0.0;
    } else {
      const double x = cross_term_x(d, noise, cert.halving_r);
      cert.value = std::sqrt(2.0) * moderate_gap_formula(out.realized_noise_norm, d.lambda(1),
                                                         d.source_norm, delta_1, cert.halving_r, x);
    }
  }
  out.certificate = cert;
  return out;
}

}  // namespace perturb
