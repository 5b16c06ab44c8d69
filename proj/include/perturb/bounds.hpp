// Gap statistics and analytic eigenspace-perturbation bounds.
//
// Implemented bounds, each with its applicability window checked explicitly:
//   * Davis-Kahan sine-theta, general form   pi ||E|| / (2 dist)
//   * Davis-Kahan corollary                  pi ||E|| / delta_S
//   * moderate-gap bound                     24 ( ||E||/|lambda_p| log(6 sigma_1/delta_p)
//                                                 + r^2 x / delta_p )
//   * trivial F1-route bound                 4 ||E|| / delta_p
//   * singular-space variant (two-sided split), constant 48
//   * rectangular variant (via symmetric dilation), constant 24 sqrt(2)
//
// Preconditions are never silently clamped: evaluation outside the window
// throws PreconditionError carrying the failed inequality and its slack.
// All functions are pure; Monte Carlo drivers may call them from any thread.

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "perturb/errors.hpp"
#include "perturb/spectral.hpp"

namespace perturb {

// ---------------------------------------------------------------------------
// Gap statistics

struct GapProfile {
  int p = 0;                  // target index (1-based)
  double delta_p = 0.0;       // lambda_p - lambda_{p+1}
  double delta_S = 0.0;       // min over i in S, j notin S of |lambda_i - lambda_j|
  int halving_index_r = 0;    // smallest r >= p with |lambda_p|/2 <= |lambda_p - lambda_{r+1}|
  double sigma_1 = 0.0;       // max |lambda_i|
  double lambda_p = 0.0;
};

// Smallest r >= p with |lambda_p|/2 <= |lambda_p - lambda_{r+1}|, using the
// convention lambda_{n+1} = 0 (so r = n always qualifies for lambda_p != 0,
// matching the rank-r choice for low-rank matrices).
inline int halving_index(const SpectralData& d, int p) {
  const int n = static_cast<int>(d.size());
  if (p < 1 || p > n) throw ArgumentError("halving_index: p outside {1,...,n}");
  const double half = std::abs(d.lambda(p)) / 2.0;
  for (int r = p; r <= n; ++r) {
    if (half <= std::abs(d.lambda(p) - d.lambda(r + 1))) return r;
  }
  return n;  // |lambda_p| = 0 falls through; r = n then satisfies 0 <= 0
}

inline GapProfile gap_profile(const SpectralData& d, const IndexSet& s) {
  const int n = static_cast<int>(d.size());
  detail::validate_index_set(s, n, "gap_profile");
  if (static_cast<int>(s.size()) >= n)
    throw ArgumentError("gap_profile: S must be a proper subset");
  std::vector<bool> in_s(static_cast<std::size_t>(n) + 1, false);
  for (int i : s) in_s[static_cast<std::size_t>(i)] = true;

  GapProfile g;
  g.p = static_cast<int>(s.size());
  g.delta_p = d.lambda(g.p) - d.lambda(g.p + 1);
  g.lambda_p = d.lambda(g.p);
  g.sigma_1 = d.source_norm;
  g.halving_index_r = halving_index(d, g.p);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= n; ++i) {
    if (!in_s[static_cast<std::size_t>(i)]) continue;
    for (int j = 1; j <= n; ++j) {
      if (in_s[static_cast<std::size_t>(j)]) continue;
      best = std::min(best, std::abs(d.lambda(i) - d.lambda(j)));
    }
  }
  g.delta_S = best;
  return g;
}

// max_{1 <= i,j <= r} |u_i^T E u_j|: the interaction between the noise and
// the leading eigenvectors.  Always <= ||E||.
inline double cross_term_x(const SpectralData& d, const SymmetricMatrix& e, int r) {
  const int n = static_cast<int>(d.size());
  if (r < 1 || r > n) throw ArgumentError("cross_term_x: r outside {1,...,n}");
  if (e.size() != d.size()) throw ArgumentError("cross_term_x: dimension mismatch");
  const auto ur = d.eigenvectors.leftCols(r);
  return (ur.transpose() * e.matrix() * ur).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// Precondition helpers

namespace detail {

inline PreconditionCheck make_check(const std::string& name, double slack) {
  return PreconditionCheck{name, slack >= 0.0, slack};
}

inline bool all_ok(const std::vector<PreconditionCheck>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.satisfied; });
}

[[noreturn]] inline void throw_failed(const char* who, const std::vector<PreconditionCheck>& checks) {
  for (const auto& c : checks) {
    if (!c.satisfied)
      throw PreconditionError(std::string(who) + ": precondition '" + c.name +
                                  "' failed (slack " + std::to_string(c.slack) + ")",
                              checks);
  }
  throw PreconditionError(std::string(who) + ": precondition failure", checks);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Davis-Kahan

enum class DavisKahanVariant { General, Corollary };

// General: pi ||E|| / (2 delta) with delta = dist(Lambda_S, ~Lambda_{S^c}).
// Corollary: pi ||E|| / delta_S, valid once delta_S >= 2 ||E|| (the Weyl step
// that replaces the mixed distance by delta_S needs that margin).
inline std::vector<PreconditionCheck> check_davis_kahan(double noise_norm, double delta,
                                                        DavisKahanVariant variant) {
  std::vector<PreconditionCheck> checks;
  checks.push_back(PreconditionCheck{"delta > 0", delta > 0.0, delta});
  if (variant == DavisKahanVariant::Corollary)
    checks.push_back(detail::make_check("delta_S >= 2||E|| (Weyl slack)", delta - 2.0 * noise_norm));
  return checks;
}

inline double davis_kahan_bound(double noise_norm, double delta, DavisKahanVariant variant) {
  if (noise_norm < 0.0) throw ArgumentError("davis_kahan_bound: negative noise norm");
  auto checks = check_davis_kahan(noise_norm, delta, variant);
  if (!detail::all_ok(checks)) detail::throw_failed("davis_kahan_bound", checks);
  return variant == DavisKahanVariant::General ? M_PI * noise_norm / (2.0 * delta)
                                               : M_PI * noise_norm / delta;
}

// ---------------------------------------------------------------------------
// Moderate-gap bound

// Raw formula evaluator: 24 ( ||E||/|lambda_p| log(6 sigma_1/delta_p) + r^2 x/delta_p ).
// Exposed so monotonicity in ||E|| and x can be asserted directly.
inline double moderate_gap_formula(double noise_norm, double lambda_p, double sigma_1,
                                   double delta_p, int r, double x) {
  return 24.0 * (noise_norm / std::abs(lambda_p) * std::log(6.0 * sigma_1 / delta_p) +
                 static_cast<double>(r) * static_cast<double>(r) * x / delta_p);
}

inline std::vector<PreconditionCheck> check_moderate_gap(double noise_norm, double lambda_p,
                                                         double delta_p) {
  std::vector<PreconditionCheck> checks;
  checks.push_back(detail::make_check("delta_p > 0", delta_p > 0.0 ? delta_p : -1.0));
  checks.push_back(detail::make_check("4||E|| <= delta_p", delta_p - 4.0 * noise_norm));
  checks.push_back(detail::make_check("delta_p <= |lambda_p|/4", std::abs(lambda_p) / 4.0 - delta_p));
  return checks;
}

struct ModerateGapBound {
  double value = 0.0;
  GapProfile profile;
};

// Bound on ||~Pi_p - Pi_p|| for the leading block {1..p} under the window
// 4||E|| <= delta_p <= |lambda_p|/4.
inline ModerateGapBound moderate_gap_bound(const SpectralData& d, const SymmetricMatrix& e, int p) {
  const int n = static_cast<int>(d.size());
  if (p < 1 || p >= n) throw ArgumentError("moderate_gap_bound: need 1 <= p < n");
  if (e.size() != d.size()) throw ArgumentError("moderate_gap_bound: dimension mismatch");
  ModerateGapBound out;
  out.profile = gap_profile(d, leading(p));
  const double noise = spectral_norm(e);
  auto checks = check_moderate_gap(noise, out.profile.lambda_p, out.profile.delta_p);
  if (!detail::all_ok(checks)) detail::throw_failed("moderate_gap_bound", checks);
  const double x = cross_term_x(d, e, out.profile.halving_index_r);
  out.value = moderate_gap_formula(noise, out.profile.lambda_p, out.profile.sigma_1,
                                   out.profile.delta_p, out.profile.halving_index_r, x);
  return out;
}

// ---------------------------------------------------------------------------
// Trivial F1-route bound: 4 ||E|| / delta_p, valid for delta_p >= 4 ||E||.

inline std::vector<PreconditionCheck> check_trivial_f1(double noise_norm, double delta_p) {
  return {detail::make_check("delta_p >= 4||E||", delta_p - 4.0 * noise_norm)};
}

inline double trivial_f1_bound(double noise_norm, double delta_p) {
  if (noise_norm < 0.0) throw ArgumentError("trivial_f1_bound: negative noise norm");
  auto checks = check_trivial_f1(noise_norm, delta_p);
  if (!detail::all_ok(checks)) detail::throw_failed("trivial_f1_bound", checks);
  if (noise_norm == 0.0) return 0.0;
  return 4.0 * noise_norm / delta_p;
}

// ---------------------------------------------------------------------------
// Singular-space variant (split index set {1..k} u {n-(p-k)+1..n})

struct SingularSpaceBound {
  double value = 0.0;
  int halving_r = 0;
  double delta_top = 0.0;     // delta_k
  double delta_bottom = 0.0;  // delta_{n-(p-k)}
  double x_bar = 0.0;
};

// The split index set for the p leading singular values, k from the top.
inline IndexSet singular_split_set(int n, int p, int k) {
  IndexSet s;
  for (int i = 1; i <= k; ++i) s.push_back(i);
  for (int i = n - (p - k) + 1; i <= n; ++i) s.push_back(i);
  return s;
}

inline SingularSpaceBound singular_space_bound(const SpectralData& d, const SymmetricMatrix& e,
                                               int p, int k) {
  const int n = static_cast<int>(d.size());
  if (!(1 <= k && k < p && p <= n)) throw ArgumentError("singular_space_bound: need 1 <= k < p <= n");
  if (p >= n) throw ArgumentError("singular_space_bound: need p < n");
  if (e.size() != d.size()) throw ArgumentError("singular_space_bound: dimension mismatch");
  const int q = p - k;     // bottom block size
  const int b = n - q;     // bottom gap sits between lambda_b and lambda_{b+1}

  // The split must actually select the p largest singular values.
  std::vector<double> sv(d.eigenvalues.data(), d.eigenvalues.data() + n);
  for (double& v : sv) v = std::abs(v);
  std::sort(sv.begin(), sv.end(), std::greater<>());
  const double sigma_p = sv[static_cast<std::size_t>(p - 1)];
  const double sigma_p1 = p < n ? sv[static_cast<std::size_t>(p)] : 0.0;
  double min_in = std::numeric_limits<double>::infinity();
  double max_out = 0.0;
  for (int i = 1; i <= n; ++i) {
    const bool in_s = i <= k || i > b;
    if (in_s)
      min_in = std::min(min_in, std::abs(d.lambda(i)));
    else
      max_out = std::max(max_out, std::abs(d.lambda(i)));
  }
  if (min_in < max_out)
    throw ArgumentError("singular_space_bound: split (p,k) does not select the top-p singular values");

  SingularSpaceBound out;
  out.delta_top = d.lambda(k) - d.lambda(k + 1);
  out.delta_bottom = d.lambda(b) - d.lambda(b + 1);
  const double noise = spectral_norm(e);

  std::vector<PreconditionCheck> checks;
  checks.push_back(detail::make_check("4||E|| <= delta_k", out.delta_top - 4.0 * noise));
  checks.push_back(detail::make_check("delta_k <= lambda_k/4", d.lambda(k) / 4.0 - out.delta_top));
  checks.push_back(detail::make_check("4||E|| <= delta_{n-(p-k)}", out.delta_bottom - 4.0 * noise));
  checks.push_back(detail::make_check("delta_{n-(p-k)} <= |lambda_{n-(p-k)+1}|/4",
                                      std::abs(d.lambda(b + 1)) / 4.0 - out.delta_bottom));
  checks.push_back(detail::make_check("2||E|| <= sigma_p - sigma_{p+1}",
                                      (sigma_p - sigma_p1) - 2.0 * noise));
  if (!detail::all_ok(checks)) detail::throw_failed("singular_space_bound", checks);

  // Two-sided halving distance.
  int r = 0;
  for (int cand = 1; cand <= n; ++cand) {
    const bool top_ok = d.lambda(k) / 2.0 <= d.lambda(k) - d.lambda(cand + 1);
    const bool bottom_ok =
        std::abs(d.lambda(b + 1)) / 2.0 <= d.lambda(n - cand + 1) - d.lambda(b + 1);
    if (top_ok && bottom_ok) {
      r = cand;
      break;
    }
  }
  if (r == 0)
    throw NumericalError("singular_space_bound: no halving distance exists for this spectrum");
  out.halving_r = r;

  // x_bar over both index ranges.
  const auto top = d.eigenvectors.leftCols(r);
  const int lo = std::max(1, n - r);
  const auto bottom = d.eigenvectors.middleCols(lo - 1, n - lo + 1);
  out.x_bar = std::max((top.transpose() * e.matrix() * top).cwiseAbs().maxCoeff(),
                       (bottom.transpose() * e.matrix() * bottom).cwiseAbs().maxCoeff());

  const double dmin = std::min(out.delta_top, out.delta_bottom);
  if (noise == 0.0 && out.x_bar == 0.0) {
    out.value = 0.0;
    return out;
  }
  out.value = 48.0 * (noise / sigma_p * std::log(6.0 * d.source_norm /
                                                 std::sqrt(out.delta_top * out.delta_bottom)) +
                      static_cast<double>(r) * static_cast<double>(r) * out.x_bar / dmin);
  return out;
}

// ---------------------------------------------------------------------------
// Rectangular variant (symmetric dilation route)

struct RectangularBound {
  double value = 0.0;
  int halving_r = 0;
  double delta_p = 0.0;  // sigma_p - sigma_{p+1}
  double sigma_p = 0.0;
  double x_bar = 0.0;    // max_{i,j <= r} |u_i^T E v_j|
};

inline RectangularBound rectangular_bound(const Eigen::MatrixXd& a, const Eigen::MatrixXd& e,
                                          int p) {
  if (a.rows() != e.rows() || a.cols() != e.cols())
    throw ArgumentError("rectangular_bound: A and E dimensions differ");
  const int q = static_cast<int>(std::min(a.rows(), a.cols()));
  if (p < 1 || p > q) throw ArgumentError("rectangular_bound: p outside {1,...,min(m,n)}");

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  auto sigma = [&](int i) { return i <= q ? sv(i - 1) : 0.0; };

  RectangularBound out;
  out.sigma_p = sigma(p);
  out.delta_p = sigma(p) - sigma(p + 1);
  const double noise = spectral_norm(e);

  std::vector<PreconditionCheck> checks;
  checks.push_back(detail::make_check("delta_p > 0", out.delta_p > 0.0 ? out.delta_p : -1.0));
  checks.push_back(detail::make_check("4||E|| <= delta_p", out.delta_p - 4.0 * noise));
  checks.push_back(detail::make_check("delta_p <= sigma_p/4", out.sigma_p / 4.0 - out.delta_p));
  if (!detail::all_ok(checks)) detail::throw_failed("rectangular_bound", checks);

  int r = q;
  for (int cand = p; cand <= q; ++cand) {
    if (out.sigma_p / 2.0 <= std::abs(out.sigma_p - sigma(cand + 1))) {
      r = cand;
      break;
    }
  }
  out.halving_r = r;
  const auto ur = svd.matrixU().leftCols(r);
  const auto vr = svd.matrixV().leftCols(r);
  out.x_bar = (ur.transpose() * e * vr).cwiseAbs().maxCoeff();
  out.value = 24.0 * std::sqrt(2.0) *
              (noise / out.sigma_p * std::log(6.0 * sigma(1) / out.delta_p) +
               static_cast<double>(r) * static_cast<double>(r) * out.x_bar / out.delta_p);
  return out;
}

// ---------------------------------------------------------------------------
// Weyl gap and stable rank

// max_i |lambda_i - ~lambda_i|; by Weyl's inequality this never exceeds ||E||.
inline double weyl_gap(const Eigen::VectorXd& eigs_a, const Eigen::VectorXd& eigs_at) {
  if (eigs_a.size() != eigs_at.size()) throw ArgumentError("weyl_gap: length mismatch");
  for (Eigen::Index i = 0; i + 1 < eigs_a.size(); ++i)
    if (eigs_a(i) < eigs_a(i + 1) || eigs_at(i) < eigs_at(i + 1))
      throw ArgumentError("weyl_gap: inputs must be sorted descending");
  return (eigs_a - eigs_at).cwiseAbs().maxCoeff();
}

// Stable rank in the linear form sum_i sigma_i / sigma_1.
inline double stable_rank(const Eigen::VectorXd& singular_values) {
  if (singular_values.size() < 1) throw ArgumentError("stable_rank: empty spectrum");
  for (Eigen::Index i = 0; i < singular_values.size(); ++i) {
    if (singular_values(i) < 0.0)
      throw ArgumentError("stable_rank: singular values must be nonnegative");
    if (i + 1 < singular_values.size() && singular_values(i) < singular_values(i + 1))
      throw ArgumentError("stable_rank: singular values must be sorted descending");
  }
  if (singular_values(0) == 0.0) throw ArgumentError("stable_rank: all-zero spectrum");
  return singular_values.sum() / singular_values(0);
}

// ---------------------------------------------------------------------------
// Per-trial bound report

// A bound outcome: either a value or the precondition list that rejected it.
struct BoundValue {
  std::optional<double> value;
  std::vector<PreconditionCheck> checks;
  bool ok() const { return value.has_value(); }
};

struct BoundReport {
  double measured = 0.0;      // ||~Pi_S - Pi_S||
  double noise_norm = 0.0;
  double cross_x = 0.0;       // cross term at the halving index
  BoundValue dk_general;      // pi ||E|| / (2 dist(Lambda_S, ~Lambda_{S^c}))
  BoundValue dk_corollary;    // pi ||E|| / delta_S
  BoundValue moderate_gap;    // 24(...) for leading-block S
  BoundValue trivial_f1;      // 4 ||E|| / delta_p for leading-block S
  GapProfile profile;
  double dist_mixed = 0.0;    // dist(Lambda_S, ~Lambda_{S^c})
};

namespace detail {

inline bool is_leading_block(const IndexSet& s) {
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i] != static_cast<int>(i) + 1) return false;
  return true;
}

}  // namespace detail

// Evaluates the measured perturbation and every applicable bound for one
// (A, A+E, S) trial.  Precondition failures land in the report instead of
// throwing, so sweeps can tally applicability coverage.
inline BoundReport evaluate_bound_report(const SpectralData& d, const SpectralData& d_tilde,
                                         const SymmetricMatrix& e, const IndexSet& s) {
  BoundReport rep;
  rep.profile = gap_profile(d, s);
  rep.noise_norm = spectral_norm(e);
  rep.measured = sine_distance(projector(d, s), projector(d_tilde, s));
  rep.cross_x = cross_term_x(d, e, rep.profile.halving_index_r);

  std::vector<bool> in_s(static_cast<std::size_t>(d.size()) + 1, false);
  for (int i : s) in_s[static_cast<std::size_t>(i)] = true;
  double dist = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= static_cast<int>(d.size()); ++i) {
    if (!in_s[static_cast<std::size_t>(i)]) continue;
    for (int j = 1; j <= static_cast<int>(d.size()); ++j)
      if (!in_s[static_cast<std::size_t>(j)])
        dist = std::min(dist, std::abs(d.lambda(i) - d_tilde.lambda(j)));
  }
  rep.dist_mixed = dist;

  rep.dk_general.checks = check_davis_kahan(rep.noise_norm, dist, DavisKahanVariant::General);
  if (detail::all_ok(rep.dk_general.checks))
    rep.dk_general.value = davis_kahan_bound(rep.noise_norm, dist, DavisKahanVariant::General);

  rep.dk_corollary.checks =
      check_davis_kahan(rep.noise_norm, rep.profile.delta_S, DavisKahanVariant::Corollary);
  if (detail::all_ok(rep.dk_corollary.checks))
    rep.dk_corollary.value =
        davis_kahan_bound(rep.noise_norm, rep.profile.delta_S, DavisKahanVariant::Corollary);

  IndexSet sorted = s;
  std::sort(sorted.begin(), sorted.end());
  if (detail::is_leading_block(sorted)) {
    rep.moderate_gap.checks =
        check_moderate_gap(rep.noise_norm, rep.profile.lambda_p, rep.profile.delta_p);
    if (detail::all_ok(rep.moderate_gap.checks))
      rep.moderate_gap.value = moderate_gap_bound(d, e, rep.profile.p).value;
    rep.trivial_f1.checks = check_trivial_f1(rep.noise_norm, rep.profile.delta_p);
    if (detail::all_ok(rep.trivial_f1.checks))
      rep.trivial_f1.value = trivial_f1_bound(rep.noise_norm, rep.profile.delta_p);
  } else {
    const PreconditionCheck not_leading{"S is the leading block {1..p}", false, -1.0};
    rep.moderate_gap.checks = {not_leading};
    rep.trivial_f1.checks = {not_leading};
  }
  return rep;
}

}  // namespace perturb
