// Rectangle contours around leading spectral blocks, and numerical contour
// integration of resolvent expressions along them.
//
// Quadrature scheme: composite Gauss-Legendre (order 16 panels), default
// 256 nodes per segment, panel-doubling refinement until the relative change
// drops below 1e-8, with a budget of 8 refinements.  Scalar integrals
// (F, F1, M_k) integrate the pointwise spectral norm with respect to arc
// length, so they are orientation-free; the matrix-valued Cauchy integral
// integrates entries along the counterclockwise path (winding +1 for
// enclosed eigenvalues) and takes norms only afterwards.
//
// Node evaluations inside a segment are independent; results are reduced in
// a fixed order, so outputs are bit-stable regardless of caller parallelism.

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "perturb/bounds.hpp"
#include "perturb/errors.hpp"
#include "perturb/spectral.hpp"

namespace perturb {

struct QuadratureOptions {
  double rtol = 1e-8;
  int max_refinements = 8;
  bool throw_on_budget = true;  // non-convergence within budget is an error
};

struct QuadratureResult {
  long node_count = 0;       // total integrand evaluations of the accepted pass
  int refinement_steps = 0;  // panel doublings performed
  double estimated_error = 0.0;
};

// ---------------------------------------------------------------------------
// Gauss-Legendre panels

namespace quad {

inline constexpr int kPanelOrder = 16;

struct GaussLegendre {
  std::array<double, kPanelOrder> nodes{};
  std::array<double, kPanelOrder> weights{};
};

// Order-16 rule on [-1, 1], nodes by Newton iteration on P_16.
inline const GaussLegendre& gl16() {
  static const GaussLegendre rule = [] {
    GaussLegendre g;
    const int m = kPanelOrder;
    for (int i = 0; i < (m + 1) / 2; ++i) {
      double z = std::cos(M_PI * (i + 0.75) / (m + 0.5));
      double pp = 0.0;
      for (int iter = 0; iter < 64; ++iter) {
        double p1 = 1.0, p2 = 0.0;
        for (int j = 0; j < m; ++j) {
          const double p3 = p2;
          p2 = p1;
          p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
        }
        pp = m * (z * p1 - p2) / (z * z - 1.0);
        const double z1 = z;
        z = z1 - p1 / pp;
        if (std::abs(z - z1) < 1e-15) break;
      }
      g.nodes[static_cast<std::size_t>(i)] = -z;
      g.nodes[static_cast<std::size_t>(m - 1 - i)] = z;
      const double w = 2.0 / ((1.0 - z * z) * pp * pp);
      g.weights[static_cast<std::size_t>(i)] = w;
      g.weights[static_cast<std::size_t>(m - 1 - i)] = w;
    }
    return g;
  }();
  return rule;
}

// Arc-length integral of a scalar field over the straight segment [z0, z1].
template <class F>
double arc_integral(F&& f, Complex z0, Complex z1, long panels) {
  const auto& g = gl16();
  const Complex dz = z1 - z0;
  const double arc = std::abs(dz);
  double total = 0.0;
  for (long p = 0; p < panels; ++p) {
    const double a = static_cast<double>(p) / static_cast<double>(panels);
    const double b = static_cast<double>(p + 1) / static_cast<double>(panels);
    double sub = 0.0;
    for (int i = 0; i < kPanelOrder; ++i) {
      const double s = 0.5 * (a + b) + 0.5 * (b - a) * g.nodes[static_cast<std::size_t>(i)];
      sub += g.weights[static_cast<std::size_t>(i)] * f(z0 + dz * s);
    }
    total += 0.5 * (b - a) * sub;
  }
  return total * arc;
}

// Directed complex line integral of f over [z0, z1] (dz carries orientation).
template <class F>
Complex line_integral(F&& f, Complex z0, Complex z1, long panels) {
  const auto& g = gl16();
  const Complex dz = z1 - z0;
  Complex total{0.0, 0.0};
  for (long p = 0; p < panels; ++p) {
    const double a = static_cast<double>(p) / static_cast<double>(panels);
    const double b = static_cast<double>(p + 1) / static_cast<double>(panels);
    Complex sub{0.0, 0.0};
    for (int i = 0; i < kPanelOrder; ++i) {
      const double s = 0.5 * (a + b) + 0.5 * (b - a) * g.nodes[static_cast<std::size_t>(i)];
      sub += g.weights[static_cast<std::size_t>(i)] * f(z0 + dz * s);
    }
    total += 0.5 * (b - a) * sub;
  }
  return total * dz;
}

// Panel-doubling refinement loop over a scalar evaluator.  `nodes_per_panel`
// counts integrand evaluations per panel across all segments the evaluator
// covers (16 for one segment, 64 for a whole rectangle).
template <class Eval>
std::pair<double, QuadratureResult> refine_scalar(Eval&& eval, long initial_panels,
                                                  const QuadratureOptions& opt,
                                                  long nodes_per_panel) {
  long panels = std::max<long>(1, initial_panels);
  double prev = eval(panels);
  QuadratureResult qr;
  qr.node_count = nodes_per_panel * panels;
  for (int step = 1; step <= opt.max_refinements; ++step) {
    panels *= 2;
    const double cur = eval(panels);
    const double change = std::abs(cur - prev);
    qr.refinement_steps = step;
    qr.estimated_error = change;
    qr.node_count = nodes_per_panel * panels;
    prev = cur;
    if (change <= opt.rtol * std::abs(cur) + 1e-300) return {cur, qr};
  }
  if (opt.throw_on_budget)
    throw NumericalError("quadrature failed to converge within " +
                         std::to_string(opt.max_refinements) +
                         " refinements (last change " + std::to_string(qr.estimated_error) + ")");
  return {prev, qr};
}

}  // namespace quad

// ---------------------------------------------------------------------------
// ContourSpec

// Axis-aligned rectangle with corners (x0, +-T) and (x1, +-T).  Segment
// labels follow the convention: 1 = left vertical (through the spectral
// gap), 2 = top, 3 = right vertical, 4 = bottom.
struct ContourSpec {
  double x0 = 0.0;
  double x1 = 0.0;
  double half_height = 0.0;  // T
  int nodes_per_segment = 256;
  double margin = 0.0;  // recorded min distance from the spectrum to the boundary

  ContourSpec() = default;
  ContourSpec(double x0_, double x1_, double t, int nodes = 256)
      : x0(x0_), x1(x1_), half_height(t), nodes_per_segment(nodes) {
    if (!(x0 < x1)) throw ArgumentError("ContourSpec: need x0 < x1");
    if (!(half_height > 0.0)) throw ArgumentError("ContourSpec: need T > 0");
    if (nodes_per_segment < 8) throw ArgumentError("ContourSpec: need >= 8 nodes per segment");
  }

  // Endpoints of labeled segment k in {1,2,3,4}.
  std::pair<Complex, Complex> segment(int k) const {
    const double t = half_height;
    switch (k) {
      case 1: return {Complex(x0, -t), Complex(x0, t)};
      case 2: return {Complex(x0, t), Complex(x1, t)};
      case 3: return {Complex(x1, -t), Complex(x1, t)};
      case 4: return {Complex(x0, -t), Complex(x1, -t)};
      default: throw ArgumentError("ContourSpec::segment: k must be 1..4");
    }
  }

  // Counterclockwise traversal (winding +1 for enclosed points).
  std::array<std::pair<Complex, Complex>, 4> ccw_path() const {
    const double t = half_height;
    return {{{Complex(x0, -t), Complex(x1, -t)},
             {Complex(x1, -t), Complex(x1, t)},
             {Complex(x1, t), Complex(x0, t)},
             {Complex(x0, t), Complex(x0, -t)}}};
  }

  bool encloses(double lambda) const { return x0 < lambda && lambda < x1; }

  // Distance from a real point to the rectangle boundary.
  double boundary_distance(double lambda) const {
    if (encloses(lambda)) return std::min({lambda - x0, x1 - lambda, half_height});
    return lambda <= x0 ? x0 - lambda : lambda - x1;
  }

  long panels() const { return std::max<long>(1, (nodes_per_segment + quad::kPanelOrder - 1) / quad::kPanelOrder); }
};

// Indices (1-based) of eigenvalues strictly inside the contour.
inline IndexSet enclosed_indices(const ContourSpec& c, const SpectralData& d) {
  IndexSet s;
  for (int i = 1; i <= static_cast<int>(d.size()); ++i)
    if (c.encloses(d.lambda(i))) s.push_back(i);
  return s;
}

// Checks that exactly the indices in `s` are enclosed and returns the minimum
// distance from any eigenvalue to the boundary.
inline double verify_enclosure(const ContourSpec& c, const SpectralData& d, const IndexSet& s) {
  std::vector<bool> want(static_cast<std::size_t>(d.size()) + 1, false);
  for (int i : s) want[static_cast<std::size_t>(i)] = true;
  double margin = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= static_cast<int>(d.size()); ++i) {
    const bool inside = c.encloses(d.lambda(i));
    if (inside != want[static_cast<std::size_t>(i)])
      throw NumericalError("contour enclosure violated at eigenvalue index " + std::to_string(i) +
                           " (lambda = " + std::to_string(d.lambda(i)) + ")");
    margin = std::min(margin, c.boundary_distance(d.lambda(i)));
  }
  return margin;
}

// ---------------------------------------------------------------------------
// Contour builders

// Rectangle with x0 = lambda_p - delta_p/2, x1 = 2 sigma_1, T = 2 sigma_1:
// the left edge bisects the gap, everything else clears the spectrum widely.
inline ContourSpec build_theorem_contour(const SpectralData& d, int p, int nodes_per_segment = 256) {
  const int n = static_cast<int>(d.size());
  if (p < 1 || p >= n) throw ArgumentError("build_theorem_contour: need 1 <= p < n");
  const double delta_p = d.lambda(p) - d.lambda(p + 1);
  if (!(delta_p > 0.0))
    throw PreconditionError("build_theorem_contour: degenerate gap delta_p = 0",
                            {PreconditionCheck{"delta_p > 0", false, delta_p}});
  ContourSpec c(d.lambda(p) - delta_p / 2.0, 2.0 * d.source_norm, 2.0 * d.source_norm,
                nodes_per_segment);
  c.margin = verify_enclosure(c, d, leading(p));
  return c;
}

// Generic placement for a leading block: the left edge bisects the interval
// between lambda_p and lambda_{p+1}.  Requires gap >= 4 ||E|| so the distance
// from every eigenvalue to the contour is at least 2 ||E||.
inline ContourSpec build_bisecting_contour(const SpectralData& d, const IndexSet& s,
                                           double noise_norm, int nodes_per_segment = 256) {
  const int n = static_cast<int>(d.size());
  detail::validate_index_set(s, n, "build_bisecting_contour");
  IndexSet sorted = s;
  std::sort(sorted.begin(), sorted.end());
  if (!detail::is_leading_block(sorted) || static_cast<int>(sorted.size()) >= n)
    throw ArgumentError("build_bisecting_contour: S must be a leading block {1..p}, p < n");
  const int p = static_cast<int>(sorted.size());
  const double gap = d.lambda(p) - d.lambda(p + 1);
  if (gap < 4.0 * noise_norm || gap <= 0.0)
    throw PreconditionError(
        "build_bisecting_contour: gap assumption delta >= 4||E|| violated",
        {PreconditionCheck{"delta_S >= 4||E||", false, gap - 4.0 * noise_norm}});
  const double pad = std::max(2.0 * noise_norm, gap / 2.0);
  ContourSpec c((d.lambda(p) + d.lambda(p + 1)) / 2.0, d.lambda(1) + pad, pad, nodes_per_segment);
  c.margin = verify_enclosure(c, d, sorted);
  return c;
}

// ---------------------------------------------------------------------------
// Matrix-valued Cauchy integral

struct CauchyProjectorResult {
  Eigen::MatrixXd matrix;      // real part of (1/2 pi i) \oint (zI-A)^{-1} dz
  IndexSet enclosed;           // indices the contour encloses
  double deviation = 0.0;      // Frobenius distance to the directly-built projector
  QuadratureResult quadrature;
};

inline CauchyProjectorResult cauchy_projector(const SpectralData& d, const ContourSpec& c) {
  const Eigen::Index n = d.size();
  const auto path = c.ccw_path();
  const Complex two_pi_i(0.0, 2.0 * M_PI);

  // Winding coefficients per eigenvalue; the matrix assembles afterwards.
  auto eval = [&](long panels) {
    Eigen::VectorXcd coeff = Eigen::VectorXcd::Zero(n);
    for (const auto& [z0, z1] : path) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const double li = d.eigenvalues(i);
        coeff(i) += quad::line_integral([li](Complex z) { return 1.0 / (z - li); }, z0, z1, panels);
      }
    }
    return (coeff / two_pi_i).eval();
  };

  long panels = c.panels();
  Eigen::VectorXcd prev = eval(panels);
  QuadratureResult qr;
  qr.node_count = 4 * panels * quad::kPanelOrder;
  const QuadratureOptions opt;
  bool converged = false;
  Eigen::VectorXcd coeff = prev;
  for (int step = 1; step <= opt.max_refinements; ++step) {
    panels *= 2;
    coeff = eval(panels);
    const double change = (coeff - prev).norm();
    qr.refinement_steps = step;
    qr.estimated_error = change;
    qr.node_count = 4 * panels * quad::kPanelOrder;
    prev = coeff;
    if (change <= opt.rtol * std::max(coeff.norm(), 1.0)) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw NumericalError("cauchy_projector: quadrature failed to converge (last change " +
                         std::to_string(qr.estimated_error) + ")");

  CauchyProjectorResult out;
  out.enclosed = enclosed_indices(c, d);
  out.quadrature = qr;
  const ComplexMatrix u = d.eigenvectors.cast<Complex>();
  const ComplexMatrix integral = u * coeff.asDiagonal() * u.adjoint();
  out.matrix = integral.real();
  Eigen::MatrixXd target = Eigen::MatrixXd::Zero(n, n);
  if (!out.enclosed.empty()) target = projector(d, out.enclosed).matrix;
  out.deviation = (integral - target.cast<Complex>()).norm();
  return out;
}

inline CauchyProjectorResult cauchy_projector(const SymmetricMatrix& a, const ContourSpec& c) {
  return cauchy_projector(spectral_decompose(a), c);
}

// ---------------------------------------------------------------------------
// Scalar resolvent integrals

namespace detail_contour {

// ||diag(wa) H diag(wb)|| at a node, with H constant across nodes.
inline double scaled_norm(const Eigen::MatrixXd& h, const Eigen::VectorXcd& wa,
                          const Eigen::VectorXcd& wb) {
  const ComplexMatrix m = (wa * wb.transpose()).cwiseProduct(h.cast<Complex>());
  return spectral_norm(m);
}

inline Eigen::VectorXcd resolvent_weights(const Eigen::VectorXd& eigs, Complex z) {
  Eigen::VectorXcd w(eigs.size());
  for (Eigen::Index i = 0; i < eigs.size(); ++i) w(i) = 1.0 / (z - eigs(i));
  return w;
}

}  // namespace detail_contour

// F = (1/2 pi) \oint || (zI-~A)^{-1} - (zI-A)^{-1} || dz.  The difference is
// evaluated through the factored identity
//   (zI-~A)^{-1} - (zI-A)^{-1} = (zI-A)^{-1} E (zI-~A)^{-1},
// whose norm reduces to || D_A (U^T E ~U) D_~A || by orthogonal invariance.
inline std::pair<double, QuadratureResult> F_numeric(const SpectralData& d,
                                                     const SpectralData& d_tilde,
                                                     const Eigen::MatrixXd& noise,
                                                     const ContourSpec& c,
                                                     const QuadratureOptions& opt = {}) {
  const IndexSet s = enclosed_indices(c, d);
  verify_enclosure(c, d, s);
  try {
    verify_enclosure(c, d_tilde, s);  // shifted eigenvalues must not cross the boundary
  } catch (const NumericalError& e) {
    throw PreconditionError(std::string("F_numeric: ") + e.what(),
                            {PreconditionCheck{"shifted spectrum enclosed consistently", false, 0.0}});
  }
  const Eigen::MatrixXd h = d.eigenvectors.transpose() * noise * d_tilde.eigenvectors;

  auto integrand = [&](Complex z) {
    return detail_contour::scaled_norm(h, detail_contour::resolvent_weights(d.eigenvalues, z),
                                       detail_contour::resolvent_weights(d_tilde.eigenvalues, z));
  };
  auto eval = [&](long panels) {
    double total = 0.0;
    for (int k = 1; k <= 4; ++k) {
      const auto [z0, z1] = c.segment(k);
      total += quad::arc_integral(integrand, z0, z1, panels);
    }
    return total / (2.0 * M_PI);
  };
  return quad::refine_scalar(eval, c.panels(), opt, 4L * quad::kPanelOrder);
}

inline std::pair<double, QuadratureResult> F_numeric(const SymmetricMatrix& a,
                                                     const SymmetricMatrix& a_tilde,
                                                     const ContourSpec& c,
                                                     const QuadratureOptions& opt = {}) {
  return F_numeric(spectral_decompose(a), spectral_decompose(a_tilde),
                   a_tilde.matrix() - a.matrix(), c, opt);
}

// F1 = (1/2 pi) \oint || (zI-A)^{-1} E (zI-A)^{-1} || dz.
inline std::pair<double, QuadratureResult> F1_numeric(const SpectralData& d,
                                                      const Eigen::MatrixXd& noise,
                                                      const ContourSpec& c,
                                                      const QuadratureOptions& opt = {}) {
  verify_enclosure(c, d, enclosed_indices(c, d));
  const Eigen::MatrixXd g = d.eigenvectors.transpose() * noise * d.eigenvectors;
  auto integrand = [&](Complex z) {
    const auto w = detail_contour::resolvent_weights(d.eigenvalues, z);
    return detail_contour::scaled_norm(g, w, w);
  };
  auto eval = [&](long panels) {
    double total = 0.0;
    for (int k = 1; k <= 4; ++k) {
      const auto [z0, z1] = c.segment(k);
      total += quad::arc_integral(integrand, z0, z1, panels);
    }
    return total / (2.0 * M_PI);
  };
  return quad::refine_scalar(eval, c.panels(), opt, 4L * quad::kPanelOrder);
}

inline std::pair<double, QuadratureResult> F1_numeric(const SymmetricMatrix& a,
                                                      const SymmetricMatrix& noise,
                                                      const ContourSpec& c,
                                                      const QuadratureOptions& opt = {}) {
  return F1_numeric(spectral_decompose(a), noise.matrix(), c, opt);
}

// Per-segment pieces M_k = \int_{Gamma_k} ||(zI-A)^{-1} E (zI-A)^{-1}|| dz,
// each refined independently; M_1 + M_2 + M_3 + M_4 = 2 pi F1.
struct SegmentIntegrals {
  std::array<double, 4> m{};  // m[k-1] is M_k
  std::array<QuadratureResult, 4> quadrature{};
  double combined_error() const {
    double e = 0.0;
    for (const auto& q : quadrature) e += q.estimated_error;
    return e;
  }
};

inline SegmentIntegrals segment_integrals(const SpectralData& d, const Eigen::MatrixXd& noise,
                                          const ContourSpec& c, const QuadratureOptions& opt = {}) {
  verify_enclosure(c, d, enclosed_indices(c, d));
  const Eigen::MatrixXd g = d.eigenvectors.transpose() * noise * d.eigenvectors;
  auto integrand = [&](Complex z) {
    const auto w = detail_contour::resolvent_weights(d.eigenvalues, z);
    return detail_contour::scaled_norm(g, w, w);
  };
  SegmentIntegrals out;
  for (int k = 1; k <= 4; ++k) {
    const auto [z0, z1] = c.segment(k);
    auto eval = [&](long panels) { return quad::arc_integral(integrand, z0, z1, panels); };
    auto [value, qr] = quad::refine_scalar(eval, c.panels(), opt, quad::kPanelOrder);
    out.m[static_cast<std::size_t>(k - 1)] = value;
    out.quadrature[static_cast<std::size_t>(k - 1)] = qr;
  }
  return out;
}

inline SegmentIntegrals segment_integrals(const SymmetricMatrix& a, const SymmetricMatrix& noise,
                                          const ContourSpec& c, const QuadratureOptions& opt = {}) {
  return segment_integrals(spectral_decompose(a), noise.matrix(), c, opt);
}

// Largest ||(zI-A)^{-1} E|| over the default quadrature nodes of the contour;
// on a bisecting contour with margin 2||E|| this stays at or below 1/2.
inline double max_node_contraction(const SpectralData& d, const Eigen::MatrixXd& noise,
                                   const ContourSpec& c) {
  const Eigen::MatrixXd b = d.eigenvectors.transpose() * noise;
  const auto& g = quad::gl16();
  double worst = 0.0;
  for (int k = 1; k <= 4; ++k) {
    const auto [z0, z1] = c.segment(k);
    const Complex dz = z1 - z0;
    const long panels = c.panels();
    for (long p = 0; p < panels; ++p) {
      for (int i = 0; i < quad::kPanelOrder; ++i) {
        const double s = (static_cast<double>(p) + 0.5 +
                          0.5 * g.nodes[static_cast<std::size_t>(i)]) /
                         static_cast<double>(panels);
        const Complex z = z0 + dz * s;
        const auto w = detail_contour::resolvent_weights(d.eigenvalues, z);
        worst = std::max(worst, spectral_norm((w.asDiagonal() * b.cast<Complex>()).eval()));
      }
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Closed-form reference integral

struct ArctanIntegral {
  double closed_form = 0.0;  // (2/a) arctan(T/a)
  double bound = 0.0;        // 4/a
};

// \int_{-T}^{T} dt/(t^2 + a^2) for 0 < a <= T; always below 4/a.
inline ArctanIntegral arctan_integral(double a, double t) {
  if (!(a > 0.0) || !(a <= t)) throw ArgumentError("arctan_integral: need 0 < a <= T");
  return {2.0 / a * std::atan(t / a), 4.0 / a};
}

}  // namespace perturb
