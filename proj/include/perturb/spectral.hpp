// Dense symmetric eigendecomposition, spectral projectors, spectral norms,
// complex resolvents, and the symmetric dilation of rectangular matrices.
//
// Conventions used throughout the library:
//   * eigenvalues are sorted descending: lambda_1 >= ... >= lambda_n;
//   * index sets and target indices (p, r, k) are 1-based, matching the
//     usual mathematical notation for lambda_p, delta_p, etc.;
//   * eigenvector sign: the first coordinate of largest absolute value is
//     made positive, so repeated runs produce identical columns.
//
// All types are immutable after construction; operations are pure functions
// and safe for unsynchronized concurrent use.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "perturb/errors.hpp"

namespace perturb {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using IndexSet = std::vector<int>;  // 1-based, validated by ops that take it

// Convenience builder for the leading block {1, ..., p}.
inline IndexSet leading(int p) {
  IndexSet s(static_cast<std::size_t>(p));
  std::iota(s.begin(), s.end(), 1);
  return s;
}

// ---------------------------------------------------------------------------
// SymmetricMatrix

// Dense n x n real symmetric matrix.  Construction symmetrizes the input by
// (M + M^T)/2 and records the asymmetry ||M - M^T||_F; inputs more asymmetric
// than 1e-6 * ||M||_F are rejected rather than silently averaged.
class SymmetricMatrix {
 public:
  explicit SymmetricMatrix(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols() || m.rows() < 1)
      throw ArgumentError("SymmetricMatrix: input must be square with n >= 1");
    asymmetry_ = (m - m.transpose()).norm();
    const double scale = m.norm();
    if (scale > 0.0 && asymmetry_ > 1e-6 * scale)
      throw ArgumentError("SymmetricMatrix: input is not symmetric (||M - M^T||_F = " +
                          std::to_string(asymmetry_) + ")");
    entries_ = 0.5 * (m + m.transpose());
  }

  static SymmetricMatrix zero(Eigen::Index n) { return SymmetricMatrix(Eigen::MatrixXd::Zero(n, n)); }

  Eigen::Index size() const { return entries_.rows(); }
  const Eigen::MatrixXd& matrix() const { return entries_; }
  double asymmetry() const { return asymmetry_; }

  double operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }

  // Largest absolute entry, the K in entrywise-bounded noise models.
  double max_abs_entry() const { return entries_.cwiseAbs().maxCoeff(); }

 private:
  Eigen::MatrixXd entries_;
  double asymmetry_ = 0.0;
};

// ---------------------------------------------------------------------------
// SpectralData

// Full eigendecomposition A = U diag(lambda) U^T with lambda descending and
// U orthonormal; source_norm caches sigma_1 = max_i |lambda_i| = ||A||.
struct SpectralData {
  Eigen::VectorXd eigenvalues;   // descending
  Eigen::MatrixXd eigenvectors;  // column i pairs with eigenvalues(i)
  double source_norm = 0.0;

  Eigen::Index size() const { return eigenvalues.size(); }

  // 1-based accessors matching lambda_p notation; lambda(n+1) = 0 by the
  // zero-padding convention used for halving indices.
  double lambda(int p) const {
    if (p < 1) throw ArgumentError("lambda: index must be >= 1");
    if (p > size()) return 0.0;
    return eigenvalues(p - 1);
  }
  Eigen::VectorXd u(int p) const { return eigenvectors.col(p - 1); }
};

namespace detail {

// Make the first coordinate of largest absolute value positive.
inline void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
  Eigen::Index pivot = 0;
  double best = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > best) {
      best = std::abs(v(i));
      pivot = i;
    }
  }
  if (v(pivot) < 0.0) v = -v;
}

// Secondary sort key inside exactly-degenerate eigenvalue blocks: index of
// the first nonzero coordinate, then its sign.  Projectors onto a degenerate
// block are basis-independent; this only pins a reproducible column order.
inline bool vector_order(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double tol = 0.0;
  Eigen::Index ia = 0, ib = 0;
  while (ia < a.size() && std::abs(a(ia)) <= tol) ++ia;
  while (ib < b.size() && std::abs(b(ib)) <= tol) ++ib;
  if (ia != ib) return ia < ib;
  if (ia < a.size() && (a(ia) < 0.0) != (b(ib) < 0.0)) return a(ia) > 0.0;
  return false;
}

}  // namespace detail

// Eigendecomposition with descending eigenvalues, sign-fixed eigenvectors,
// and deterministic ordering of exactly-equal eigenvalues.
inline SpectralData spectral_decompose(const SymmetricMatrix& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a.matrix());
  if (solver.info() != Eigen::Success)
    throw NumericalError("spectral_decompose: eigensolver failed to converge within " +
                         std::to_string(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>::m_maxIterations) +
                         " sweeps");
  const Eigen::Index n = a.size();
  SpectralData d;
  d.eigenvalues.resize(n);
  d.eigenvectors.resize(n, n);
  // Eigen returns ascending order; reverse to descending.
  for (Eigen::Index i = 0; i < n; ++i) {
    d.eigenvalues(i) = solver.eigenvalues()(n - 1 - i);
    d.eigenvectors.col(i) = solver.eigenvectors().col(n - 1 - i);
    detail::fix_sign(d.eigenvectors.col(i));
  }
  // Deterministic column order inside exactly-equal eigenvalue runs.
  for (Eigen::Index lo = 0; lo < n;) {
    Eigen::Index hi = lo + 1;
    while (hi < n && d.eigenvalues(hi) == d.eigenvalues(lo)) ++hi;
    if (hi - lo > 1) {
      std::vector<Eigen::Index> idx(static_cast<std::size_t>(hi - lo));
      std::iota(idx.begin(), idx.end(), lo);
      std::sort(idx.begin(), idx.end(), [&](Eigen::Index x, Eigen::Index y) {
        return detail::vector_order(d.eigenvectors.col(x), d.eigenvectors.col(y));
      });
      Eigen::MatrixXd block(n, hi - lo);
      for (Eigen::Index j = 0; j < hi - lo; ++j) block.col(j) = d.eigenvectors.col(idx[static_cast<std::size_t>(j)]);
      d.eigenvectors.middleCols(lo, hi - lo) = block;
    }
    lo = hi;
  }
  d.source_norm = d.eigenvalues.cwiseAbs().maxCoeff();
  return d;
}

// ---------------------------------------------------------------------------
// Projector

// Orthogonal projection Pi_S = sum_{i in S} u_i u_i^T onto the span of the
// selected eigenvectors.  `subset` keeps the (1-based) indices it came from.
struct Projector {
  Eigen::MatrixXd matrix;
  IndexSet subset;

  Eigen::Index size() const { return matrix.rows(); }
  int rank() const { return static_cast<int>(subset.size()); }
};

namespace detail {

inline void validate_index_set(const IndexSet& s, Eigen::Index n, const char* who) {
  if (s.empty()) throw ArgumentError(std::string(who) + ": index set must be nonempty");
  for (int i : s)
    if (i < 1 || i > n)
      throw ArgumentError(std::string(who) + ": index " + std::to_string(i) + " outside {1,...," +
                          std::to_string(n) + "}");
}

}  // namespace detail

inline Projector projector(const SpectralData& d, const IndexSet& s) {
  detail::validate_index_set(s, d.size(), "projector");
  Projector p;
  p.subset = s;
  std::sort(p.subset.begin(), p.subset.end());
  p.subset.erase(std::unique(p.subset.begin(), p.subset.end()), p.subset.end());
  p.matrix = Eigen::MatrixXd::Zero(d.size(), d.size());
  for (int i : p.subset) {
    const auto ui = d.eigenvectors.col(i - 1);
    p.matrix.noalias() += ui * ui.transpose();
  }
  return p;
}

// ---------------------------------------------------------------------------
// Spectral norm

// Largest singular value, computed as sqrt(lambda_max(M^H M)) so the same
// self-adjoint engine serves real, complex, and rectangular inputs.
template <typename Derived>
double spectral_norm(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> gram = m.adjoint() * m;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> solver(
      gram, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw NumericalError("spectral_norm: eigensolver failed to converge");
  const double top = solver.eigenvalues()(m.cols() - 1);
  return std::sqrt(std::max(0.0, top));
}

// Symmetric input: the norm is just the extreme eigenvalue magnitude.
inline double spectral_norm(const SymmetricMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m.matrix(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw NumericalError("spectral_norm: eigensolver failed to converge");
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// Sine distance

// ||P - Q|| in spectral norm: the sine of the largest principal angle when
// the projectors have equal rank.  Exactly symmetric in its arguments (the
// difference is taken in a canonical order).
inline double sine_distance(const Projector& p, const Projector& q) {
  if (p.size() != q.size()) throw ArgumentError("sine_distance: dimension mismatch");
  const double* a = p.matrix.data();
  const double* b = q.matrix.data();
  const Eigen::Index count = p.matrix.size();
  bool swap = false;
  for (Eigen::Index i = 0; i < count; ++i) {
    if (a[i] != b[i]) {
      swap = a[i] < b[i];
      break;
    }
  }
  Eigen::MatrixXd diff = swap ? (q.matrix - p.matrix).eval() : (p.matrix - q.matrix).eval();
  return spectral_norm(diff);
}

// ---------------------------------------------------------------------------
// Resolvent

// (zI - A)^{-1} through the spectral decomposition: sum_i u_i u_i^T / (z - lambda_i).
inline ComplexMatrix resolvent(const SpectralData& d, std::complex<double> z) {
  const double safe_dist = 1e-12 * std::max(d.source_norm, 1e-300);
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (std::abs(z - std::complex<double>(d.eigenvalues(i), 0.0)) <= safe_dist)
      throw SingularityError("resolvent: z within 1e-12*sigma_1 of eigenvalue " +
                             std::to_string(d.eigenvalues(i)),
                             d.eigenvalues(i));
  }
  Eigen::VectorXcd weights(d.size());
  for (Eigen::Index i = 0; i < d.size(); ++i)
    weights(i) = 1.0 / (z - std::complex<double>(d.eigenvalues(i), 0.0));
  ComplexMatrix u = d.eigenvectors.cast<std::complex<double>>();
  return u * weights.asDiagonal() * u.adjoint();
}

inline ComplexMatrix resolvent(const SymmetricMatrix& a, std::complex<double> z) {
  return resolvent(spectral_decompose(a), z);
}

// ---------------------------------------------------------------------------
// Symmetric dilation

// [[0, A], [A^T, 0]] of size (m+n); its nonzero eigenvalues come in pairs
// +-sigma_i(A) with eigenvectors (u_i, +-v_i)/sqrt(2).
template <typename Derived>
SymmetricMatrix symmetric_dilation(const Eigen::MatrixBase<Derived>& a) {
  const Eigen::Index m = a.rows(), n = a.cols();
  if (m < 1 || n < 1) throw ArgumentError("symmetric_dilation: empty matrix");
  Eigen::MatrixXd block = Eigen::MatrixXd::Zero(m + n, m + n);
  block.topRightCorner(m, n) = a;
  block.bottomLeftCorner(n, m) = a.transpose();
  return SymmetricMatrix(block);
}

}  // namespace perturb
