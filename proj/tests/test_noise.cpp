#include <cmath>

#include "doctest.h"
#include "perturb/noise.hpp"
#include "perturb/spectral.hpp"
#include "support.hpp"

using namespace perturb;

TEST_CASE("wigner: shape, symmetry, determinism") {
  auto e1 = wigner(1, 7);
  CHECK(e1.size() == 1);  // a single standard normal draw

  auto a = wigner(12, 99);
  auto b = wigner(12, 99);
  CHECK((a.matrix().array() == b.matrix().array()).all());
  CHECK((a.matrix() - a.matrix().transpose()).norm() == 0.0);

  auto c = wigner(12, 100);
  CHECK((a.matrix().array() != c.matrix().array()).any());
}

TEST_CASE("wigner moments: mean near 0, variance near 1") {
  const Eigen::Index n = 80;
  auto e = wigner(n, 5150);
  double sum = 0.0, sumsq = 0.0;
  long count = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      sum += e(i, j);
      sumsq += e(i, j) * e(i, j);
      ++count;
    }
  }
  const double mean = sum / count;
  const double var = sumsq / count - mean * mean;
  CHECK(std::abs(mean) <= 3.0 / std::sqrt(static_cast<double>(count)));
  CHECK(std::abs(var - 1.0) <= 3.0 * std::sqrt(2.0 / static_cast<double>(count)));

  // rademacher entries are exactly +-1
  auto r = wigner(20, 11, SubGaussian::Rademacher);
  CHECK((r.matrix().cwiseAbs().array() == 1.0).all());
}

TEST_CASE("wigner norm concentrates near 2 sqrt(n) (reduced-size smoke)") {
  const Eigen::Index n = 150;
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const double ratio = spectral_norm(wigner(n, seed)) / (2.0 * std::sqrt(double(n)));
    if (0.8 <= ratio && ratio <= 1.2) ++hits;
  }
  CHECK(hits >= 19);
}

TEST_CASE("wigner cross term |u^T E v| stays logarithmic") {
  const Eigen::Index n = 400;
  const Eigen::VectorXd u = rng::unit_vector(n, 1);
  const Eigen::VectorXd v = rng::unit_vector(n, 2);
  const double cap = 8.0 * std::sqrt(std::log(static_cast<double>(n)));
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    if (std::abs(u.dot(wigner(n, seed).matrix() * v)) <= cap) ++hits;
  }
  CHECK(hits >= 95);
}

TEST_CASE("sparsify: rho = 1 is the identity, support is bit-exact") {
  auto a = wigner(9, 31);
  auto full = sparsify(a, 1.0, 5);
  CHECK((full.a_tilde.matrix().array() == a.matrix().array()).all());
  CHECK(full.noise.matrix().norm() == 0.0);

  auto sp = sparsify(a, 0.4, 6);
  for (Eigen::Index i = 0; i < 9; ++i)
    for (Eigen::Index j = 0; j < 9; ++j) {
      const double v = sp.a_tilde(i, j);
      CHECK((v == 0.0 || v == a(i, j) / 0.4));
    }
  CHECK(sp.entry_bound_k == doctest::Approx(a.max_abs_entry()));
  CHECK_THROWS_AS(sparsify(a, 0.0, 1), ArgumentError);
  CHECK_THROWS_AS(sparsify(a, 1.5, 1), ArgumentError);
}

TEST_CASE("sparsify: single entry mean over many seeds is unbiased") {
  Eigen::MatrixXd m(1, 1);
  m << 0.7;
  SymmetricMatrix a(m);
  const double rho = 0.5;
  double sum = 0.0;
  const int k = 10000;
  for (int seed = 0; seed < k; ++seed) sum += sparsify(a, rho, static_cast<std::uint64_t>(seed)).a_tilde(0, 0);
  const double mean = sum / k;
  const double se = 0.7 * std::sqrt((1.0 - rho) / rho) / std::sqrt(static_cast<double>(k));
  CHECK(std::abs(mean - 0.7) <= 3.0 * se);
}

TEST_CASE("sparsify: entrywise unbiasedness across a small matrix") {
  auto a = wigner(6, 808);
  const double rho = 0.3;
  const int k = 4000;
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(6, 6);
  for (int seed = 0; seed < k; ++seed) acc += sparsify(a, rho, 70000u + seed).a_tilde.matrix();
  acc /= k;
  const double cap = 3.0 * a.max_abs_entry() / std::sqrt(rho * k);
  CHECK(((acc - a.matrix()).cwiseAbs().array() <= cap).all());
}

TEST_CASE("sparsify: noise norm stays under 2 K sqrt(n/rho)") {
  const Eigen::Index n = 200;
  const double rho = 0.3;
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto a = wigner(n, 900 + seed);
    auto sp = sparsify(a, rho, 17000 + seed);
    const double cap = 2.0 * sp.entry_bound_k * std::sqrt(static_cast<double>(n) / rho);
    if (spectral_norm(sp.noise) <= cap) ++hits;
  }
  CHECK(hits == 30);
}

TEST_CASE("sparsify density advisory flag") {
  CHECK(sparsify_density_advisory_ok(500, 0.5) == false);  // log^4(500)/500 > 1
  CHECK(sparsify_density_advisory_ok(20000, 0.9) == true);
  CHECK(sparsify_density_advisory_ok(1, 0.1) == true);
}

TEST_CASE("low_rank_ground: prescription round-trips, ordering, rank") {
  Eigen::VectorXd one(1);
  one << 5.0;
  auto r1 = low_rank_ground(3, one, 1);
  CHECK(r1.data.eigenvalues(0) == doctest::Approx(5.0));
  CHECK(r1.data.eigenvalues(1) == doctest::Approx(0.0));
  CHECK(r1.data.eigenvalues(2) == doctest::Approx(0.0));

  Eigen::VectorXd spectrum(3);
  spectrum << 100, 90, 40;
  auto inst = low_rank_ground(50, spectrum, 2);
  auto d = spectral_decompose(inst.a);
  CHECK(std::abs(d.eigenvalues(0) - 100.0) <= 1e-8);
  CHECK(std::abs(d.eigenvalues(1) - 90.0) <= 1e-8);
  CHECK(std::abs(d.eigenvalues(2) - 40.0) <= 1e-8);
  CHECK(d.eigenvalues.tail(47).cwiseAbs().maxCoeff() <= 1e-8);

  // negative prescribed value lands at the bottom of the descending order
  Eigen::VectorXd with_neg(2);
  with_neg << -7.0, 5.0;  // descending by absolute value
  auto neg = low_rank_ground(4, with_neg, 3);
  CHECK(neg.data.eigenvalues(0) == doctest::Approx(5.0));
  CHECK(neg.data.eigenvalues(3) == doctest::Approx(-7.0));

  // construction-provided data matches a full decomposition
  const Eigen::MatrixXd recon = inst.data.eigenvectors *
                                inst.data.eigenvalues.asDiagonal() *
                                inst.data.eigenvectors.transpose();
  CHECK((recon - inst.a.matrix()).norm() <= 1e-8 * std::max(1.0, inst.a.matrix().norm()));

  // rank: eigenvalues above 1e-8 * |s_1| count the prescribed ones
  int rank = 0;
  for (Eigen::Index i = 0; i < d.size(); ++i)
    if (std::abs(d.eigenvalues(i)) > 1e-8 * 100.0) ++rank;
  CHECK(rank == 3);
}

TEST_CASE("low_rank_ground validation and determinism") {
  Eigen::VectorXd bad(2);
  bad << 1.0, 0.0;
  CHECK_THROWS_AS(low_rank_ground(4, bad, 1), ArgumentError);
  Eigen::VectorXd unsorted(2);
  unsorted << 1.0, 5.0;
  CHECK_THROWS_AS(low_rank_ground(4, unsorted, 1), ArgumentError);

  Eigen::VectorXd s(2);
  s << 9.0, 4.0;
  auto a = low_rank_ground(6, s, 77);
  auto b = low_rank_ground(6, s, 77);
  CHECK((a.a.matrix().array() == b.a.matrix().array()).all());
}

TEST_CASE("rectangular ground and gaussian noise basics") {
  Eigen::VectorXd sigma(3);
  sigma << 10, 5, 2;
  auto g = rectangular_ground(6, 4, sigma, 9);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(g.a);
  CHECK(svd.singularValues()(0) == doctest::Approx(10.0).epsilon(1e-10));
  CHECK(svd.singularValues()(2) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK((g.u.transpose() * g.u - Eigen::MatrixXd::Identity(3, 3)).norm() <= 1e-12);

  auto e1 = rectangular_gaussian(5, 3, 4);
  auto e2 = rectangular_gaussian(5, 3, 4);
  CHECK((e1.array() == e2.array()).all());
}
