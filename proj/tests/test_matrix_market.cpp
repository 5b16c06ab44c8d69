#include <cstdio>
#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "perturb/matrix_market.hpp"
#include "perturb/noise.hpp"

using namespace perturb;

TEST_CASE("matrix market round-trip is bit exact") {
  auto a = wigner(7, 12321);
  std::stringstream ss;
  matrix_market::write_symmetric(ss, a);
  auto back = matrix_market::read(ss);
  CHECK((back.array() == a.matrix().array()).all());

  Eigen::MatrixXd g = rectangular_gaussian(5, 3, 8);
  g(0, 0) = 1e-300;
  g(1, 0) = -3.141592653589793e100;
  g(2, 2) = 0.1;  // not exactly representable; must still round-trip
  std::stringstream sg;
  matrix_market::write_general(sg, g);
  auto gback = matrix_market::read(sg);
  CHECK((gback.array() == g.array()).all());
}

TEST_CASE("matrix market file I/O and headers") {
  const auto dir = std::filesystem::temp_directory_path() / "perturb_mm_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "a.mtx").string();
  auto a = wigner(4, 5);
  matrix_market::write_symmetric(path, a);
  auto back = matrix_market::read_symmetric(path);
  CHECK((back.matrix().array() == a.matrix().array()).all());

  std::ifstream is(path);
  std::string header;
  std::getline(is, header);
  CHECK(header == "%%MatrixMarket matrix array real symmetric");
  std::filesystem::remove_all(dir);
}

TEST_CASE("matrix market rejects malformed input") {
  std::stringstream bad1("%%MatrixMarket matrix coordinate real general\n2 2\n1 1 1.0\n");
  CHECK_THROWS_AS(matrix_market::read(bad1), ArgumentError);

  std::stringstream bad2("%%MatrixMarket matrix array real general\n2 2\n1.0\nnot_a_number\n");
  CHECK_THROWS_AS(matrix_market::read(bad2), ArgumentError);

  std::stringstream bad3("%%MatrixMarket matrix array real general\n2 2\n1.0\n");
  CHECK_THROWS_AS(matrix_market::read(bad3), ArgumentError);

  CHECK_THROWS_AS(matrix_market::read("/nonexistent/path/x.mtx"), ArgumentError);
}
