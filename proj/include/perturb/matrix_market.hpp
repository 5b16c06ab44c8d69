// MatrixMarket dense ("array") I/O for real matrices.
//
// Values are written as decimal text with 17 significant digits, which
// round-trips IEEE doubles exactly; symmetric files store the lower
// triangle column-major per the format specification.

#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

#include <Eigen/Core>

#include "perturb/errors.hpp"
#include "perturb/spectral.hpp"

namespace perturb {
namespace matrix_market {

namespace detail {

inline std::string format_value(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  if (ec != std::errc()) throw NumericalError("matrix_market: value formatting failed");
  return std::string(buf, ptr);
}

inline double parse_value(const std::string& tok, const std::string& path) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ArgumentError("matrix_market: bad numeric token '" + tok + "' in " + path);
  return v;
}

}  // namespace detail

inline void write_general(std::ostream& os, const Eigen::MatrixXd& m) {
  os << "%%MatrixMarket matrix array real general\n";
  os << m.rows() << " " << m.cols() << "\n";
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) os << detail::format_value(m(i, j)) << "\n";
}

inline void write_symmetric(std::ostream& os, const SymmetricMatrix& m) {
  os << "%%MatrixMarket matrix array real symmetric\n";
  os << m.size() << " " << m.size() << "\n";
  for (Eigen::Index j = 0; j < m.size(); ++j)
    for (Eigen::Index i = j; i < m.size(); ++i) os << detail::format_value(m(i, j)) << "\n";
}

inline void write_general(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream os(path);
  if (!os) throw ArgumentError("matrix_market: cannot open " + path + " for writing");
  write_general(os, m);
}

inline void write_symmetric(const std::string& path, const SymmetricMatrix& m) {
  std::ofstream os(path);
  if (!os) throw ArgumentError("matrix_market: cannot open " + path + " for writing");
  write_symmetric(os, m);
}

// Reads a dense real matrix in either `symmetric` or `general` form.
inline Eigen::MatrixXd read(std::istream& is, const std::string& path = "<stream>") {
  std::string header;
  if (!std::getline(is, header))
    throw ArgumentError("matrix_market: empty file " + path);
  std::istringstream hs(header);
  std::string banner, object, fmt, field, symmetry;
  hs >> banner >> object >> fmt >> field >> symmetry;
  if (banner != "%%MatrixMarket" || object != "matrix" || fmt != "array" || field != "real" ||
      (symmetry != "general" && symmetry != "symmetric"))
    throw ArgumentError("matrix_market: unsupported header '" + header + "' in " + path +
                        " (expected dense real array, general or symmetric)");

  std::string line;
  Eigen::Index rows = 0, cols = 0;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '%') continue;
    std::istringstream ls(line);
    if (!(ls >> rows >> cols)) throw ArgumentError("matrix_market: bad size line in " + path);
    break;
  }
  if (rows < 1 || cols < 1) throw ArgumentError("matrix_market: bad dimensions in " + path);
  if (symmetry == "symmetric" && rows != cols)
    throw ArgumentError("matrix_market: symmetric file must be square in " + path);

  Eigen::MatrixXd m(rows, cols);
  auto next_value = [&]() -> double {
    std::string tok;
    while (is >> tok) {
      if (tok[0] == '%') {
        std::getline(is, line);
        continue;
      }
      return detail::parse_value(tok, path);
    }
    throw ArgumentError("matrix_market: unexpected end of data in " + path);
  };

  if (symmetry == "general") {
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = next_value();
  } else {
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = j; i < rows; ++i) {
        const double v = next_value();
        m(i, j) = v;
        m(j, i) = v;
      }
  }
  return m;
}

inline Eigen::MatrixXd read(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ArgumentError("matrix_market: cannot open " + path);
  return read(is, path);
}

inline SymmetricMatrix read_symmetric(const std::string& path) {
  return SymmetricMatrix(read(path));
}

}  // namespace matrix_market
}  // namespace perturb
