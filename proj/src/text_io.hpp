#pragma once

// Token-level helpers for the model text format.

#include "churn/error.hpp"

#include <Eigen/Core>

#include <charconv>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

namespace churn::io {

/// Shortest representation that reads back to the same double.
inline std::string format_double(double v) {
  char buf[40];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

template <typename T>
T read(std::istream& in, std::string_view what) {
  T v{};
  if (!(in >> v)) throw ParseError(0, "model: cannot read " + std::string(what));
  return v;
}

inline void expect(std::istream& in, std::string_view token) {
  std::string got;
  if (!(in >> got) || got != token)
    throw ParseError(0, "model: expected '" + std::string(token) + "', found '" + got + "'");
}

inline void write_vector(std::ostream& out, const Eigen::VectorXd& v) {
  out << v.size();
  for (Eigen::Index i = 0; i < v.size(); ++i) out << ' ' << format_double(v[i]);
  out << '\n';
}

inline Eigen::VectorXd read_vector(std::istream& in, std::string_view what) {
  const auto n = read<Eigen::Index>(in, what);
  if (n < 0) throw ParseError(0, "model: negative size for " + std::string(what));
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = read<double>(in, what);
  return v;
}

inline void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  out << m.rows() << ' ' << m.cols();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << ' ' << format_double(m(i, j));
  out << '\n';
}

inline Eigen::MatrixXd read_matrix(std::istream& in, std::string_view what) {
  const auto r = read<Eigen::Index>(in, what);
  const auto c = read<Eigen::Index>(in, what);
  if (r < 0 || c < 0) throw ParseError(0, "model: negative shape for " + std::string(what));
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = read<double>(in, what);
  return m;
}

}  // namespace churn::io
