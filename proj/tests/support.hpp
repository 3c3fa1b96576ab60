#pragma once

#include "churn/dataset.hpp"
#include "churn/random.hpp"

#include <Eigen/Core>

#include <initializer_list>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace test {

inline Eigen::VectorXd vec(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

inline Eigen::VectorXi labels(std::initializer_list<int> values) {
  Eigen::VectorXi v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (int x : values) v[i++] = x;
  return v;
}

inline churn::DownloadSeries series(std::string id, std::string_view start, Eigen::VectorXd counts) {
  return churn::DownloadSeries{std::move(id), churn::parse_date(start), std::move(counts)};
}

/// Uniform random integer in [lo, hi].
inline int uniform_int(churn::Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(churn::uniform_below(rng, static_cast<std::uint64_t>(hi - lo + 1)));
}

inline Eigen::VectorXd random_counts(churn::Rng& rng, Eigen::Index length, int max_count = 20) {
  Eigen::VectorXd v(length);
  for (Eigen::Index i = 0; i < length; ++i) v[i] = uniform_int(rng, 0, max_count);
  return v;
}

inline Eigen::MatrixXd random_matrix(churn::Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  return m;
}

/// Random +/-1 labels with both classes present (needs n >= 2).
inline Eigen::VectorXi random_labels(churn::Rng& rng, Eigen::Index n) {
  Eigen::VectorXi y(n);
  for (Eigen::Index i = 0; i < n; ++i) y[i] = churn::uniform_below(rng, 2) ? 1 : -1;
  y[0] = 1;
  y[1] = -1;
  return y;
}

struct Blobs {
  Eigen::MatrixXd x;
  Eigen::VectorXi y;
};

/// Two isotropic unit-variance Gaussian clusters whose centers are
/// `separation` standard deviations apart along the first axis, classes
/// alternating by row.
inline Blobs make_blobs(Eigen::Index n, Eigen::Index dims, double separation, std::uint64_t seed) {
  churn::Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Blobs b{Eigen::MatrixXd(n, dims), Eigen::VectorXi(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const int y = i % 2 == 0 ? 1 : -1;
    b.y[i] = y;
    for (Eigen::Index j = 0; j < dims; ++j) b.x(i, j) = normal(rng);
    b.x(i, 0) += y * separation / 2.0;
  }
  return b;
}

inline Blobs xor4() {
  Blobs b{Eigen::MatrixXd(4, 2), Eigen::VectorXi(4)};
  b.x << 0, 0, 0, 1, 1, 0, 1, 1;
  b.y << -1, 1, 1, -1;
  return b;
}

/// Minimal XML well-formedness check: balanced tags, quoted attributes, a
/// single root element, and only known entities.
inline bool well_formed_xml(std::string_view doc, std::string* why = nullptr) {
  const auto fail = [&](std::string msg) {
    if (why) *why = std::move(msg);
    return false;
  };
  std::vector<std::string> stack;
  int roots = 0;
  std::size_t i = 0;
  while (i < doc.size()) {
    if (doc[i] == '&') {
      const auto semi = doc.find(';', i);
      if (semi == std::string_view::npos) return fail("unterminated entity");
      const auto ent = doc.substr(i, semi - i + 1);
      if (ent != "&amp;" && ent != "&lt;" && ent != "&gt;" && ent != "&quot;" && ent != "&apos;")
        return fail("unknown entity " + std::string(ent));
      i = semi + 1;
      continue;
    }
    if (doc[i] != '<') {
      if (stack.empty() && doc[i] != '\n' && doc[i] != ' ' && doc[i] != '\r' && doc[i] != '\t')
        return fail("text outside the root element");
      ++i;
      continue;
    }
    if (doc.substr(i, 5) == "<?xml") {
      const auto end = doc.find("?>", i);
      if (end == std::string_view::npos || i != 0) return fail("bad declaration");
      i = end + 2;
      continue;
    }
    // Scan the tag honoring quoted attribute values.
    std::size_t j = i + 1;
    char quote = 0;
    for (; j < doc.size(); ++j) {
      if (quote) {
        if (doc[j] == quote) quote = 0;
        else if (doc[j] == '<') return fail("'<' inside attribute");
      } else if (doc[j] == '"' || doc[j] == '\'') {
        quote = doc[j];
      } else if (doc[j] == '>') {
        break;
      }
    }
    if (j >= doc.size()) return fail("unterminated tag");
    std::string_view tag = doc.substr(i + 1, j - i - 1);
    i = j + 1;
    if (!tag.empty() && tag.front() == '/') {
      const auto name = tag.substr(1);
      if (stack.empty() || stack.back() != name) return fail("mismatched </" + std::string(name) + ">");
      stack.pop_back();
      continue;
    }
    const bool self_closing = !tag.empty() && tag.back() == '/';
    const auto name_end = tag.find_first_of(" \t\n/");
    const std::string name(tag.substr(0, name_end));
    if (name.empty()) return fail("empty tag name");
    if (stack.empty() && ++roots > 1) return fail("multiple roots");
    if (!self_closing) stack.push_back(name);
  }
  if (!stack.empty()) return fail("unclosed <" + stack.back() + ">");
  if (roots != 1) return fail("no root element");
  return true;
}

}  // namespace test
