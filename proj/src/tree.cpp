#include "churn/tree.hpp"

#include "text_io.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <numeric>
#include <tuple>

namespace churn {

BinnedFeatures bin_features(const Eigen::MatrixXd& rows, int max_bins) {
  max_bins = std::clamp(max_bins, 2, kMaxBins);
  BinnedFeatures out;
  out.rows = rows.rows();
  out.cols = rows.cols();
  out.codes.resize(static_cast<std::size_t>(out.rows * out.cols));
  out.cuts.resize(static_cast<std::size_t>(out.cols));
  std::vector<double> sorted(static_cast<std::size_t>(out.rows));
  for (Eigen::Index j = 0; j < out.cols; ++j) {
    for (Eigen::Index i = 0; i < out.rows; ++i) sorted[static_cast<std::size_t>(i)] = rows(i, j);
    std::sort(sorted.begin(), sorted.end());
    auto& cuts = out.cuts[static_cast<std::size_t>(j)];
    std::vector<double> distinct = sorted;
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (static_cast<int>(distinct.size()) <= max_bins) {
      for (std::size_t k = 1; k < distinct.size(); ++k) {
        const double a = distinct[k - 1], b = distinct[k];
        double mid = a + 0.5 * (b - a);
        if (mid >= b) mid = a;
        cuts.push_back(mid);
      }
    } else {
      const auto n = sorted.size();
      for (int k = 1; k < max_bins; ++k) {
        const double v = sorted[static_cast<std::size_t>(k) * n / static_cast<std::size_t>(max_bins)];
        if (v < distinct.back() && (cuts.empty() || v > cuts.back())) cuts.push_back(v);
      }
    }
    std::uint8_t* col = out.codes.data() + j * out.rows;
    for (Eigen::Index i = 0; i < out.rows; ++i)
      col[i] = static_cast<std::uint8_t>(std::lower_bound(cuts.begin(), cuts.end(), rows(i, j)) - cuts.begin());
  }
  return out;
}

double DecisionTree::predict_binned(const BinnedFeatures& binned, Eigen::Index row) const {
  int k = 0;
  while (nodes[static_cast<std::size_t>(k)].feature >= 0) {
    const auto& n = nodes[static_cast<std::size_t>(k)];
    k = binned.code(row, n.feature) <= n.bin ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(k)].value;
}

int DecisionTree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<int> level(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    deepest = std::max(deepest, level[k]);
    if (nodes[k].feature >= 0) {
      level[static_cast<std::size_t>(nodes[k].left)] = level[k] + 1;
      level[static_cast<std::size_t>(nodes[k].right)] = level[k] + 1;
    }
  }
  return deepest;
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.feature < 0; }));
}

void DecisionTree::save(std::ostream& out) const {
  out << nodes.size() << '\n';
  for (const auto& n : nodes)
    out << n.feature << ' ' << n.bin << ' ' << io::format_double(n.threshold) << ' ' << n.left << ' ' << n.right
        << ' ' << io::format_double(n.value) << '\n';
}

DecisionTree DecisionTree::load(std::istream& in) {
  DecisionTree t;
  const auto count = io::read<std::size_t>(in, "tree size");
  t.nodes.resize(count);
  for (auto& n : t.nodes) {
    n.feature = io::read<int>(in, "node feature");
    n.bin = io::read<int>(in, "node bin");
    n.threshold = io::read<double>(in, "node threshold");
    n.left = io::read<int>(in, "node left");
    n.right = io::read<int>(in, "node right");
    n.value = io::read<double>(in, "node value");
    const auto valid = [&](int child) { return child > 0 && static_cast<std::size_t>(child) < count; };
    if (n.feature >= 0 && !(valid(n.left) && valid(n.right))) throw ParseError(0, "model: dangling tree node");
  }
  if (t.nodes.empty()) throw ParseError(0, "model: empty tree");
  return t;
}

double gini_impurity(double positive, double negative) {
  const double total = positive + negative;
  if (total <= 0.0) return 0.0;
  const double p = positive / total, q = negative / total;
  return 1.0 - p * p - q * q;
}

namespace {

struct Task {
  int node;
  std::size_t begin;
  std::size_t end;
  int depth;
};

// Small nodes are scanned by sorting instead of through a full histogram.
constexpr std::size_t kSortScanLimit = 48;

}  // namespace

DecisionTree grow_gini_tree(const BinnedFeatures& binned, const Eigen::VectorXi& labels,
                            const std::vector<int>& weights, const GiniTreeOptions& options, Rng& rng) {
  const auto n_features = static_cast<std::size_t>(binned.cols);
  std::vector<int> idx;
  for (Eigen::Index i = 0; i < binned.rows; ++i)
    if (weights[static_cast<std::size_t>(i)] > 0) idx.push_back(static_cast<int>(i));

  std::vector<int> order(n_features);
  std::iota(order.begin(), order.end(), 0);
  std::array<double, kMaxBins> hist_pos{}, hist_neg{};
  std::vector<std::tuple<std::uint8_t, int, int>> scratch;

  DecisionTree tree;
  tree.nodes.emplace_back();
  std::vector<Task> stack{{0, 0, idx.size(), 0}};
  const double min_leaf = std::max(1, options.min_leaf);
  const int mtry = std::max(1, options.features_per_split);

  while (!stack.empty()) {
    const Task task = stack.back();
    stack.pop_back();
    double pos = 0.0, neg = 0.0;
    for (std::size_t k = task.begin; k < task.end; ++k) {
      const int i = idx[k];
      (labels[i] > 0 ? pos : neg) += weights[static_cast<std::size_t>(i)];
    }
    tree.nodes[static_cast<std::size_t>(task.node)].value = pos >= neg ? 1.0 : -1.0;
    const double total = pos + neg;
    if (pos == 0.0 || neg == 0.0) continue;
    if (options.max_depth > 0 && task.depth >= options.max_depth) continue;
    if (total < 2.0 * min_leaf) continue;

    // Maximizing (pL^2+nL^2)/NL + (pR^2+nR^2)/NR is maximizing the Gini decrease.
    double best_score = -std::numeric_limits<double>::infinity();
    int best_feature = -1, best_bin = 0;
    const auto consider = [&](double lp, double ln, int bin, int feature) {
      const double left = lp + ln, right = total - left;
      if (left < min_leaf || right < min_leaf) return;
      const double rp = pos - lp, rn = neg - ln;
      const double score = (lp * lp + ln * ln) / left + (rp * rp + rn * rn) / right;
      if (score > best_score) {
        best_score = score;
        best_feature = feature;
        best_bin = bin;
      }
    };

    int visited = 0;
    for (std::size_t k = 0; k < n_features && visited < mtry; ++k) {
      std::swap(order[k], order[k + static_cast<std::size_t>(uniform_below(rng, n_features - k))]);
      const int f = order[k];
      const std::uint8_t* col = binned.column(f);
      bool varies = false;
      if (task.end - task.begin <= kSortScanLimit) {
        scratch.clear();
        for (std::size_t m = task.begin; m < task.end; ++m) {
          const int i = idx[m];
          scratch.emplace_back(col[i], weights[static_cast<std::size_t>(i)], labels[i]);
        }
        std::sort(scratch.begin(), scratch.end());
        double lp = 0.0, ln = 0.0;
        for (std::size_t m = 0; m + 1 < scratch.size(); ++m) {
          const auto [code, w, y] = scratch[m];
          (y > 0 ? lp : ln) += w;
          if (std::get<0>(scratch[m + 1]) != code) {
            varies = true;
            consider(lp, ln, code, f);
          }
        }
      } else {
        int lo = kMaxBins, hi = -1;
        for (std::size_t m = task.begin; m < task.end; ++m) {
          const int i = idx[m];
          const int c = col[i];
          (labels[i] > 0 ? hist_pos : hist_neg)[static_cast<std::size_t>(c)] += weights[static_cast<std::size_t>(i)];
          lo = std::min(lo, c);
          hi = std::max(hi, c);
        }
        varies = hi > lo;
        double lp = 0.0, ln = 0.0;
        for (int c = lo; c < hi; ++c) {
          const auto b = static_cast<std::size_t>(c);
          if (hist_pos[b] == 0.0 && hist_neg[b] == 0.0) continue;
          lp += hist_pos[b];
          ln += hist_neg[b];
          consider(lp, ln, c, f);
        }
        for (int c = lo; c <= hi; ++c) hist_pos[static_cast<std::size_t>(c)] = hist_neg[static_cast<std::size_t>(c)] = 0.0;
      }
      if (varies) ++visited;
    }
    if (best_feature < 0) continue;

    const std::uint8_t* col = binned.column(best_feature);
    const auto mid = std::partition(idx.begin() + static_cast<std::ptrdiff_t>(task.begin),
                                    idx.begin() + static_cast<std::ptrdiff_t>(task.end),
                                    [&](int i) { return col[i] <= best_bin; });
    const auto split = static_cast<std::size_t>(mid - idx.begin());
    const int left = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    auto& node = tree.nodes[static_cast<std::size_t>(task.node)];
    node.feature = best_feature;
    node.bin = best_bin;
    node.threshold = binned.cuts[static_cast<std::size_t>(best_feature)][static_cast<std::size_t>(best_bin)];
    node.left = left;
    node.right = left + 1;
    stack.push_back({left + 1, split, task.end, task.depth + 1});
    stack.push_back({left, task.begin, split, task.depth + 1});
  }
  return tree;
}

DecisionTree grow_gradient_tree(const BinnedFeatures& binned, const Eigen::VectorXd& gradient,
                                const Eigen::VectorXd& hessian, const GradientTreeOptions& options) {
  std::vector<int> idx(static_cast<std::size_t>(binned.rows));
  std::iota(idx.begin(), idx.end(), 0);
  std::array<double, kMaxBins> hist_g{}, hist_h{};
  std::array<int, kMaxBins> hist_n{};
  const double l2 = options.l2;
  const int min_leaf = std::max(1, options.min_leaf);

  DecisionTree tree;
  tree.nodes.emplace_back();
  std::vector<Task> stack{{0, 0, idx.size(), 0}};
  while (!stack.empty()) {
    const Task task = stack.back();
    stack.pop_back();
    double g = 0.0, h = 0.0;
    for (std::size_t k = task.begin; k < task.end; ++k) {
      g += gradient[idx[k]];
      h += hessian[idx[k]];
    }
    tree.nodes[static_cast<std::size_t>(task.node)].value = -g / (h + l2);
    const int count = static_cast<int>(task.end - task.begin);
    if (task.depth >= options.max_depth || count < 2 * min_leaf) continue;

    const double parent = g * g / (h + l2);
    double best_gain = 1e-12;
    int best_feature = -1, best_bin = 0;
    for (Eigen::Index f = 0; f < binned.cols; ++f) {
      const std::uint8_t* col = binned.column(f);
      int lo = kMaxBins, hi = -1;
      for (std::size_t m = task.begin; m < task.end; ++m) {
        const int i = idx[m];
        const auto c = static_cast<std::size_t>(col[i]);
        hist_g[c] += gradient[i];
        hist_h[c] += hessian[i];
        ++hist_n[c];
        lo = std::min<int>(lo, col[i]);
        hi = std::max<int>(hi, col[i]);
      }
      double gl = 0.0, hl = 0.0;
      int nl = 0;
      for (int c = lo; c < hi; ++c) {
        const auto b = static_cast<std::size_t>(c);
        if (hist_n[b] == 0) continue;
        gl += hist_g[b];
        hl += hist_h[b];
        nl += hist_n[b];
        if (nl < min_leaf || count - nl < min_leaf) continue;
        const double gr = g - gl, hr = h - hl;
        const double gain = gl * gl / (hl + l2) + gr * gr / (hr + l2) - parent;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = static_cast<int>(f);
          best_bin = c;
        }
      }
      for (int c = lo; c <= hi; ++c) {
        const auto b = static_cast<std::size_t>(c);
        hist_g[b] = hist_h[b] = 0.0;
        hist_n[b] = 0;
      }
    }
    if (best_feature < 0) continue;

    const std::uint8_t* col = binned.column(best_feature);
    const auto mid = std::partition(idx.begin() + static_cast<std::ptrdiff_t>(task.begin),
                                    idx.begin() + static_cast<std::ptrdiff_t>(task.end),
                                    [&](int i) { return col[i] <= best_bin; });
    const auto split = static_cast<std::size_t>(mid - idx.begin());
    const int left = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    auto& node = tree.nodes[static_cast<std::size_t>(task.node)];
    node.feature = best_feature;
    node.bin = best_bin;
    node.threshold = binned.cuts[static_cast<std::size_t>(best_feature)][static_cast<std::size_t>(best_bin)];
    node.left = left;
    node.right = left + 1;
    stack.push_back({left + 1, split, task.end, task.depth + 1});
    stack.push_back({left, task.begin, split, task.depth + 1});
  }
  return tree;
}

}  // namespace churn
