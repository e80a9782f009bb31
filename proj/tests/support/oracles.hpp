#pragma once

// Independent reference computations shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "sapar/autodiff.hpp"
#include "sapar/binarize.hpp"
#include "sapar/chart.hpp"
#include "sapar/tree.hpp"

namespace oracle {

using sapar::BinaryTree;
using sapar::LabelId;
using sapar::LabeledSpan;
using sapar::Rng;
using sapar::ScoreChart;
using sapar::Tree;
namespace ad = sapar::ad;

inline std::vector<double> uniform(Rng& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

inline ad::Tensor variable(Rng& rng, std::size_t rows, std::size_t cols, double scale = 1.0) {
  return ad::Tensor::variable(rows, cols, uniform(rng, rows * cols, -scale, scale));
}

struct GradientReport {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
};

/// Central differences (step h) against the analytic gradient of `loss` for
/// the listed leaves. Relative error is |a - n| / max(|a|, |n|, floor). At most
/// `per_tensor` coordinates per leaf are probed, chosen at random.
inline GradientReport check_gradients(const std::function<ad::Tensor()>& loss, std::vector<ad::Tensor> leaves,
                                       Rng& rng, std::size_t per_tensor = 64, double h = 1e-5,
                                       double floor = 1e-4) {
  for (auto& l : leaves) l.zero_grad();
  loss().backward();
  std::vector<std::vector<double>> analytic;
  for (auto& l : leaves) analytic.push_back(l.grad());
  GradientReport report;
  for (std::size_t t = 0; t < leaves.size(); ++t) {
    auto& values = leaves[t].mutable_values();
    std::vector<std::size_t> coords(values.size());
    for (std::size_t k = 0; k < coords.size(); ++k) coords[k] = k;
    if (coords.size() > per_tensor) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(per_tensor);
    }
    for (std::size_t k : coords) {
      const double saved = values[k];
      values[k] = saved + h;
      const double up = loss().item();
      values[k] = saved - h;
      const double down = loss().item();
      values[k] = saved;
      const double numeric = (up - down) / (2 * h);
      const double a = analytic[t][k];
      const double denom = std::max({std::abs(a), std::abs(numeric), floor});
      report.max_relative_error = std::max(report.max_relative_error, std::abs(a - numeric) / denom);
      ++report.checked;
    }
  }
  return report;
}

/// Every unlabeled binary bracketing of [i, j); node labels are left at 0.
inline std::vector<BinaryTree> bracketings(std::size_t i, std::size_t j) {
  if (j - i == 1) return {BinaryTree{0, i, j, {}}};
  std::vector<BinaryTree> out;
  for (std::size_t k = i + 1; k < j; ++k)
    for (const auto& left : bracketings(i, k))
      for (const auto& right : bracketings(k, j)) out.push_back(BinaryTree{0, i, j, {left, right}});
  return out;
}

inline void collect_nodes(BinaryTree& t, std::vector<BinaryTree*>& out) {
  out.push_back(&t);
  for (auto& c : t.children) collect_nodes(c, out);
}

/// Visits every labeled binary tree over n words whose root label is not the
/// dummy label.
inline void for_each_labeled_tree(std::size_t n, std::size_t num_labels,
                                  const std::function<void(const BinaryTree&)>& visit) {
  for (auto shape : bracketings(0, n)) {
    std::vector<BinaryTree*> nodes;
    collect_nodes(shape, nodes);  // root first
    std::vector<LabelId> labels(nodes.size(), 0);
    labels[0] = 1;
    while (true) {
      for (std::size_t k = 0; k < nodes.size(); ++k) nodes[k]->label = labels[k];
      visit(shape);
      std::size_t k = 0;
      while (k < nodes.size()) {
        if (++labels[k] < num_labels) break;
        labels[k] = k == 0 ? 1 : 0;
        ++k;
      }
      if (k == nodes.size()) break;
    }
  }
}

inline std::vector<std::tuple<std::size_t, std::size_t, LabelId>> triples(const BinaryTree& t) {
  std::vector<std::tuple<std::size_t, std::size_t, LabelId>> out;
  std::vector<const BinaryTree*> stack{&t};
  while (!stack.empty()) {
    const BinaryTree* n = stack.back();
    stack.pop_back();
    out.emplace_back(n->begin, n->end, n->label);
    for (const auto& c : n->children) stack.push_back(&c);
  }
  return out;
}

inline double manual_score(const ScoreChart& chart, const BinaryTree& t) {
  double s = 0.0;
  for (auto [i, j, l] : triples(t)) s += chart(i, j, l);
  return s;
}

/// Hamming loss straight from its definition over span sets.
inline double manual_delta(const BinaryTree& candidate, const BinaryTree& gold) {
  std::map<std::pair<std::size_t, std::size_t>, LabelId> g, c;
  for (auto [i, j, l] : triples(gold)) g[{i, j}] = l;
  for (auto [i, j, l] : triples(candidate)) c[{i, j}] = l;
  double d = 0;
  for (auto& [span, l] : c) {
    auto it = g.find(span);
    if (l != (it == g.end() ? 0u : it->second)) ++d;
  }
  for (auto& [span, l] : g)
    if (l != 0 && !c.count(span)) ++d;
  return d;
}

/// Chart with values k / 256 for integer k in [-1024, 1024]; sums of these are
/// exact in binary64.
inline ScoreChart dyadic_chart(Rng& rng, std::size_t n, std::size_t num_labels) {
  ScoreChart chart(n, num_labels);
  std::uniform_int_distribution<int> d(-1024, 1024);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j <= n; ++j)
      for (LabelId l = 1; l < num_labels; ++l) chart.set(i, j, l, d(rng) / 256.0);
  return chart;
}

inline ScoreChart continuous_chart(Rng& rng, std::size_t n, std::size_t num_labels) {
  ScoreChart chart(n, num_labels);
  std::normal_distribution<double> d(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j <= n; ++j)
      for (LabelId l = 1; l < num_labels; ++l) chart.set(i, j, l, d(rng));
  return chart;
}

inline BinaryTree random_binary_tree(Rng& rng, std::size_t i, std::size_t j, std::size_t num_labels, bool root) {
  std::uniform_int_distribution<LabelId> label(root ? 1 : 0, static_cast<LabelId>(num_labels - 1));
  BinaryTree t{label(rng), i, j, {}};
  if (j - i > 1) {
    const std::size_t k = std::uniform_int_distribution<std::size_t>(i + 1, j - 1)(rng);
    t.children.push_back(random_binary_tree(rng, i, k, num_labels, false));
    t.children.push_back(random_binary_tree(rng, k, j, num_labels, false));
  }
  return t;
}

/// Brute-force max of s(T) [+ delta(T, gold)] over all labeled trees.
inline double brute_force_max(const ScoreChart& chart, const BinaryTree* gold) {
  double best = -1e300;
  for_each_labeled_tree(chart.length(), chart.num_labels(), [&](const BinaryTree& t) {
    const double v = manual_score(chart, t) + (gold ? manual_delta(t, *gold) : 0.0);
    best = std::max(best, v);
  });
  return best;
}

/// Same maximum, computed per bracketing: label choices at different nodes do
/// not interact, so each node takes its best label independently.
inline double bracketing_max(const ScoreChart& chart, const BinaryTree* gold) {
  std::map<std::pair<std::size_t, std::size_t>, LabelId> g;
  if (gold)
    for (auto [i, j, l] : triples(*gold)) g[{i, j}] = l;
  double best = -1e300;
  for (const auto& shape : bracketings(0, chart.length())) {
    double total = 0.0;
    std::set<std::pair<std::size_t, std::size_t>> spans;
    for (auto [i, j, unused] : triples(shape)) {
      (void)unused;
      spans.insert({i, j});
      const bool root = i == 0 && j == chart.length();
      const auto it = g.find({i, j});
      const LabelId gl = it == g.end() ? 0 : it->second;
      double node = -1e300;
      for (LabelId l = root ? 1 : 0; l < chart.num_labels(); ++l)
        node = std::max(node, chart(i, j, l) + (gold && l != gl ? 1.0 : 0.0));
      total += node;
    }
    if (gold)
      for (auto& [span, l] : g)
        if (l != 0 && !spans.count(span)) total += 1.0;
    best = std::max(best, total);
  }
  return best;
}

/// Random n-ary tree with unary chains, internal labels from a small set,
/// preterminal tags and words.
inline Tree random_tree(Rng& rng, std::size_t max_children, std::size_t depth) {
  static const std::vector<std::string> labels = {"S", "NP", "VP", "PP", "ADJP", "SBAR"};
  static const std::vector<std::string> tags = {"DT", "NN", "VB", "IN", "JJ"};
  std::uniform_int_distribution<std::size_t> pick_label(0, labels.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_tag(0, tags.size() - 1);
  std::uniform_int_distribution<std::size_t> children(1, max_children);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t counter = 0;
  std::function<Tree(std::size_t)> build = [&](std::size_t d) -> Tree {
    std::vector<Tree> kids;
    const std::size_t k = d >= depth ? 1 : children(rng);
    for (std::size_t c = 0; c < k; ++c) {
      if (d >= depth || u(rng) < 0.45)
        kids.push_back(Tree::leaf(tags[pick_tag(rng)], "w" + std::to_string(counter++)));
      else
        kids.push_back(build(d + 1));
    }
    return Tree::node(labels[pick_label(rng)], std::move(kids));
  };
  return build(0);
}

}  // namespace oracle
