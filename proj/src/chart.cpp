#include "sapar/chart.hpp"

#include <map>
#include <stdexcept>
#include <utility>

namespace sapar {

using ad::Tensor;

std::size_t SpanIndex::operator()(std::size_t i, std::size_t j) const {
  if (!(i < j && j <= n_))
    throw std::out_of_range("span (" + std::to_string(i) + ", " + std::to_string(j) +
                            ") outside a sentence of length " + std::to_string(n_));
  return i * n_ - i * (i - 1) / 2 + (j - i - 1);
}

DirectionalSplit directional_split(const Tensor& y) {
  if (y.cols() % 2 != 0)
    throw DimensionError("directional_split: odd model dimension " + std::to_string(y.cols()));
  std::vector<std::size_t> even, odd;
  for (std::size_t c = 0; c < y.cols(); c += 2) {
    even.push_back(c);
    odd.push_back(c + 1);
  }
  return {ad::gather_cols(y, even), ad::gather_cols(y, odd)};
}

Tensor span_vector(const DirectionalSplit& split, std::size_t i, std::size_t j) {
  const std::size_t rows = split.forward.rows();
  if (!(i < j && j + 2 <= rows))
    throw std::out_of_range("span_vector: fenceposts (" + std::to_string(i) + ", " + std::to_string(j) +
                            ") outside a sentence of length " + std::to_string(rows < 2 ? 0 : rows - 2));
  const Tensor parts[] = {
      ad::sub(ad::slice_rows(split.forward, j, j + 1), ad::slice_rows(split.forward, i, i + 1)),
      ad::sub(ad::slice_rows(split.backward, j + 1, j + 2), ad::slice_rows(split.backward, i + 1, i + 2))};
  return ad::concat_cols(parts);
}

Tensor span_vectors(const DirectionalSplit& split, std::size_t n) {
  if (n == 0 || split.forward.rows() != n + 2)
    throw std::invalid_argument("span_vectors: expected " + std::to_string(n + 2) + " encoder rows, got " +
                                std::to_string(split.forward.rows()));
  std::vector<std::size_t> left, right, left_next, right_next;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j <= n; ++j) {
      left.push_back(i);
      right.push_back(j);
      left_next.push_back(i + 1);
      right_next.push_back(j + 1);
    }
  const Tensor parts[] = {
      ad::sub(ad::gather_rows(split.forward, right), ad::gather_rows(split.forward, left)),
      ad::sub(ad::gather_rows(split.backward, right_next), ad::gather_rows(split.backward, left_next))};
  return ad::concat_cols(parts);
}

SpanScorer::SpanScorer(ParameterStore& ps, Rng& rng, const std::string& prefix, std::size_t input_dim,
                       std::size_t hidden, std::size_t num_labels) {
  if (num_labels < 2) throw std::invalid_argument("span scorer needs at least one non-dummy label");
  m1 = ps.add(prefix + ".m1", input_dim, hidden, Init::GlorotUniform, rng);
  c1 = ps.add(prefix + ".c1", 1, hidden, Init::Zeros, rng);
  norm_gain = ps.add(prefix + ".norm.gain", 1, hidden, Init::Ones, rng);
  norm_bias = ps.add(prefix + ".norm.bias", 1, hidden, Init::Zeros, rng);
  m2 = ps.add(prefix + ".m2", hidden, num_labels - 1, Init::GlorotUniform, rng);
  c2 = ps.add(prefix + ".c2", 1, num_labels - 1, Init::Zeros, rng);
}

Tensor SpanScorer::score(const Tensor& v) const {
  Tensor h = ad::layer_norm_rows(ad::add_row(ad::matmul(v, m1), c1), norm_gain, norm_bias);
  return ad::add_row(ad::matmul(ad::relu(h), m2), c2);
}

ScoreChart::ScoreChart(std::size_t n, std::size_t num_labels)
    : index_(n), labels_(num_labels), values_(index_.count() * num_labels, 0.0) {
  if (n == 0) throw std::invalid_argument("score chart for an empty sentence");
  if (num_labels < 2) throw std::invalid_argument("score chart needs at least one non-dummy label");
}

ScoreChart ScoreChart::from_tensor(const Tensor& scores, std::size_t n) {
  ScoreChart chart(n, scores.cols() + 1);
  if (scores.rows() != chart.index_.count())
    throw DimensionError("score chart: " + std::to_string(scores.rows()) + " rows for " +
                         std::to_string(chart.index_.count()) + " spans");
  const auto& v = scores.values();
  for (std::size_t s = 0; s < scores.rows(); ++s)
    for (std::size_t l = 1; l < chart.labels_; ++l)
      chart.values_[s * chart.labels_ + l] = v[s * scores.cols() + l - 1];
  return chart;
}

double ScoreChart::operator()(std::size_t i, std::size_t j, LabelId l) const {
  if (l >= labels_) throw std::out_of_range("label id " + std::to_string(l) + " outside the chart");
  return values_[index_(i, j) * labels_ + l];
}

void ScoreChart::set(std::size_t i, std::size_t j, LabelId l, double value) {
  if (l == LabelInventory::null_id) throw std::invalid_argument("the dummy label always scores 0");
  if (l >= labels_) throw std::out_of_range("label id " + std::to_string(l) + " outside the chart");
  values_[index_(i, j) * labels_ + l] = value;
}

void ScoreChart::add(std::size_t i, std::size_t j, LabelId l, double delta) {
  set(i, j, l, (*this)(i, j, l) + delta);
}

double tree_score(const ScoreChart& chart, const BinaryTree& b) {
  double total = 0.0;
  for (const auto& s : gold_spans(b)) total += chart(s.begin, s.end, s.label);
  return total;
}

namespace {

struct Cell {
  double best = 0.0;
  LabelId label = 0;
  std::size_t split = 0;
};

BinaryTree rebuild(const std::vector<Cell>& cells, const SpanIndex& index, std::size_t i, std::size_t j) {
  const Cell& c = cells[index(i, j)];
  BinaryTree t{c.label, i, j, {}};
  if (j - i > 1) {
    t.children.push_back(rebuild(cells, index, i, c.split));
    t.children.push_back(rebuild(cells, index, c.split, j));
  }
  return t;
}

}  // namespace

Decoded cky_decode_scored(const ScoreChart& chart) {
  const std::size_t n = chart.length();
  if (n == 0) throw std::invalid_argument("cky_decode: empty sentence");
  const SpanIndex& index = chart.index();
  std::vector<Cell> cells(index.count());
  for (std::size_t width = 1; width <= n; ++width) {
    for (std::size_t i = 0; i + width <= n; ++i) {
      const std::size_t j = i + width;
      Cell& cell = cells[index(i, j)];
      const bool root = width == n;
      LabelId label = root ? 1 : 0;
      double label_score = chart(i, j, label);
      for (LabelId l = label + 1; l < chart.num_labels(); ++l) {
        const double s = chart(i, j, l);
        if (s > label_score) {
          label_score = s;
          label = l;
        }
      }
      cell.label = label;
      cell.best = label_score;
      if (width > 1) {
        std::size_t split = i + 1;
        double split_score = cells[index(i, split)].best + cells[index(split, j)].best;
        for (std::size_t k = i + 2; k < j; ++k) {
          const double s = cells[index(i, k)].best + cells[index(k, j)].best;
          if (s > split_score) {
            split_score = s;
            split = k;
          }
        }
        cell.split = split;
        cell.best = label_score + split_score;
      }
    }
  }
  return {rebuild(cells, index, 0, n), cells[index(0, n)].best};
}

BinaryTree cky_decode(const ScoreChart& chart) { return cky_decode_scored(chart).tree; }

double hamming_delta(std::span<const LabeledSpan> candidate, std::span<const LabeledSpan> gold) {
  std::map<std::pair<std::size_t, std::size_t>, LabelId> gold_label;
  for (const auto& g : gold) gold_label[{g.begin, g.end}] = g.label;
  std::map<std::pair<std::size_t, std::size_t>, LabelId> seen;
  double delta = 0.0;
  for (const auto& c : candidate) {
    seen[{c.begin, c.end}] = c.label;
    auto it = gold_label.find({c.begin, c.end});
    const LabelId g = it == gold_label.end() ? LabelInventory::null_id : it->second;
    if (c.label != g) delta += 1.0;
  }
  for (const auto& g : gold)
    if (g.label != LabelInventory::null_id && !seen.count({g.begin, g.end})) delta += 1.0;
  return delta;
}

Decoded loss_augmented_decode(const ScoreChart& chart, std::span<const LabeledSpan> gold) {
  // Per candidate span (i, j, l) the loss contributes [l != g] - [g non-dummy]
  // on top of the constant number of non-dummy gold spans; the dummy label's
  // increment is always 0.
  ScoreChart augmented = chart;
  const std::size_t n = chart.length();
  std::vector<LabelId> gold_at(chart.index().count(), LabelInventory::null_id);
  double constant = 0.0;
  for (const auto& g : gold) {
    gold_at[chart.index()(g.begin, g.end)] = g.label;
    if (g.label != LabelInventory::null_id) constant += 1.0;
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j <= n; ++j) {
      const LabelId g = gold_at[chart.index()(i, j)];
      for (LabelId l = 1; l < chart.num_labels(); ++l) {
        const double inc = (l != g ? 1.0 : 0.0) - (g != LabelInventory::null_id ? 1.0 : 0.0);
        if (inc != 0.0) augmented.add(i, j, l, inc);
      }
    }
  Decoded d = cky_decode_scored(augmented);
  d.objective += constant;
  return d;
}

Hinge hinge_loss(const Tensor& scores, std::size_t n, const BinaryTree& gold) {
  const ScoreChart chart = ScoreChart::from_tensor(scores, n);
  const auto gold_list = gold_spans(gold);
  Decoded violator = loss_augmented_decode(chart, gold_list);
  const auto violator_list = gold_spans(violator.tree);
  const double delta = hamming_delta(violator_list, gold_list);

  const SpanIndex& index = chart.index();
  auto entries = [&](const std::vector<LabeledSpan>& spans) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (const auto& s : spans)
      if (s.label != LabelInventory::null_id) out.emplace_back(index(s.begin, s.end), s.label - 1);
    return out;
  };
  const auto ve = entries(violator_list);
  const auto ge = entries(gold_list);
  Tensor margin = ad::add_scalar(ad::sub(ad::pick_sum(scores, ve), ad::pick_sum(scores, ge)), delta);
  return {ad::relu(margin), std::move(violator.tree), delta};
}

}  // namespace sapar
