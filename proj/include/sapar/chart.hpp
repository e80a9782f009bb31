#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sapar/autodiff.hpp"
#include "sapar/binarize.hpp"
#include "sapar/parameters.hpp"

namespace sapar {

/// Dense index over the spans (i, j), 0 <= i < j <= n, ordered by i then j.
class SpanIndex {
 public:
  explicit SpanIndex(std::size_t n = 0) : n_(n) {}

  std::size_t length() const { return n_; }
  std::size_t count() const { return n_ * (n_ + 1) / 2; }
  std::size_t operator()(std::size_t i, std::size_t j) const;

 private:
  std::size_t n_;
};

/// Even coordinates of each row go forward, odd coordinates backward.
struct DirectionalSplit {
  ad::Tensor forward;   // [T x d/2]
  ad::Tensor backward;  // [T x d/2]
};

DirectionalSplit directional_split(const ad::Tensor& y);

/// Row 0 of the encoder output is the start token and row n+1 the stop
/// token, so fencepost i sits between rows i and i+1:
/// v(i, j) = [fwd_j - fwd_i ; bwd_{j+1} - bwd_{i+1}].
ad::Tensor span_vector(const DirectionalSplit& split, std::size_t i, std::size_t j);

/// All span vectors of an n-word sentence, one row per span in SpanIndex order.
ad::Tensor span_vectors(const DirectionalSplit& split, std::size_t n);

/// s(v) = M2 relu(LayerNorm(M1 v + c1)) + c2 over the non-dummy labels.
class SpanScorer {
 public:
  SpanScorer() = default;
  SpanScorer(ParameterStore& ps, Rng& rng, const std::string& prefix, std::size_t input_dim,
             std::size_t hidden, std::size_t num_labels);

  /// [spans x input_dim] -> [spans x (num_labels - 1)]
  ad::Tensor score(const ad::Tensor& v) const;

  ad::Tensor m1, c1, norm_gain, norm_bias, m2, c2;
};

/// Plain span scores s(i, j, l) for one sentence; the dummy label scores 0.
class ScoreChart {
 public:
  ScoreChart() = default;
  ScoreChart(std::size_t n, std::size_t num_labels);
  /// From a [spans x (num_labels - 1)] score matrix.
  static ScoreChart from_tensor(const ad::Tensor& scores, std::size_t n);

  std::size_t length() const { return index_.length(); }
  std::size_t num_labels() const { return labels_; }
  const SpanIndex& index() const { return index_; }

  double operator()(std::size_t i, std::size_t j, LabelId l) const;
  /// Rejects writes to the dummy label.
  void set(std::size_t i, std::size_t j, LabelId l, double value);
  void add(std::size_t i, std::size_t j, LabelId l, double delta);

 private:
  SpanIndex index_;
  std::size_t labels_ = 0;
  std::vector<double> values_;  // [span][label], label 0 stored as 0
};

/// s(T): sum of s(i, j, l) over every node of `b`.
double tree_score(const ScoreChart& chart, const BinaryTree& b);

struct Decoded {
  BinaryTree tree;
  double objective = 0.0;
};

/// Highest-scoring binary tree with a non-dummy root. Ties go to the lowest
/// split point, then the lowest label id.
Decoded cky_decode_scored(const ScoreChart& chart);
BinaryTree cky_decode(const ScoreChart& chart);

/// Hamming loss on labeled spans. Every candidate span whose label differs
/// from the gold label there (dummy where gold has no span) counts 1, and
/// every non-dummy gold span the candidate lacks counts 1.
double hamming_delta(std::span<const LabeledSpan> candidate, std::span<const LabeledSpan> gold);

/// argmax_T s(T) + delta(T, gold); the objective includes delta.
Decoded loss_augmented_decode(const ScoreChart& chart, std::span<const LabeledSpan> gold);

struct Hinge {
  ad::Tensor loss;  // 1 x 1
  BinaryTree violator;
  double delta = 0.0;
};

/// max(0, s(T') + delta(T', T*) - s(T*)) with T' from loss-augmented decoding.
/// `scores` is [spans x (num_labels - 1)] for an n-word sentence.
Hinge hinge_loss(const ad::Tensor& scores, std::size_t n, const BinaryTree& gold);

}  // namespace sapar
