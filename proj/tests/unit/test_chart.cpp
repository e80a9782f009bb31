#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "sapar/chart.hpp"

using namespace sapar;
using ad::Tensor;

namespace {

BinaryTree leaf(LabelId l, std::size_t i) { return BinaryTree{l, i, i + 1, {}}; }
BinaryTree node(LabelId l, BinaryTree a, BinaryTree b) {
  const std::size_t i = a.begin, j = b.end;
  return BinaryTree{l, i, j, {std::move(a), std::move(b)}};
}

Tensor scores_of(const ScoreChart& chart) {
  const std::size_t spans = chart.index().count(), labels = chart.num_labels() - 1;
  std::vector<double> v(spans * labels);
  for (std::size_t i = 0; i < chart.length(); ++i)
    for (std::size_t j = i + 1; j <= chart.length(); ++j)
      for (LabelId l = 1; l < chart.num_labels(); ++l) v[chart.index()(i, j) * labels + l - 1] = chart(i, j, l);
  return Tensor::variable(spans, labels, v);
}

}  // namespace

TEST_SUITE("chart-decoder") {

TEST_CASE("span indices are dense in i-major order") {
  SpanIndex idx(4);
  std::size_t expected = 0;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j <= 4; ++j) CHECK(idx(i, j) == expected++);
  CHECK(expected == idx.count());
  CHECK_THROWS_AS(idx(2, 2), std::out_of_range);
  CHECK_THROWS_AS(idx(0, 5), std::out_of_range);
}

TEST_CASE("directional split takes even and odd coordinates") {
  Tensor y = Tensor::constant(1, 4, {1, 2, 3, 4});
  auto s = directional_split(y);
  CHECK(s.forward.values() == std::vector<double>{1, 3});
  CHECK(s.backward.values() == std::vector<double>{2, 4});
  auto z = directional_split(Tensor::zeros(3, 6));
  CHECK(z.forward.values() == std::vector<double>(9, 0.0));
  CHECK_THROWS_AS(directional_split(Tensor::zeros(2, 5)), DimensionError);

  Rng rng(1);
  Tensor r = oracle::variable(rng, 4, 6);
  auto rs = directional_split(r);
  for (std::size_t row = 0; row < 4; ++row)
    for (std::size_t c = 0; c < 3; ++c) {
      CHECK(rs.forward.at(row, c) == r.at(row, 2 * c));
      CHECK(rs.backward.at(row, c) == r.at(row, 2 * c + 1));
    }
}

TEST_CASE("span vectors of constant encodings vanish") {
  Tensor y = Tensor::constant(5, 4, std::vector<double>(20, 0.7));
  auto s = directional_split(y);
  Tensor all = span_vectors(s, 3);
  CHECK(all.rows() == 6);
  CHECK(all.cols() == 4);
  for (double v : all.values()) CHECK(v == 0.0);
}

TEST_CASE("span vectors follow the fencepost convention and telescope") {
  Rng rng(2);
  const std::size_t n = 5;
  Tensor y = oracle::variable(rng, n + 2, 6);
  auto s = directional_split(y);
  Tensor all = span_vectors(s, n);
  SpanIndex idx(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j <= n; ++j) {
      Tensor v = span_vector(s, i, j);
      for (std::size_t c = 0; c < 3; ++c) {
        CHECK(v.at(0, c) == y.at(j, 2 * c) - y.at(i, 2 * c));
        CHECK(v.at(0, 3 + c) == y.at(j + 1, 2 * c + 1) - y.at(i + 1, 2 * c + 1));
      }
      for (std::size_t c = 0; c < 6; ++c) CHECK(all.at(idx(i, j), c) == v.at(0, c));
      for (std::size_t k = j + 1; k <= n; ++k) {
        Tensor sum = ad::add(span_vector(s, i, j), span_vector(s, j, k));
        Tensor whole = span_vector(s, i, k);
        for (std::size_t c = 0; c < 6; ++c) CHECK(whole.at(0, c) == doctest::Approx(sum.at(0, c)).epsilon(1e-12));
      }
    }
  CHECK_THROWS_AS(span_vector(s, 2, 2), std::out_of_range);
  CHECK_THROWS_AS(span_vector(s, 0, n + 1), std::out_of_range);
}

TEST_CASE("span scorer with zero output weights returns its bias") {
  ParameterStore ps;
  Rng rng(3);
  SpanScorer sc(ps, rng, "span", 4, 5, 4);
  sc.m2.mutable_values().assign(sc.m2.size(), 0.0);
  sc.c2.mutable_values() = {1.5, -2, 0.25};
  Tensor out = sc.score(oracle::variable(rng, 6, 4));
  CHECK(out.cols() == 3);
  for (std::size_t r = 0; r < 6; ++r) CHECK(std::vector<double>{out.at(r, 0), out.at(r, 1), out.at(r, 2)} ==
                                            std::vector<double>{1.5, -2, 0.25});
}

TEST_CASE("span scorer matches a reimplementation and its gradients check out") {
  ParameterStore ps;
  Rng rng(4);
  SpanScorer sc(ps, rng, "span", 4, 5, 3);
  for (auto& p : ps.all())
    for (auto& v : p.tensor.mutable_values()) v = oracle::uniform(rng, 1)[0];
  Tensor v = oracle::variable(rng, 3, 4);
  Tensor out = sc.score(v);
  for (std::size_t r = 0; r < 3; ++r) {
    std::vector<double> h(5);
    for (std::size_t k = 0; k < 5; ++k) {
      h[k] = sc.c1.at(0, k);
      for (std::size_t c = 0; c < 4; ++c) h[k] += v.at(r, c) * sc.m1.at(c, k);
    }
    double mean = 0, var = 0;
    for (double x : h) mean += x / 5;
    for (double x : h) var += (x - mean) * (x - mean) / 5;
    for (std::size_t k = 0; k < 5; ++k)
      h[k] = std::max(0.0, (h[k] - mean) / std::sqrt(var + 1e-5) * sc.norm_gain.at(0, k) + sc.norm_bias.at(0, k));
    for (std::size_t l = 0; l < 2; ++l) {
      double s = sc.c2.at(0, l);
      for (std::size_t k = 0; k < 5; ++k) s += h[k] * sc.m2.at(k, l);
      CHECK(out.at(r, l) == doctest::Approx(s).epsilon(1e-12));
    }
  }
  const auto w = oracle::uniform(rng, 6);
  auto loss = [&] { return ad::sum(ad::mul(sc.score(v), Tensor::constant(3, 2, w))); };
  CHECK(oracle::check_gradients(loss, {sc.m1, sc.c1, sc.norm_gain, sc.norm_bias, sc.m2, sc.c2, v}, rng)
            .max_relative_error < 1e-4);
}

TEST_CASE("the dummy label always scores zero") {
  ScoreChart c(3, 3);
  CHECK_THROWS_AS(c.set(0, 1, LabelInventory::null_id, 1.0), std::invalid_argument);
  Rng rng(5);
  ScoreChart r = oracle::continuous_chart(rng, 4, 3);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j <= 4; ++j) CHECK(r(i, j, 0) == 0.0);
  CHECK_THROWS_AS(ScoreChart(0, 3), std::invalid_argument);
  CHECK_THROWS_AS(ScoreChart(2, 1), std::invalid_argument);
}

TEST_CASE("tree scores") {
  Rng rng(6);
  ScoreChart c = oracle::continuous_chart(rng, 4, 3);
  BinaryTree t = node(1, node(0, leaf(2, 0), leaf(0, 1)), node(0, leaf(1, 2), leaf(2, 3)));
  CHECK(tree_score(c, t) == doctest::Approx(c(0, 4, 1) + c(0, 1, 2) + c(2, 3, 1) + c(3, 4, 2)).epsilon(1e-15));
  CHECK(tree_score(c, t) == doctest::Approx(oracle::manual_score(c, t)).epsilon(1e-15));
  BinaryTree dummies = node(0, leaf(1, 0), node(0, leaf(2, 1), leaf(1, 2)));
  CHECK(tree_score(c, dummies) == doctest::Approx(c(0, 1, 1) + c(1, 2, 2) + c(2, 3, 1)).epsilon(1e-15));
}

TEST_CASE("decoding a one-word chart picks its best label") {
  ScoreChart c(1, 4);
  c.set(0, 1, 1, -3);
  c.set(0, 1, 2, 2);
  c.set(0, 1, 3, 1);
  auto d = cky_decode_scored(c);
  CHECK(d.tree == leaf(2, 0));
  CHECK(d.objective == 2.0);
}

TEST_CASE("the root label is never the dummy label") {
  ScoreChart c(3, 3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = i + 1; j <= 3; ++j)
      for (LabelId l = 1; l < 3; ++l) c.set(i, j, l, -5.0);
  BinaryTree t = cky_decode(c);
  CHECK(t.label != LabelInventory::null_id);
  CHECK(tree_score(c, t) == -5.0);
}

TEST_CASE("a uniformly dominant label yields the right-branching tree") {
  ScoreChart c(4, 3);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j <= 4; ++j) c.set(i, j, 2, 1.0);
  BinaryTree expected = node(2, leaf(2, 0), node(2, leaf(2, 1), node(2, leaf(2, 2), leaf(2, 3))));
  CHECK(cky_decode(c) == expected);
  // every labeled tree ties under the zero chart: lowest split, lowest label
  ScoreChart zero(3, 3);
  CHECK(cky_decode(zero) == node(1, leaf(0, 0), node(0, leaf(0, 1), leaf(0, 2))));
}

TEST_CASE("decoding is optimal on random charts") {
  Rng rng(7);
  for (std::size_t n = 1; n <= 5; ++n)
    for (std::size_t labels = 2; labels <= 3; ++labels)
      for (int k = 0; k < 10; ++k) {
        ScoreChart c = oracle::dyadic_chart(rng, n, labels);
        auto d = cky_decode_scored(c);
        check_binary_tree(d.tree, n);
        CHECK(d.objective == tree_score(c, d.tree));
        CHECK(d.objective == oracle::brute_force_max(c, nullptr));
      }
}

TEST_CASE("hamming loss examples") {
  BinaryTree gold = node(1, node(2, leaf(0, 0), leaf(0, 1)), leaf(0, 2));
  const auto g = gold_spans(gold);
  CHECK(hamming_delta(g, g) == 0.0);

  BinaryTree relabeled = node(1, node(3, leaf(0, 0), leaf(0, 1)), leaf(0, 2));
  CHECK(hamming_delta(gold_spans(relabeled), g) == 1.0);

  // (0,3) B vs S, (1,3) A vs nothing, (1,2) B vs nothing, gold A on (0,2) missing
  BinaryTree disjoint = node(3, leaf(0, 0), node(2, leaf(3, 1), leaf(0, 2)));
  CHECK(hamming_delta(gold_spans(disjoint), g) == 4.0);
  CHECK(hamming_delta(gold_spans(disjoint), g) == oracle::manual_delta(disjoint, gold));
}

TEST_CASE("the hamming loss is zero exactly for the gold tree") {
  Rng rng(8);
  for (int k = 0; k < 30; ++k) {
    const std::size_t n = 1 + k % 4;
    BinaryTree gold = oracle::random_binary_tree(rng, 0, n, 3, true);
    const auto g = gold_spans(gold);
    oracle::for_each_labeled_tree(n, 3, [&](const BinaryTree& t) {
      const double d = hamming_delta(gold_spans(t), g);
      CHECK(d == oracle::manual_delta(t, gold));
      // equal non-dummy span sets
      std::set<LabeledSpan> a, b;
      for (auto s : gold_spans(t))
        if (s.label) a.insert(s);
      for (auto s : g)
        if (s.label) b.insert(s);
      CHECK((d == 0.0) == (a == b));
    });
  }
}

TEST_CASE("loss-augmented decoding on a zero chart returns a maximally wrong tree") {
  Rng rng(9);
  for (std::size_t n = 1; n <= 5; ++n) {
    BinaryTree gold = oracle::random_binary_tree(rng, 0, n, 3, true);
    ScoreChart zero(n, 3);
    auto d = loss_augmented_decode(zero, gold_spans(gold));
    CHECK(d.objective == hamming_delta(gold_spans(d.tree), gold_spans(gold)));
    CHECK(d.objective == oracle::brute_force_max(zero, &gold));
    CHECK(d.objective > 0.0);
  }
}

TEST_CASE("loss-augmented decoding is optimal on random charts") {
  Rng rng(10);
  for (std::size_t n = 1; n <= 5; ++n)
    for (int k = 0; k < 10; ++k) {
      ScoreChart c = oracle::dyadic_chart(rng, n, 3);
      BinaryTree gold = oracle::random_binary_tree(rng, 0, n, 3, true);
      auto d = loss_augmented_decode(c, gold_spans(gold));
      CHECK(d.objective == tree_score(c, d.tree) + hamming_delta(gold_spans(d.tree), gold_spans(gold)));
      CHECK(d.objective == oracle::brute_force_max(c, &gold));
    }
}

TEST_CASE("a chart that strongly favours gold has zero hinge loss") {
  Rng rng(11);
  BinaryTree gold = node(1, node(2, leaf(0, 0), leaf(1, 1)), node(0, leaf(2, 2), leaf(0, 3)));
  ScoreChart c(4, 3);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j <= 4; ++j)
      for (LabelId l = 1; l < 3; ++l) c.set(i, j, l, -10.0);
  for (auto s : gold_spans(gold))
    if (s.label) c.set(s.begin, s.end, s.label, 10.0);
  Hinge h = hinge_loss(scores_of(c), 4, gold);
  CHECK(h.loss.item() == 0.0);
  CHECK(h.violator == gold);
  CHECK(h.delta == 0.0);
  CHECK(cky_decode(c) == gold);
}

TEST_CASE("a zero chart's hinge equals the violator's hamming loss") {
  for (std::size_t n = 2; n <= 5; ++n) {
    Rng rng(12 + n);
    BinaryTree gold = oracle::random_binary_tree(rng, 0, n, 3, true);
    Hinge h = hinge_loss(scores_of(ScoreChart(n, 3)), n, gold);
    CHECK(h.loss.item() == h.delta);
    CHECK(h.delta > 0.0);
  }
}

TEST_CASE("hinge properties on random charts") {
  Rng rng(13);
  for (int k = 0; k < 100; ++k) {
    const std::size_t n = 1 + k % 6;
    ScoreChart c = oracle::dyadic_chart(rng, n, 4);
    BinaryTree gold = oracle::random_binary_tree(rng, 0, n, 4, true);
    Hinge h = hinge_loss(scores_of(c), n, gold);
    CHECK(h.loss.item() >= 0.0);
    const double aug = loss_augmented_decode(c, gold_spans(gold)).objective;
    const double plain = cky_decode_scored(c).objective;
    CHECK(aug >= plain);
    CHECK(h.loss.item() == std::max(0.0, aug - tree_score(c, gold)));
    if (h.loss.item() == 0.0) {
      CHECK(plain >= tree_score(c, gold));
      CHECK(tree_score(c, cky_decode(c)) == tree_score(c, gold));
    }
  }
}

TEST_CASE("hinge gradients match finite differences away from ties") {
  Rng rng(14);
  for (int k = 0; k < 10; ++k) {
    const std::size_t n = 3 + k % 3;
    Tensor scores = scores_of(oracle::continuous_chart(rng, n, 4));
    BinaryTree gold = oracle::random_binary_tree(rng, 0, n, 4, true);
    auto loss = [&] { return hinge_loss(scores, n, gold).loss; };
    CHECK(oracle::check_gradients(loss, {scores}, rng).max_relative_error < 1e-4);
  }
}

}  // TEST_SUITE
