#include <doctest.h>

#include <sstream>

#include "fixtures.hpp"
#include "sapar/analysis.hpp"
#include "sapar/evaluation.hpp"
#include "sapar/model.hpp"

using namespace sapar;

TEST_SUITE("analysis") {

TEST_CASE("window distance lists") {
  CHECK(parse_distances("0, 1,inf,3") == std::vector<std::size_t>{0, 1, kUnboundedDistance, 3});
  CHECK(parse_distances("none") == std::vector<std::size_t>{kUnboundedDistance});
  CHECK_THROWS_AS(parse_distances("-1"), std::invalid_argument);
  CHECK_THROWS_AS(parse_distances("two"), std::invalid_argument);
  CHECK_THROWS_AS(parse_distances(""), std::invalid_argument);
  CHECK(distance_name(kUnboundedDistance) == "inf");
  CHECK(distance_name(4) == "4");
}

TEST_CASE("content:last4 keeps content attention in the last four of eight layers") {
  AttentionControl c = parse_disable_spec("content:last4", 8);
  REQUIRE(c.layers.size() == 8);
  for (std::size_t l = 0; l < 8; ++l) {
    CHECK(c.layers[l].disable_content == (l < 4));
    CHECK_FALSE(c.layers[l].disable_position);
  }
}

TEST_CASE("combined and trivial disable specs") {
  AttentionControl c = parse_disable_spec("content:first2+position:none", 4);
  for (std::size_t l = 0; l < 4; ++l) {
    CHECK(c.layers[l].disable_content == (l >= 2));
    CHECK(c.layers[l].disable_position);
  }
  for (const char* nothing : {"baseline", "none", "", "content:all"}) {
    AttentionControl b = parse_disable_spec(nothing, 3);
    for (const auto& l : b.layers) {
      CHECK_FALSE(l.disable_content);
      CHECK_FALSE(l.disable_position);
    }
  }
  CHECK_THROWS_AS(parse_disable_spec("content", 4), std::invalid_argument);
  CHECK_THROWS_AS(parse_disable_spec("colour:all", 4), std::invalid_argument);
  CHECK_THROWS_AS(parse_disable_spec("content:last5", 4), std::invalid_argument);
  CHECK_THROWS_AS(parse_disable_spec("content:middle", 4), std::invalid_argument);
}

TEST_CASE("default disable specs") {
  CHECK(default_disable_specs(8) == std::vector<std::string>{"baseline", "position:none", "content:none",
                                                             "content:first4", "content:last4", "content:first6",
                                                             "content:last6"});
  CHECK(default_disable_specs(1) == std::vector<std::string>{"baseline", "position:none", "content:none"});
}

TEST_CASE("sweeps against an untrained model") {
  const auto trees = fixture::toy_trees(6, 1, 12);
  auto cfg = fixture::tiny_model();
  cfg.encoder.num_layers = 2;
  auto model = ParserModel::from_treebank(cfg, trees);
  std::vector<Sentence> sentences;
  for (const auto& t : trees) sentences.push_back(sentence_of(t));
  const double plain = score(model.parse_trees(sentences), trees).f1;

  const WindowMode modes[] = {WindowMode::Strict, WindowMode::Relaxed};
  auto rows = analyze_window(model, sentences, trees, {kUnboundedDistance, 2, 0, 2}, modes);
  REQUIRE(rows.size() == 6);
  CHECK(rows[0].distance == 0);
  CHECK(rows[2].distance == 2);
  CHECK(rows[4].distance == kUnboundedDistance);
  CHECK(rows[4].result.f1 == plain);
  CHECK(rows[5].result.f1 == plain);

  const std::string specs[] = {"baseline", "content:none+position:none"};
  auto disabled = analyze_disable(model, sentences, trees, specs);
  REQUIRE(disabled.size() == 2);
  CHECK(disabled[0].result.f1 == plain);

  const std::string table = window_table(rows);
  CHECK(table.rfind("distance\tmode\tf1\t", 0) == 0);
  CHECK(std::count(table.begin(), table.end(), '\n') == 7);
  CHECK(disable_table(disabled).rfind("spec\tf1\t", 0) == 0);
}

TEST_CASE("switching off both attention kinds gives uniform attention") {
  const auto trees = fixture::toy_trees(2, 2);
  auto model = ParserModel::from_treebank(fixture::tiny_model(), trees);
  Sentence s = sentence_of(trees[0]);
  AttentionTrace trace = model.attention(s, parse_disable_spec("content:none+position:none", 1));
  const double t = static_cast<double>(s.size() + 2);
  for (const auto& head : trace[0])
    for (double p : head) CHECK(p == doctest::Approx(1.0 / t).epsilon(1e-14));
}

TEST_CASE("attention table has one line per matrix entry") {
  AttentionTrace trace = {{{1.0}, {1.0}}, {{0.5, 0.5, 0.25, 0.75}}};
  std::istringstream in(attention_table(trace));
  std::string line;
  std::getline(in, line);
  CHECK(line == "layer\thead\tquery\tkey\tprob");
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  REQUIRE(lines.size() == 6);
  CHECK(lines[0] == "0\t0\t0\t0\t1");
  CHECK(lines[5] == "1\t0\t1\t1\t0.75");
}

}  // TEST_SUITE
