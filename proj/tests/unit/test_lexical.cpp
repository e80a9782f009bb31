#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "sapar/lexical.hpp"

using namespace sapar;
using ad::Tensor;

namespace {

constexpr std::size_t P = SymbolTable::padding;

std::vector<std::size_t> ids_of(std::initializer_list<std::size_t> l) { return l; }

Vocabulary toy_vocab() {
  auto trees = parse_bracketed("(S (NP (DT the) (NN cat)) (VP (VB sat) (NN internationalization)))");
  return Vocabulary::from_trees(trees);
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Straightforward single-word LSTM from the parameter store, gates i, f, g, o.
std::vector<double> reference_char_lstm(const ParameterStore& ps, const std::string& prefix,
                                        const std::vector<std::size_t>& word) {
  const Tensor& table = ps.get(prefix + ".char_table").tensor;
  const std::size_t dc = table.cols();
  auto run = [&](const std::string& dir, bool reverse) {
    const Tensor& w = ps.get(prefix + "." + dir + ".w").tensor;
    const Tensor& b = ps.get(prefix + "." + dir + ".b").tensor;
    const std::size_t h = b.cols() / 4;
    std::vector<double> state(h, 0.0), cell(h, 0.0);
    for (std::size_t s = 0; s < word.size(); ++s) {
      const std::size_t c = word[reverse ? word.size() - 1 - s : s];
      std::vector<double> in;
      for (std::size_t k = 0; k < dc; ++k) in.push_back(table.at(c, k));
      in.insert(in.end(), state.begin(), state.end());
      std::vector<double> gates(4 * h);
      for (std::size_t g = 0; g < 4 * h; ++g) {
        double acc = b.at(0, g);
        for (std::size_t k = 0; k < in.size(); ++k) acc += in[k] * w.at(k, g);
        gates[g] = acc;
      }
      for (std::size_t k = 0; k < h; ++k) {
        cell[k] = sigmoid(gates[h + k]) * cell[k] + sigmoid(gates[k]) * std::tanh(gates[2 * h + k]);
        state[k] = sigmoid(gates[3 * h + k]) * std::tanh(cell[k]);
      }
    }
    return state;
  };
  std::vector<double> both = run("forward", false);
  const auto back = run("backward", true);
  both.insert(both.end(), back.begin(), back.end());
  const Tensor& pw = ps.get(prefix + ".proj.w").tensor;
  const Tensor& pb = ps.get(prefix + ".proj.b").tensor;
  std::vector<double> out(pw.cols());
  for (std::size_t c = 0; c < pw.cols(); ++c) {
    out[c] = pb.at(0, c);
    for (std::size_t k = 0; k < both.size(); ++k) out[c] += both[k] * pw.at(k, c);
  }
  return out;
}

LexicalConfig no_dropout(LexicalMode mode) {
  LexicalConfig c;
  c.mode = mode;
  c.word_dropout = c.tag_dropout = c.morph_dropout = c.char_dropout = 0.0;
  return c;
}

}  // namespace

TEST_SUITE("lexical") {

TEST_CASE("a three-letter word is padded after the prefix and before the suffix") {
  const auto cat = ids_of({10, 11, 12});
  CHECK(char_concat_ids(cat, 8, 8) == ids_of({10, 11, 12, P, P, P, P, P, P, P, P, P, P, 10, 11, 12}));
}

TEST_CASE("a sixteen-letter word uses every letter") {
  std::vector<std::size_t> w(16);
  for (std::size_t k = 0; k < 16; ++k) w[k] = 100 + k;
  CHECK(char_concat_ids(w, 8, 8) == w);
}

TEST_CASE("long words keep the first and last eight letters and can collide") {
  std::vector<std::size_t> a(20), b(20);
  for (std::size_t k = 0; k < 20; ++k) a[k] = b[k] = 100 + k;
  b[9] = 7;
  b[10] = 8;
  const auto ia = char_concat_ids(a, 8, 8);
  CHECK(ia.size() == 16);
  CHECK(ia[7] == 107);
  CHECK(ia[8] == 112);
  CHECK(ia == char_concat_ids(b, 8, 8));
  Rng rng(1);
  Tensor table = oracle::variable(rng, 130, 4);
  Tensor out = char_concat(table, {a, b}, 8, 8);
  CHECK(out.cols() == 64);
  for (std::size_t c = 0; c < 64; ++c) CHECK(out.at(0, c) == out.at(1, c));
}

TEST_CASE("char-concat width is 512 at the default setting regardless of word length") {
  LexicalConfig c;
  c.mode = LexicalMode::CharConcat;
  CHECK(c.resolved_char_dim() == 32);
  CHECK(c.char_concat_dim() == 512);
  Rng rng(2);
  Tensor table = oracle::variable(rng, 50, 32);
  Tensor out = char_concat(table, {{5}, {5, 6, 7}, std::vector<std::size_t>(40, 9)}, 8, 8);
  CHECK(out.rows() == 3);
  CHECK(out.cols() == 512);
}

TEST_CASE("char-lstm matches a scalar reference implementation") {
  ParameterStore ps;
  Rng rng(3);
  CharLstm lstm(ps, rng, "lstm", 20, 5, 3, 4);
  for (auto& p : ps.all())
    for (auto& v : p.tensor.mutable_values()) v = oracle::uniform(rng, 1)[0];
  const std::vector<std::vector<std::size_t>> words = {{7}, {4, 5, 6, 7, 8}, {9, 9}};
  Tensor out = lstm.encode(words, 0.0, false, rng);
  for (std::size_t r = 0; r < words.size(); ++r) {
    const auto expected = reference_char_lstm(ps, "lstm", words[r]);
    for (std::size_t c = 0; c < 4; ++c) CHECK(out.at(r, c) == doctest::Approx(expected[c]).epsilon(1e-12));
  }
}

TEST_CASE("char-lstm words are independent of their batch") {
  ParameterStore ps;
  Rng rng(4);
  CharLstm lstm(ps, rng, "lstm", 20, 5, 3, 4);
  Tensor alone = lstm.encode({{4, 5}}, 0.0, false, rng);
  Tensor batched = lstm.encode({{9, 8, 7, 6, 5, 4}, {4, 5}, {4, 5}}, 0.0, false, rng);
  for (std::size_t c = 0; c < 4; ++c) {
    CHECK(batched.at(1, c) == alone.at(0, c));
    CHECK(batched.at(2, c) == alone.at(0, c));
  }
  CHECK_THROWS_AS(lstm.encode({{}}, 0.0, false, rng), std::invalid_argument);
}

TEST_CASE("char-lstm gradients agree with finite differences") {
  ParameterStore ps;
  Rng rng(5);
  CharLstm lstm(ps, rng, "lstm", 12, 4, 3, 4);
  const auto w = oracle::uniform(rng, 12);
  auto loss = [&] {
    Rng r(1);
    return ad::sum(ad::mul(lstm.encode({{4, 5, 6}, {7}, {8, 9}}, 0.0, false, r), Tensor::constant(3, 4, w)));
  };
  std::vector<Tensor> leaves;
  for (auto& p : ps.all()) leaves.push_back(p.tensor);
  CHECK(oracle::check_gradients(loss, leaves, rng).max_relative_error < 1e-4);
}

TEST_CASE("char-lstm without word embeddings ignores the word table") {
  Vocabulary v = toy_vocab();
  LexicalConfig c = no_dropout(LexicalMode::CharLstm);
  c.use_word_embeddings = false;
  ParameterStore ps;
  Rng rng(6);
  LexicalModel m(c, 8, v, ps, rng);
  CHECK_FALSE(ps.contains("lexical.word_table"));
  Sentence s = parse_plain_line("the cat sat");
  Tensor a = m.represent(s, false, rng);
  CHECK(a.rows() == 5);
  CHECK(a.cols() == 8);

  LexicalConfig with = c;
  with.use_word_embeddings = true;
  ParameterStore ps2;
  Rng rng2(6);
  LexicalModel m2(with, 8, v, ps2, rng2);
  Tensor before = m2.represent(s, false, rng2);
  ps2.get("lexical.word_table").tensor.mutable_values().assign(ps2.get("lexical.word_table").tensor.size(), 0.0);
  Tensor after = m2.represent(s, false, rng2);
  CHECK(before.values() != after.values());
}

TEST_CASE("tags mode with zero tag embeddings equals the word embeddings") {
  Vocabulary v = toy_vocab();
  ParameterStore ps;
  Rng rng(7);
  LexicalModel m(no_dropout(LexicalMode::Tags), 6, v, ps, rng);
  Tensor tags = m.tag_table();
  tags.mutable_values().assign(tags.size(), 0.0);
  Sentence s = parse_tagged_line("the_DT cat_NN sat_VB");
  Tensor rep = m.represent(s, false, rng);
  const std::size_t ids[] = {SymbolTable::start, v.words.id("the"), v.words.id("cat"), v.words.id("sat"),
                             SymbolTable::stop};
  CHECK(rep.values() == ad::gather_rows(m.word_table(), ids).values());
}

TEST_CASE("tags mode needs tags") {
  Vocabulary v = toy_vocab();
  ParameterStore ps;
  Rng rng(8);
  LexicalModel m(no_dropout(LexicalMode::Tags), 6, v, ps, rng);
  CHECK_THROWS_WITH_AS(m.represent(parse_plain_line("the cat"), false, rng), doctest::Contains("POS tags"),
                       std::invalid_argument);
}

TEST_CASE("external vectors pass through an identity projection") {
  Vocabulary v = toy_vocab();
  LexicalConfig c = no_dropout(LexicalMode::External);
  c.external_dim = 4;
  ParameterStore ps;
  Rng rng(9);
  LexicalModel m(c, 4, v, ps, rng);
  CHECK_FALSE(ps.contains("lexical.word_table"));
  Tensor proj = m.external_projection();
  auto& pv = proj.mutable_values();
  std::fill(pv.begin(), pv.end(), 0.0);
  for (std::size_t k = 0; k < 4; ++k) pv[k * 5] = 1.0;
  Sentence s = parse_plain_line("the cat");
  s.external = {{1, 2, 3, 4}, {-1, 0.5, 0, 2}};
  Tensor rep = m.represent(s, false, rng);
  for (std::size_t w = 0; w < 2; ++w)
    for (std::size_t k = 0; k < 4; ++k) CHECK(rep.at(w + 1, k) == s.external[w][k]);

  Sentence missing = parse_plain_line("the cat");
  missing.external = {{1, 2, 3, 4}};
  CHECK_THROWS_WITH_AS(m.represent(missing, false, rng), doctest::Contains("1 external vectors for 2 words"),
                       std::invalid_argument);
  Sentence narrow = parse_plain_line("the");
  narrow.external = {{1, 2}};
  CHECK_THROWS_WITH_AS(m.represent(narrow, false, rng), doctest::Contains("width 2"), std::invalid_argument);
}

TEST_CASE("word dropout zeroes whole word vectors in training and nothing in eval") {
  Vocabulary v = toy_vocab();
  LexicalConfig c = no_dropout(LexicalMode::Tags);
  c.word_dropout = 0.5;
  ParameterStore ps;
  Rng rng(10);
  LexicalModel m(c, 6, v, ps, rng);
  Tensor tags = m.tag_table();
  tags.mutable_values().assign(tags.size(), 0.0);
  std::vector<std::string> words(60, "cat");
  Sentence s{words, std::vector<std::string>(60, "NN"), {}};
  Tensor rep = m.represent(s, true, rng);
  std::size_t zero_rows = 0;
  for (std::size_t r = 0; r < rep.rows(); ++r) {
    std::size_t zeros = 0;
    for (std::size_t k = 0; k < 6; ++k) zeros += rep.at(r, k) == 0.0;
    CHECK((zeros == 0 || zeros == 6));
    zero_rows += zeros == 6;
  }
  CHECK(zero_rows > 10);
  CHECK(m.represent(s, false, rng).values() == m.represent(s, false, rng).values());
}

TEST_CASE("char-concat content rows are projected to the content width when needed") {
  Vocabulary v = toy_vocab();
  LexicalConfig c = no_dropout(LexicalMode::CharConcat);
  c.char_embedding_dim = 2;
  c.prefix_len = c.suffix_len = 2;
  ParameterStore ps;
  Rng rng(11);
  LexicalModel m(c, 6, v, ps, rng);
  CHECK(ps.contains("lexical.char_concat_proj"));
  CHECK(m.represent(parse_plain_line("the cat"), false, rng).cols() == 6);

  LexicalConfig exact = c;
  exact.char_embedding_dim = 2;
  ParameterStore ps2;
  LexicalModel m2(exact, 8, v, ps2, rng);
  CHECK_FALSE(ps2.contains("lexical.char_concat_proj"));
}

TEST_CASE("external vector files round trip and mismatches are reported") {
  const auto path = std::filesystem::temp_directory_path() / "sapar_unit_vectors.txt";
  ExternalVectors ev{3, {{{1, 2, 3}, {0.125, -4, 1e-300}}, {{7, 8, 9}}}};
  write_external_vectors(path, ev);
  ExternalVectors back = read_external_vectors(path);
  CHECK(back.dim == 3);
  CHECK(back.sentences == ev.sentences);

  std::vector<Sentence> sentences = {parse_plain_line("a b"), parse_plain_line("c")};
  attach_external_vectors(sentences, back);
  CHECK(sentences[0].external.size() == 2);
  std::vector<Sentence> wrong = {parse_plain_line("a"), parse_plain_line("c")};
  CHECK_THROWS_AS(attach_external_vectors(wrong, ev), std::invalid_argument);
  std::vector<Sentence> too_few = {parse_plain_line("a b")};
  CHECK_THROWS_AS(attach_external_vectors(too_few, ev), std::invalid_argument);

  std::ofstream(path) << "2 3\n1\n1 2\n";
  CHECK_THROWS(read_external_vectors(path));
  std::filesystem::remove(path);
}

}  // TEST_SUITE
