#include "sapar/synth.hpp"

#include <random>
#include <stdexcept>
#include <string>

namespace sapar {

namespace {

class Grammar {
 public:
  explicit Grammar(std::uint64_t seed) : rng_(seed) {}

  Tree sentence(int depth) {
    const double r = uniform();
    if (depth < 2 && r < 0.12) return Tree::node("S", {sentence(depth + 1), word("CC"), sentence(depth + 1)});
    if (r < 0.2) return Tree::node("S", {verb_phrase(depth + 1)});
    if (r < 0.45) return Tree::node("S", {noun_phrase(depth + 1), verb_phrase(depth + 1), prep_phrase(depth + 1)});
    return Tree::node("S", {noun_phrase(depth + 1), verb_phrase(depth + 1)});
  }

 private:
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }

  Tree word(const std::string& tag) {
    static const std::vector<std::pair<std::string, std::vector<std::string>>> lexicon = {
        {"DT", {"the", "a", "every", "this"}},
        {"NN", {"cat", "dog", "park", "telescope", "idea", "man", "woman", "house", "river", "book"}},
        {"JJ", {"big", "small", "red", "old", "happy"}},
        {"RB", {"very", "quite"}},
        {"VB", {"sees", "likes", "walks", "finds", "takes", "says", "thinks"}},
        {"IN", {"in", "on", "with", "near", "under"}},
        {"PRP", {"she", "he", "it", "they"}},
        {"CC", {"and", "but"}},
        {"COMP", {"that"}},
    };
    for (const auto& [t, words] : lexicon)
      if (t == tag) {
        std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
        return Tree::leaf(tag, words[pick(rng_)]);
      }
    throw std::logic_error("no lexicon entry for tag " + tag);
  }

  Tree noun_phrase(int depth) {
    const double r = uniform();
    if (r < 0.2) return Tree::node("NP", {word("PRP")});
    if (depth < 4 && r < 0.35) return Tree::node("NP", {noun_phrase(depth + 1), prep_phrase(depth + 1)});
    if (r < 0.5) return Tree::node("NP", {word("DT"), adjective_phrase(), word("NN")});
    if (r < 0.65) return Tree::node("NP", {word("DT"), word("JJ"), word("NN")});
    return Tree::node("NP", {word("DT"), word("NN")});
  }

  Tree adjective_phrase() { return Tree::node("ADJP", {word("RB"), word("JJ")}); }

  Tree prep_phrase(int depth) { return Tree::node("PP", {word("IN"), noun_phrase(depth + 1)}); }

  Tree verb_phrase(int depth) {
    const double r = uniform();
    if (r < 0.15) return Tree::node("VP", {word("VB")});
    if (depth < 3 && r < 0.3)
      return Tree::node("VP", {word("VB"), Tree::node("SBAR", {word("COMP"), sentence(depth + 1)})});
    if (depth < 4 && r < 0.5) return Tree::node("VP", {word("VB"), noun_phrase(depth + 1), prep_phrase(depth + 1)});
    return Tree::node("VP", {word("VB"), noun_phrase(depth + 1)});
  }

  std::mt19937_64 rng_;
};

}  // namespace

std::vector<Tree> synthetic_treebank(const SynthOptions& options) {
  if (options.min_length == 0 || options.min_length > options.max_length)
    throw std::invalid_argument("synthetic_treebank: need 1 <= min_length <= max_length");
  Grammar grammar(options.seed);
  std::vector<Tree> out;
  out.reserve(options.count);
  std::size_t attempts = 0;
  while (out.size() < options.count) {
    if (++attempts > 1000 * (options.count + 1))
      throw std::runtime_error("synthetic_treebank: length range too narrow for the grammar");
    Tree t = grammar.sentence(0);
    const std::size_t n = t.num_leaves();
    if (n >= options.min_length && n <= options.max_length) out.push_back(std::move(t));
  }
  return out;
}

}  // namespace sapar
