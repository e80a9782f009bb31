#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sapar/autodiff.hpp"
#include "sapar/binarize.hpp"
#include "sapar/chart.hpp"
#include "sapar/config.hpp"
#include "sapar/encoder.hpp"
#include "sapar/lexical.hpp"
#include "sapar/parameters.hpp"
#include "sapar/tree.hpp"
#include "sapar/vocabulary.hpp"

namespace sapar {

/// A training example: the sentence and its binarized gold tree.
struct Example {
  Sentence sentence;
  BinaryTree gold;
};

struct ParseOutcome {
  std::optional<Tree> tree;
  std::string error;
};

/// Lexical model, encoder and span scorer over a fixed vocabulary and label set.
/// Parameters are created in a fixed order from `config.seed`.
class ParserModel {
 public:
  ParserModel(const ModelConfig& config, Vocabulary vocab, LabelInventory labels);
  ParserModel(const ParserModel&) = delete;
  ParserModel& operator=(const ParserModel&) = delete;

  /// Vocabulary and labels collected from `trees`.
  static ParserModel from_treebank(const ModelConfig& config, std::span<const Tree> trees);

  const ModelConfig& config() const { return config_; }
  const Vocabulary& vocabulary() const { return vocab_; }
  const LabelInventory& labels() const { return labels_; }
  ParameterStore& parameters() { return params_; }
  const ParameterStore& parameters() const { return params_; }
  const LexicalModel& lexical() const { return lexical_; }
  const Encoder& encoder() const { return encoder_; }
  Encoder& encoder() { return encoder_; }
  const SpanScorer& scorer() const { return scorer_; }

  /// Unary-collapsed, binarized tree; throws on labels outside the inventory.
  BinaryTree gold_tree(const Tree& t) const;
  Example example(const Tree& t) const;

  /// Span scores [spans x (labels - 1)], one tensor per sentence.
  std::vector<ad::Tensor> span_scores(std::span<const Sentence> batch, const AttentionControl& control,
                                      bool train, Rng& rng, std::vector<AttentionTrace>* traces = nullptr) const;

  /// Summed (or averaged) hinge losses of a batch in training mode.
  ad::Tensor batch_loss(std::span<const Example> batch, Rng& rng, LossReduction reduction) const;

  /// Untagged sentences get the placeholder tag "X" on their preterminals.
  Tree parse(const Sentence& s, const AttentionControl& control = {}) const;
  /// Parses over `threads` workers; results do not depend on the thread count.
  /// A failing sentence yields an error message instead of a tree.
  std::vector<ParseOutcome> parse_all(std::span<const Sentence> sentences,
                                      const AttentionControl& control = {}, std::size_t threads = 1) const;
  /// As parse_all, but rethrows the first failure.
  std::vector<Tree> parse_trees(std::span<const Sentence> sentences, const AttentionControl& control = {},
                                std::size_t threads = 1) const;

  /// Attention distributions of every layer and head for one sentence.
  AttentionTrace attention(const Sentence& s, const AttentionControl& control = {}) const;

 private:
  ModelConfig config_;
  Vocabulary vocab_;
  LabelInventory labels_;
  ParameterStore params_;
  LexicalModel lexical_;
  Encoder encoder_;
  SpanScorer scorer_;
};

}  // namespace sapar
