#include "sapar/model.hpp"

#include <algorithm>
#include <stdexcept>
#include <thread>

namespace sapar {

using ad::Tensor;

ParserModel::ParserModel(const ModelConfig& config, Vocabulary vocab, LabelInventory labels)
    : config_(config), vocab_(std::move(vocab)), labels_(std::move(labels)) {
  config_.validate();
  if (labels_.size() < 2) throw std::invalid_argument("label inventory has no constituent labels");
  Rng rng(config_.seed);
  lexical_ = LexicalModel(config_.lexical, config_.encoder.content_dim(), vocab_, params_, rng);
  encoder_ = Encoder(config_.encoder, params_, rng);
  scorer_ = SpanScorer(params_, rng, "span", config_.encoder.d_model, config_.span_hidden, labels_.size());
}

ParserModel ParserModel::from_treebank(const ModelConfig& config, std::span<const Tree> trees) {
  std::vector<Tree> collapsed;
  collapsed.reserve(trees.size());
  for (const auto& t : trees) collapsed.push_back(collapse_unary(t, config.unary_separator));
  return ParserModel(config, Vocabulary::from_trees(trees), LabelInventory::from_trees(collapsed));
}

BinaryTree ParserModel::gold_tree(const Tree& t) const {
  return binarize(collapse_unary(t, config_.unary_separator), labels_);
}

Example ParserModel::example(const Tree& t) const { return {sentence_of(t), gold_tree(t)}; }

std::vector<Tensor> ParserModel::span_scores(std::span<const Sentence> batch, const AttentionControl& control,
                                             bool train, Rng& rng, std::vector<AttentionTrace>* traces) const {
  const auto content = lexical_.represent(batch, train, rng);
  if (traces) traces->assign(batch.size(), {});
  std::vector<Tensor> out;
  out.reserve(batch.size());
  for (std::size_t s = 0; s < batch.size(); ++s) {
    Tensor y = encoder_.encode(content[s], control, train, rng, traces ? &(*traces)[s] : nullptr);
    out.push_back(scorer_.score(span_vectors(directional_split(y), batch[s].size())));
  }
  return out;
}

Tensor ParserModel::batch_loss(std::span<const Example> batch, Rng& rng, LossReduction reduction) const {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  std::vector<Sentence> sentences;
  sentences.reserve(batch.size());
  for (const auto& e : batch) sentences.push_back(e.sentence);
  const auto scores = span_scores(sentences, {}, true, rng);
  Tensor total = hinge_loss(scores[0], sentences[0].size(), batch[0].gold).loss;
  for (std::size_t s = 1; s < batch.size(); ++s)
    total = ad::add(total, hinge_loss(scores[s], sentences[s].size(), batch[s].gold).loss);
  if (reduction == LossReduction::Mean) total = ad::scale(total, 1.0 / static_cast<double>(batch.size()));
  return total;
}

Tree ParserModel::parse(const Sentence& s, const AttentionControl& control) const {
  if (s.size() == 0) throw std::invalid_argument("cannot parse an empty sentence");
  ad::NoGradGuard no_grad;
  Rng rng(0);
  const auto scores = span_scores(std::span<const Sentence>(&s, 1), control, false, rng);
  const BinaryTree best = cky_decode(ScoreChart::from_tensor(scores[0], s.size()));
  const auto words = s.tagged_words("X");
  return debinarize(best, labels_, words, config_.unary_separator);
}

std::vector<ParseOutcome> ParserModel::parse_all(std::span<const Sentence> sentences,
                                                 const AttentionControl& control, std::size_t threads) const {
  std::vector<ParseOutcome> out(sentences.size());
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < sentences.size(); i += stride) {
      try {
        out[i].tree = parse(sentences[i], control);
      } catch (const std::exception& e) {
        out[i].error = e.what();
      }
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, sentences.size()));
  if (threads == 1) {
    work(0, 1);
    return out;
  }
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
  for (auto& t : pool) t.join();
  return out;
}

std::vector<Tree> ParserModel::parse_trees(std::span<const Sentence> sentences, const AttentionControl& control,
                                           std::size_t threads) const {
  auto outcomes = parse_all(sentences, control, threads);
  std::vector<Tree> trees;
  trees.reserve(outcomes.size());
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (!outcomes[i].tree) throw std::runtime_error("sentence " + std::to_string(i) + ": " + outcomes[i].error);
    trees.push_back(std::move(*outcomes[i].tree));
  }
  return trees;
}

AttentionTrace ParserModel::attention(const Sentence& s, const AttentionControl& control) const {
  ad::NoGradGuard no_grad;
  Rng rng(0);
  const auto content = lexical_.represent(s, false, rng);
  AttentionTrace trace;
  encoder_.encode(content, control, false, rng, &trace);
  return trace;
}

}  // namespace sapar
