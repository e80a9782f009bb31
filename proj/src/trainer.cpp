#include "sapar/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "sapar/evaluation.hpp"

namespace sapar {

double lr_schedule(std::size_t batches_seen, std::size_t halvings, const TrainConfig& config) {
  double lr = config.base_lr;
  if (config.warmup_batches > 0 && batches_seen < config.warmup_batches)
    lr = config.base_lr * static_cast<double>(batches_seen) / static_cast<double>(config.warmup_batches);
  return lr * std::pow(config.halving_factor, static_cast<double>(halvings));
}

PlateauScheduler::Step PlateauScheduler::observe(double epoch, double dev_f1) {
  Step step;
  if (!has_best_ || dev_f1 > best_) {
    has_best_ = true;
    best_ = dev_f1;
    reference_epoch_ = epoch;
    step.improved = true;
    return step;
  }
  if (epoch - reference_epoch_ >= config_.patience_epochs - 1e-9) {
    ++halvings_;
    reference_epoch_ = epoch;
    step.halved = true;
  }
  return step;
}

std::string training_log_header() {
  return "eval\tbatches\tepoch\tlr\ttrain_loss\tdev_f1\timproved\thalvings";
}

std::string training_log_line(const EvalRecord& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%zu\t%zu\t%.4f\t%.6g\t%.6f\t%.4f\t%d\t%zu", r.index, r.batches, r.epoch, r.lr,
                r.train_loss, r.dev_f1, r.improved ? 1 : 0, r.halvings);
  return buf;
}

TrainResult train(ParserModel& model, std::span<const Tree> train_trees, std::span<const Tree> dev_trees,
                  const TrainConfig& config, const TrainOptions& options) {
  config.validate();
  if (train_trees.empty()) throw TrainingError("training set is empty");
  if (dev_trees.empty()) throw TrainingError("development set is empty");

  std::vector<Example> examples;
  examples.reserve(train_trees.size());
  for (const auto& t : train_trees) examples.push_back(model.example(t));
  std::vector<Sentence> dev_sentences;
  for (const auto& t : dev_trees) dev_sentences.push_back(sentence_of(t));
  if (options.train_vectors) {
    std::vector<Sentence> sentences;
    for (const auto& e : examples) sentences.push_back(e.sentence);
    attach_external_vectors(sentences, *options.train_vectors);
    for (std::size_t i = 0; i < examples.size(); ++i) examples[i].sentence = std::move(sentences[i]);
  }
  if (options.dev_vectors) attach_external_vectors(dev_sentences, *options.dev_vectors);

  const AdamConfig adam{config.adam_beta1, config.adam_beta2, config.adam_eps};
  const std::size_t n = examples.size();
  Rng rng(config.seed);
  PlateauScheduler plateau(config);
  TrainResult result;
  std::vector<std::vector<double>> best_weights;
  std::size_t batches = 0;
  double loss_sum = 0.0;
  std::size_t loss_count = 0;
  double lr = 0.0;
  if (options.log) *options.log << training_log_header() << '\n' << std::flush;

  auto evaluate = [&](double epoch) {
    const auto predicted = model.parse_trees(dev_sentences, {}, options.threads);
    EvalRecord rec;
    rec.index = result.history.size();
    rec.batches = batches;
    rec.epoch = epoch;
    rec.lr = lr;
    rec.train_loss = loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0;
    rec.dev_f1 = score(predicted, dev_trees).f1;
    const auto step = plateau.observe(epoch, rec.dev_f1);
    rec.improved = step.improved;
    rec.halvings = plateau.halvings();
    loss_sum = 0.0;
    loss_count = 0;
    if (step.improved) {
      best_weights = model.parameters().snapshot();
      result.best_dev_f1 = rec.dev_f1;
      if (options.on_improvement) options.on_improvement(model, rec);
    }
    if (options.log) *options.log << training_log_line(rec) << '\n' << std::flush;
    result.history.push_back(rec);
  };

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  bool stop = false;
  double epoch_position = 0.0;
  for (std::size_t epoch = 0; epoch < config.max_epochs && !stop; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t next_eval = 1;
    for (std::size_t start = 0; start < n && !stop; start += config.batch_size) {
      const std::size_t end = std::min(n, start + config.batch_size);
      std::vector<Example> batch;
      batch.reserve(end - start);
      for (std::size_t k = start; k < end; ++k) batch.push_back(examples[order[k]]);

      ++batches;
      lr = lr_schedule(batches, plateau.halvings(), config);
      ad::Tensor loss = model.batch_loss(batch, rng, config.reduction);
      const double value = loss.item();
      if (!std::isfinite(value)) {
        std::string ids;
        for (std::size_t k = start; k < end; ++k) ids += (ids.empty() ? "" : ",") + std::to_string(order[k]);
        throw TrainingError("non-finite loss " + std::to_string(value) + " at batch " + std::to_string(batches) +
                            " (epoch " + std::to_string(epoch) + ", lr " + std::to_string(lr) +
                            ", training sentences " + ids + ")");
      }
      loss.backward();
      try {
        adam_step(model.parameters(), lr, adam);
      } catch (const NonFiniteGradient& e) {
        throw TrainingError(std::string(e.what()) + " at batch " + std::to_string(batches) + " (lr " +
                            std::to_string(lr) + ")");
      }
      loss_sum += value;
      ++loss_count;

      epoch_position = static_cast<double>(epoch) + static_cast<double>(end) / static_cast<double>(n);
      bool due = false;
      while (next_eval <= config.evals_per_epoch && end * config.evals_per_epoch >= next_eval * n) {
        due = true;
        ++next_eval;
      }
      if (config.max_batches && batches >= config.max_batches) stop = true;
      if (due || stop) evaluate(epoch_position);
    }
  }
  if (loss_count) evaluate(epoch_position);

  if (!best_weights.empty()) model.parameters().restore(best_weights);
  result.batches = batches;
  result.epochs = epoch_position;
  result.halvings = plateau.halvings();
  return result;
}

}  // namespace sapar
