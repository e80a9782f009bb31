#pragma once

#include <cstddef>
#include <functional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "sapar/config.hpp"
#include "sapar/lexical.hpp"
#include "sapar/model.hpp"
#include "sapar/tree.hpp"

namespace sapar {

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// min(base_lr * batches / warmup, base_lr) * halving_factor^halvings.
double lr_schedule(std::size_t batches_seen, std::size_t halvings, const TrainConfig& config);

/// Dev-score bookkeeping: an evaluation improves only if strictly better than
/// every earlier one, and the learning rate halves once `patience_epochs`
/// have passed since the last improvement (or the last halving).
class PlateauScheduler {
 public:
  explicit PlateauScheduler(const TrainConfig& config) : config_(config) {}

  struct Step {
    bool improved = false;
    bool halved = false;
  };
  Step observe(double epoch, double dev_f1);

  std::size_t halvings() const { return halvings_; }
  double best() const { return best_; }
  bool has_best() const { return has_best_; }
  double epochs_since_improvement(double epoch) const { return epoch - reference_epoch_; }

 private:
  TrainConfig config_;
  bool has_best_ = false;
  double best_ = 0.0;
  double reference_epoch_ = 0.0;
  std::size_t halvings_ = 0;
};

struct EvalRecord {
  std::size_t index = 0;
  std::size_t batches = 0;
  double epoch = 0.0;
  double lr = 0.0;
  double train_loss = 0.0;  // mean batch loss since the previous evaluation
  double dev_f1 = 0.0;
  bool improved = false;
  std::size_t halvings = 0;
};

struct TrainResult {
  double best_dev_f1 = 0.0;
  std::size_t batches = 0;
  double epochs = 0.0;
  std::size_t halvings = 0;
  std::vector<EvalRecord> history;
};

struct TrainOptions {
  std::ostream* log = nullptr;
  std::size_t threads = 1;
  /// Called after every improvement with the model holding the new best weights.
  std::function<void(const ParserModel&, const EvalRecord&)> on_improvement;
  /// Per-sentence vectors for the external lexical mode.
  const ExternalVectors* train_vectors = nullptr;
  const ExternalVectors* dev_vectors = nullptr;
};

/// Header of the tab-separated training log.
std::string training_log_header();
std::string training_log_line(const EvalRecord& r);

/// Trains in place and leaves the model holding the best dev iterate.
TrainResult train(ParserModel& model, std::span<const Tree> train_trees, std::span<const Tree> dev_trees,
                  const TrainConfig& config, const TrainOptions& options = {});

}  // namespace sapar
