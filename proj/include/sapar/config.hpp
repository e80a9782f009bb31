#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace sapar {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Variant {
  AdditiveUnfactored,       // z = w + m + p, dense weights
  ConcatenativeUnfactored,  // z = [w + m; p], dense weights
  Factored,                 // z = [w + m; p], block-sparse weights
  PositionOnly,             // z = w + m + p, queries/keys from position embeddings
  BlockSparseAdditive,      // z = w + m + p, block-sparse weights
};

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

enum class WindowMode { Strict, Relaxed };

std::string to_string(WindowMode m);
WindowMode window_mode_from_string(const std::string& s);

struct EncoderConfig {
  Variant variant = Variant::Factored;
  std::size_t num_layers = 2;
  std::size_t d_model = 64;
  std::size_t num_heads = 4;
  std::size_t d_k = 16;
  std::size_t d_v = 16;
  std::size_t d_ff = 128;
  double attention_dropout = 0.2;
  double relu_dropout = 0.1;
  double residual_dropout = 0.2;
  /// Token limit, start and stop tokens included.
  std::size_t max_sentence_length = 302;
  /// Attention window used for training and parsing; unset means unbounded.
  std::optional<std::size_t> window_distance;
  WindowMode window_mode = WindowMode::Strict;

  /// Full-size hyperparameters; four layers when consuming external vectors.
  static EncoderConfig full_size(bool external_vectors = false);

  bool factored_weights() const {
    return variant == Variant::Factored || variant == Variant::BlockSparseAdditive;
  }
  bool concatenative_input() const {
    return variant == Variant::Factored || variant == Variant::ConcatenativeUnfactored;
  }
  std::size_t content_dim() const { return concatenative_input() ? d_model / 2 : d_model; }
  std::size_t position_dim() const { return concatenative_input() ? d_model / 2 : d_model; }
  void validate() const;
};

enum class LexicalMode { Tags, CharLstm, CharConcat, External };

std::string to_string(LexicalMode m);
LexicalMode lexical_mode_from_string(const std::string& s);

struct LexicalConfig {
  LexicalMode mode = LexicalMode::Tags;
  bool use_word_embeddings = true;
  /// 0 selects the mode default: 32 for char-concat, 64 for char-lstm.
  std::size_t char_embedding_dim = 0;
  /// Per-direction LSTM state size; 0 selects half the content dimension.
  std::size_t char_lstm_hidden = 0;
  std::size_t prefix_len = 8;
  std::size_t suffix_len = 8;
  std::size_t external_dim = 1024;
  double word_dropout = 0.4;
  double tag_dropout = 0.2;
  double morph_dropout = 0.2;
  double char_dropout = 0.2;

  std::size_t resolved_char_dim() const;
  std::size_t resolved_lstm_hidden(std::size_t content_dim) const;
  /// (prefix_len + suffix_len) * char dim.
  std::size_t char_concat_dim() const { return (prefix_len + suffix_len) * resolved_char_dim(); }
  void validate() const;
};

struct ModelConfig {
  EncoderConfig encoder;
  LexicalConfig lexical;
  std::size_t span_hidden = 64;
  std::string init = "glorot-uniform";
  std::string unary_separator = "+";
  std::uint64_t seed = 1;

  void validate() const;
};

/// Base learning rates per treebank language; 0.0008 for unlisted languages.
double base_lr_for_language(const std::string& language);

enum class LossReduction { Sum, Mean };

struct TrainConfig {
  std::size_t batch_size = 250;
  double base_lr = 0.0008;
  std::size_t warmup_batches = 160;
  std::size_t evals_per_epoch = 4;
  double patience_epochs = 5;
  double halving_factor = 0.5;
  std::size_t max_epochs = 100;
  /// 0 means no limit.
  std::size_t max_batches = 0;
  std::uint64_t seed = 1;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  LossReduction reduction = LossReduction::Sum;

  void validate() const;
};

struct RunConfig {
  ModelConfig model;
  TrainConfig train;
};

nlohmann::json to_json(const EncoderConfig& c);
nlohmann::json to_json(const LexicalConfig& c);
nlohmann::json to_json(const ModelConfig& c);
nlohmann::json to_json(const TrainConfig& c);
nlohmann::json to_json(const RunConfig& c);

EncoderConfig encoder_config_from_json(const nlohmann::json& j);
LexicalConfig lexical_config_from_json(const nlohmann::json& j);
ModelConfig model_config_from_json(const nlohmann::json& j);
TrainConfig train_config_from_json(const nlohmann::json& j);
RunConfig run_config_from_json(const nlohmann::json& j);

/// Applies "dotted.key=value" overrides; the value is parsed as JSON when
/// possible and taken as a string otherwise.
void apply_overrides(nlohmann::json& j, const std::vector<std::string>& overrides);

nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace sapar
