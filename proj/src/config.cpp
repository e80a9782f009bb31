#include "sapar/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

namespace sapar {

using nlohmann::json;

namespace {

void check_keys(const json& j, const char* section, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(std::string(section) + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key()))
      throw ConfigError(std::string(section) + ": unknown key '" + it.key() + "'");
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid value for '") + key + "': " + e.what());
  }
}

}  // namespace

std::string to_string(Variant v) {
  switch (v) {
    case Variant::AdditiveUnfactored: return "additive";
    case Variant::ConcatenativeUnfactored: return "concatenative";
    case Variant::Factored: return "factored";
    case Variant::PositionOnly: return "position-only";
    case Variant::BlockSparseAdditive: return "block-sparse-additive";
  }
  return "?";
}

Variant variant_from_string(const std::string& s) {
  for (auto v : {Variant::AdditiveUnfactored, Variant::ConcatenativeUnfactored, Variant::Factored,
                 Variant::PositionOnly, Variant::BlockSparseAdditive})
    if (to_string(v) == s) return v;
  throw ConfigError("unknown encoder variant '" + s + "'");
}

std::string to_string(LexicalMode m) {
  switch (m) {
    case LexicalMode::Tags: return "tags";
    case LexicalMode::CharLstm: return "char-lstm";
    case LexicalMode::CharConcat: return "char-concat";
    case LexicalMode::External: return "external";
  }
  return "?";
}

LexicalMode lexical_mode_from_string(const std::string& s) {
  for (auto m : {LexicalMode::Tags, LexicalMode::CharLstm, LexicalMode::CharConcat, LexicalMode::External})
    if (to_string(m) == s) return m;
  throw ConfigError("unknown lexical mode '" + s + "'");
}

std::string to_string(WindowMode m) { return m == WindowMode::Strict ? "strict" : "relaxed"; }

WindowMode window_mode_from_string(const std::string& s) {
  if (s == "strict") return WindowMode::Strict;
  if (s == "relaxed") return WindowMode::Relaxed;
  throw ConfigError("window mode must be 'strict' or 'relaxed', got '" + s + "'");
}

EncoderConfig EncoderConfig::full_size(bool external_vectors) {
  EncoderConfig c;
  c.num_layers = external_vectors ? 4 : 8;
  c.d_model = 1024;
  c.num_heads = 8;
  c.d_k = 64;
  c.d_v = 64;
  c.d_ff = 2048;
  c.attention_dropout = 0.2;
  c.relu_dropout = 0.1;
  c.residual_dropout = 0.2;
  return c;
}

void EncoderConfig::validate() const {
  if (d_model == 0 || num_heads == 0 || d_k == 0 || d_v == 0 || d_ff == 0)
    throw ConfigError("encoder dimensions must be positive");
  if (d_model % 2 != 0) throw ConfigError("d_model must be even (directional split)");
  if (factored_weights() && (d_k % 2 || d_v % 2 || d_ff % 2))
    throw ConfigError("factored weights require even d_k, d_v and d_ff");
  if (max_sentence_length < 3) throw ConfigError("max_sentence_length must allow one word");
  for (double p : {attention_dropout, relu_dropout, residual_dropout})
    if (!(p >= 0.0 && p < 1.0)) throw ConfigError("dropout probabilities must lie in [0, 1)");
}

std::size_t LexicalConfig::resolved_char_dim() const {
  if (char_embedding_dim != 0) return char_embedding_dim;
  return mode == LexicalMode::CharConcat ? 32 : 64;
}

std::size_t LexicalConfig::resolved_lstm_hidden(std::size_t content_dim) const {
  return char_lstm_hidden != 0 ? char_lstm_hidden : std::max<std::size_t>(1, content_dim / 2);
}

void LexicalConfig::validate() const {
  if (mode == LexicalMode::External && external_dim == 0)
    throw ConfigError("external_dim must be positive");
  if (mode == LexicalMode::CharConcat && prefix_len + suffix_len == 0)
    throw ConfigError("char-concat needs at least one prefix or suffix letter");
  for (double p : {word_dropout, tag_dropout, morph_dropout, char_dropout})
    if (!(p >= 0.0 && p < 1.0)) throw ConfigError("dropout probabilities must lie in [0, 1)");
}

void ModelConfig::validate() const {
  encoder.validate();
  lexical.validate();
  if (span_hidden == 0) throw ConfigError("span_hidden must be positive");
  if (init != "glorot-uniform") throw ConfigError("unsupported init scheme '" + init + "'");
  if (unary_separator.empty()) throw ConfigError("unary_separator must not be empty");
}

double base_lr_for_language(const std::string& language) {
  std::string l = language;
  std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
  if (l == "hebrew" || l == "swedish") return 0.002;
  if (l == "polish") return 0.0015;
  return 0.0008;
}

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(base_lr > 0.0)) throw ConfigError("base_lr must be positive");
  if (evals_per_epoch == 0) throw ConfigError("evals_per_epoch must be positive");
  if (!(halving_factor > 0.0 && halving_factor <= 1.0)) throw ConfigError("halving_factor must be in (0, 1]");
  if (!(patience_epochs > 0.0)) throw ConfigError("patience_epochs must be positive");
}

json to_json(const EncoderConfig& c) {
  return {{"variant", to_string(c.variant)},
          {"num_layers", c.num_layers},
          {"d_model", c.d_model},
          {"num_heads", c.num_heads},
          {"d_k", c.d_k},
          {"d_v", c.d_v},
          {"d_ff", c.d_ff},
          {"attention_dropout", c.attention_dropout},
          {"relu_dropout", c.relu_dropout},
          {"residual_dropout", c.residual_dropout},
          {"max_sentence_length", c.max_sentence_length},
          {"window_distance", c.window_distance ? json(*c.window_distance) : json(nullptr)},
          {"window_mode", to_string(c.window_mode)}};
}

json to_json(const LexicalConfig& c) {
  return {{"mode", to_string(c.mode)},
          {"use_word_embeddings", c.use_word_embeddings},
          {"char_embedding_dim", c.char_embedding_dim},
          {"char_lstm_hidden", c.char_lstm_hidden},
          {"prefix_len", c.prefix_len},
          {"suffix_len", c.suffix_len},
          {"external_dim", c.external_dim},
          {"word_dropout", c.word_dropout},
          {"tag_dropout", c.tag_dropout},
          {"morph_dropout", c.morph_dropout},
          {"char_dropout", c.char_dropout}};
}

json to_json(const ModelConfig& c) {
  return {{"encoder", to_json(c.encoder)},
          {"lexical", to_json(c.lexical)},
          {"span_hidden", c.span_hidden},
          {"init", c.init},
          {"unary_separator", c.unary_separator},
          {"seed", c.seed}};
}

json to_json(const TrainConfig& c) {
  return {{"batch_size", c.batch_size},
          {"base_lr", c.base_lr},
          {"warmup_batches", c.warmup_batches},
          {"evals_per_epoch", c.evals_per_epoch},
          {"patience_epochs", c.patience_epochs},
          {"halving_factor", c.halving_factor},
          {"max_epochs", c.max_epochs},
          {"max_batches", c.max_batches},
          {"seed", c.seed},
          {"adam_beta1", c.adam_beta1},
          {"adam_beta2", c.adam_beta2},
          {"adam_eps", c.adam_eps},
          {"loss_reduction", c.reduction == LossReduction::Sum ? "sum" : "mean"}};
}

json to_json(const RunConfig& c) {
  json j = to_json(c.model);
  j["train"] = to_json(c.train);
  return j;
}

EncoderConfig encoder_config_from_json(const json& j) {
  check_keys(j, "encoder",
             {"variant", "num_layers", "d_model", "num_heads", "d_k", "d_v", "d_ff",
              "attention_dropout", "relu_dropout", "residual_dropout", "max_sentence_length", "window_distance", "window_mode"});
  EncoderConfig c;
  std::string variant = to_string(c.variant);
  read(j, "variant", variant);
  c.variant = variant_from_string(variant);
  read(j, "num_layers", c.num_layers);
  read(j, "d_model", c.d_model);
  read(j, "num_heads", c.num_heads);
  read(j, "d_k", c.d_k);
  read(j, "d_v", c.d_v);
  read(j, "d_ff", c.d_ff);
  read(j, "attention_dropout", c.attention_dropout);
  read(j, "relu_dropout", c.relu_dropout);
  read(j, "residual_dropout", c.residual_dropout);
  read(j, "max_sentence_length", c.max_sentence_length);
  if (j.contains("window_distance") && !j.at("window_distance").is_null()) {
    std::size_t d = 0;
    read(j, "window_distance", d);
    c.window_distance = d;
  }
  std::string window_mode = to_string(c.window_mode);
  read(j, "window_mode", window_mode);
  c.window_mode = window_mode_from_string(window_mode);
  return c;
}

LexicalConfig lexical_config_from_json(const json& j) {
  check_keys(j, "lexical",
             {"mode", "use_word_embeddings", "char_embedding_dim", "char_lstm_hidden", "prefix_len",
              "suffix_len", "external_dim", "word_dropout", "tag_dropout", "morph_dropout",
              "char_dropout"});
  LexicalConfig c;
  std::string mode = to_string(c.mode);
  read(j, "mode", mode);
  c.mode = lexical_mode_from_string(mode);
  read(j, "use_word_embeddings", c.use_word_embeddings);
  read(j, "char_embedding_dim", c.char_embedding_dim);
  read(j, "char_lstm_hidden", c.char_lstm_hidden);
  read(j, "prefix_len", c.prefix_len);
  read(j, "suffix_len", c.suffix_len);
  read(j, "external_dim", c.external_dim);
  read(j, "word_dropout", c.word_dropout);
  read(j, "tag_dropout", c.tag_dropout);
  read(j, "morph_dropout", c.morph_dropout);
  read(j, "char_dropout", c.char_dropout);
  return c;
}

ModelConfig model_config_from_json(const json& j) {
  check_keys(j, "model", {"encoder", "lexical", "span_hidden", "init", "unary_separator", "seed", "train"});
  ModelConfig c;
  if (j.contains("encoder")) c.encoder = encoder_config_from_json(j.at("encoder"));
  if (j.contains("lexical")) c.lexical = lexical_config_from_json(j.at("lexical"));
  read(j, "span_hidden", c.span_hidden);
  read(j, "init", c.init);
  read(j, "unary_separator", c.unary_separator);
  read(j, "seed", c.seed);
  c.validate();
  return c;
}

TrainConfig train_config_from_json(const json& j) {
  check_keys(j, "train",
             {"batch_size", "base_lr", "language", "warmup_batches", "evals_per_epoch",
              "patience_epochs", "halving_factor", "max_epochs", "max_batches", "seed", "adam_beta1",
              "adam_beta2", "adam_eps", "loss_reduction"});
  TrainConfig c;
  read(j, "batch_size", c.batch_size);
  if (j.contains("language")) c.base_lr = base_lr_for_language(j.at("language").get<std::string>());
  read(j, "base_lr", c.base_lr);
  read(j, "warmup_batches", c.warmup_batches);
  read(j, "evals_per_epoch", c.evals_per_epoch);
  read(j, "patience_epochs", c.patience_epochs);
  read(j, "halving_factor", c.halving_factor);
  read(j, "max_epochs", c.max_epochs);
  read(j, "max_batches", c.max_batches);
  read(j, "seed", c.seed);
  read(j, "adam_beta1", c.adam_beta1);
  read(j, "adam_beta2", c.adam_beta2);
  read(j, "adam_eps", c.adam_eps);
  std::string reduction = "sum";
  read(j, "loss_reduction", reduction);
  if (reduction == "sum") c.reduction = LossReduction::Sum;
  else if (reduction == "mean") c.reduction = LossReduction::Mean;
  else throw ConfigError("loss_reduction must be 'sum' or 'mean'");
  c.validate();
  return c;
}

RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  c.model = model_config_from_json(j);
  if (j.contains("train")) c.train = train_config_from_json(j.at("train"));
  return c;
}

void apply_overrides(json& j, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + o + "' is not key=value");
    std::string key = o.substr(0, eq);
    const std::string raw = o.substr(eq + 1);
    std::string pointer = "/" + key;
    std::replace(pointer.begin(), pointer.end(), '.', '/');
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    j[json::json_pointer(pointer)] = value;
  }
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config '" + path.string() + "' is not valid JSON");
  return j;
}

}  // namespace sapar
