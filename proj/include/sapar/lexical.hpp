#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sapar/autodiff.hpp"
#include "sapar/config.hpp"
#include "sapar/parameters.hpp"
#include "sapar/vocabulary.hpp"

namespace sapar {

/// Character-table rows for one word under the prefix/suffix scheme: the
/// first `prefix_len` characters padded on the right, then the last
/// `suffix_len` characters padded on the left.
std::vector<std::size_t> char_concat_ids(std::span<const std::size_t> chars, std::size_t prefix_len,
                                         std::size_t suffix_len);

/// [words x (prefix_len + suffix_len) * char_dim] concatenated character embeddings.
ad::Tensor char_concat(const ad::Tensor& char_table, const std::vector<std::vector<std::size_t>>& words,
                       std::size_t prefix_len, std::size_t suffix_len);

/// Bidirectional LSTM over the characters of each word, final states
/// concatenated and projected.
class CharLstm {
 public:
  CharLstm() = default;
  CharLstm(ParameterStore& ps, Rng& rng, const std::string& prefix, std::size_t num_chars,
           std::size_t char_dim, std::size_t hidden, std::size_t out_dim);

  /// Words are processed as one batch; each must be non-empty.
  ad::Tensor encode(const std::vector<std::vector<std::size_t>>& words, double char_dropout, bool train,
                    Rng& rng) const;

  const ad::Tensor& char_table() const { return char_table_; }
  std::size_t hidden() const { return hidden_; }

 private:
  ad::Tensor run_direction(const ad::Tensor& embedded, const std::vector<std::size_t>& lengths,
                           std::size_t max_len, const ad::Tensor& w, const ad::Tensor& b) const;

  std::size_t hidden_ = 0;
  ad::Tensor char_table_;
  ad::Tensor forward_w_, forward_b_;
  ad::Tensor backward_w_, backward_b_;
  ad::Tensor proj_w_, proj_b_;
};

/// Per-sentence vectors read from an external file.
struct ExternalVectors {
  std::size_t dim = 0;
  std::vector<std::vector<std::vector<double>>> sentences;
};

/// Header "num_sentences dim", then per sentence a count line followed by one
/// whitespace-separated vector line per token.
ExternalVectors read_external_vectors(const std::filesystem::path& path);
void write_external_vectors(const std::filesystem::path& path, const ExternalVectors& v);
/// Moves vectors onto the sentences; counts must agree.
void attach_external_vectors(std::vector<Sentence>& sentences, ExternalVectors vectors);

/// Produces the content rows (start token, words, stop token) of each
/// sentence under the configured lexical mode.
class LexicalModel {
 public:
  LexicalModel() = default;
  LexicalModel(const LexicalConfig& config, std::size_t content_dim, const Vocabulary& vocab,
               ParameterStore& ps, Rng& rng, const std::string& prefix = "lexical");

  std::vector<ad::Tensor> represent(std::span<const Sentence> batch, bool train, Rng& rng) const;
  ad::Tensor represent(const Sentence& s, bool train, Rng& rng) const;

  const LexicalConfig& config() const { return config_; }
  std::size_t content_dim() const { return content_dim_; }
  const ad::Tensor& word_table() const { return word_table_; }
  const ad::Tensor& tag_table() const { return tag_table_; }
  const ad::Tensor& char_table() const { return char_table_; }
  const ad::Tensor& external_projection() const { return external_proj_; }
  const CharLstm& char_lstm() const { return char_lstm_; }

 private:
  bool uses_word_table() const;
  std::vector<std::vector<std::size_t>> token_chars(const Sentence& s) const;

  LexicalConfig config_;
  std::size_t content_dim_ = 0;
  Vocabulary vocab_;
  ad::Tensor word_table_;
  ad::Tensor tag_table_;
  ad::Tensor char_table_;        // char-concat
  ad::Tensor concat_proj_;       // char-concat, only when widths differ
  CharLstm char_lstm_;
  ad::Tensor external_proj_;
  ad::Tensor external_boundary_;  // start and stop rows
};

}  // namespace sapar
