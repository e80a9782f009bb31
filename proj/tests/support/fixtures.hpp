#pragma once

// Small models and treebanks shared by the unit tests.

#include <filesystem>
#include <string>
#include <vector>

#include "sapar/config.hpp"
#include "sapar/synth.hpp"
#include "sapar/tree.hpp"

namespace fixture {

inline sapar::ModelConfig tiny_model(sapar::LexicalMode mode = sapar::LexicalMode::Tags) {
  sapar::ModelConfig c;
  c.encoder.num_layers = 1;
  c.encoder.d_model = 16;
  c.encoder.num_heads = 2;
  c.encoder.d_k = 4;
  c.encoder.d_v = 4;
  c.encoder.d_ff = 16;
  c.encoder.max_sentence_length = 40;
  c.lexical.mode = mode;
  c.lexical.char_embedding_dim = 4;
  c.span_hidden = 16;
  return c;
}

inline sapar::TrainConfig tiny_training(std::size_t max_batches) {
  sapar::TrainConfig t;
  t.batch_size = 4;
  t.base_lr = 0.002;
  t.warmup_batches = 4;
  t.evals_per_epoch = 2;
  t.max_batches = max_batches;
  return t;
}

inline std::vector<sapar::Tree> toy_trees(std::size_t count, std::uint64_t seed, std::size_t max_length = 8) {
  return sapar::synthetic_treebank({count, seed, 2, max_length});
}

/// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& name)
      : path_(std::filesystem::temp_directory_path() / ("sapar_test_" + name)) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace fixture
