#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sapar/tree.hpp"

namespace sapar {

struct SynthOptions {
  std::size_t count = 50;
  std::uint64_t seed = 1;
  std::size_t min_length = 1;
  std::size_t max_length = 20;
};

/// Trees sampled from a small English-like grammar (S, NP, VP, PP, ADJP,
/// SBAR) with a closed lexicon. Imperatives and pronoun subjects produce
/// unary chains. Deterministic in `seed`.
std::vector<Tree> synthetic_treebank(const SynthOptions& options);

}  // namespace sapar
