#pragma once

#include <compare>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sapar/tree.hpp"

namespace sapar {

struct Bracket {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string label;
  friend auto operator<=>(const Bracket&, const Bracket&) = default;
};

/// Labeled brackets of an n-ary tree: every constituent including the root,
/// preterminals excluded. Sorted.
std::vector<Bracket> brackets(const Tree& t);

struct EvalResult {
  std::size_t sentences = 0;
  std::size_t matched = 0;
  std::size_t predicted = 0;
  std::size_t gold = 0;
  double recall = 0.0;     // percent
  double precision = 0.0;  // percent
  double f1 = 0.0;         // percent
};

/// Percentages from raw counts.
EvalResult make_result(std::size_t sentences, std::size_t matched, std::size_t predicted, std::size_t gold);

/// Labeled-bracket scores with multiset matching. Throws std::invalid_argument
/// naming the first sentence whose length differs.
EvalResult score(std::span<const Tree> predicted, std::span<const Tree> gold);

/// Fixed-format multi-line report.
std::string report(const EvalResult& r);
/// Single JSON line with the same numbers.
std::string machine_line(const EvalResult& r);

}  // namespace sapar
