#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sapar {

/// n-ary labeled constituency tree. A leaf is a preterminal: its label is
/// the POS tag and it carries the word.
struct Tree {
  std::string label;
  std::vector<Tree> children;
  std::optional<std::string> word;

  static Tree leaf(std::string tag, std::string word);
  static Tree node(std::string label, std::vector<Tree> children);

  bool is_leaf() const { return word.has_value(); }
  const std::string& tag() const;
  std::size_t num_leaves() const;
  std::size_t depth() const;

  friend bool operator==(const Tree&, const Tree&) = default;
};

struct TaggedWord {
  std::string word;
  std::string tag;
  friend bool operator==(const TaggedWord&, const TaggedWord&) = default;
};

std::vector<TaggedWord> leaves(const Tree& t);

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column, std::size_t offset);
  std::size_t line;
  std::size_t column;
  std::size_t offset;
};

/// Reads every top-level bracketing in `text`. An outer bracket with an empty
/// label and a single child, as in "( (S ...) )", is unwrapped. Outside
/// brackets, '#' comments out the rest of the line.
std::vector<Tree> parse_bracketed(std::string_view text);
std::string render_bracketed(const Tree& t);

std::vector<Tree> read_treebank(const std::filesystem::path& path);
void write_treebank(const std::filesystem::path& path, std::span<const Tree> trees);

inline constexpr std::string_view kUnarySeparator = "+";

/// Merges chains of single-child constituents into one node whose label joins
/// the chain with `separator`. Preterminals are never merged.
Tree collapse_unary(const Tree& t, std::string_view separator = kUnarySeparator);
Tree expand_unary(const Tree& t, std::string_view separator = kUnarySeparator);

}  // namespace sapar
