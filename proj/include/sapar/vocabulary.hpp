#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sapar/tree.hpp"

namespace sapar {

/// A sentence to parse. `tags` is empty for untagged input; `external`
/// holds one pre-computed vector per word when external vectors are in use.
struct Sentence {
  std::vector<std::string> words;
  std::vector<std::string> tags;
  std::vector<std::vector<double>> external;

  std::size_t size() const { return words.size(); }
  bool tagged() const { return !tags.empty(); }
  std::vector<TaggedWord> tagged_words(std::string_view fallback_tag = "X") const;
};

Sentence sentence_of(const Tree& t);

/// `word_tag` tokens separated by whitespace; the tag follows the last '_'.
Sentence parse_tagged_line(std::string_view line);
Sentence parse_plain_line(std::string_view line);
/// One sentence per non-blank line.
std::vector<Sentence> read_sentences(const std::filesystem::path& path, bool tagged);

/// Unicode scalar values of a UTF-8 string; throws std::invalid_argument on
/// malformed input.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(char32_t c);

/// Dense string <-> id table with four reserved ids.
class SymbolTable {
 public:
  static constexpr std::size_t padding = 0;
  static constexpr std::size_t unknown = 1;
  static constexpr std::size_t start = 2;
  static constexpr std::size_t stop = 3;

  SymbolTable();
  explicit SymbolTable(std::vector<std::string> symbols);  // from a saved listing

  std::size_t add(const std::string& s);
  /// Unknown id for unseen symbols.
  std::size_t id(const std::string& s) const;
  bool contains(const std::string& s) const { return ids_.count(s) != 0; }
  const std::string& symbol(std::size_t id) const { return symbols_.at(id); }
  std::size_t size() const { return symbols_.size(); }
  const std::vector<std::string>& symbols() const { return symbols_; }

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, std::size_t> ids_;
};

struct Vocabulary {
  SymbolTable words;
  SymbolTable tags;
  SymbolTable chars;

  static Vocabulary from_trees(std::span<const Tree> trees);
  std::vector<std::size_t> char_ids(std::string_view word) const;
};

}  // namespace sapar
