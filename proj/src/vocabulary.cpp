#include "sapar/vocabulary.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sapar {

std::vector<TaggedWord> Sentence::tagged_words(std::string_view fallback_tag) const {
  std::vector<TaggedWord> out;
  out.reserve(words.size());
  for (std::size_t i = 0; i < words.size(); ++i)
    out.push_back({words[i], tagged() ? tags[i] : std::string(fallback_tag)});
  return out;
}

Sentence sentence_of(const Tree& t) {
  Sentence s;
  for (auto& tw : leaves(t)) {
    s.words.push_back(std::move(tw.word));
    s.tags.push_back(std::move(tw.tag));
  }
  return s;
}

namespace {

std::vector<std::string> split_ws(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.emplace_back(line.substr(start, i - start));
  }
  return out;
}

}  // namespace

Sentence parse_tagged_line(std::string_view line) {
  Sentence s;
  for (auto& tok : split_ws(line)) {
    const auto at = tok.rfind('_');
    if (at == std::string::npos || at == 0 || at + 1 == tok.size())
      throw std::invalid_argument("malformed word_tag token '" + tok + "'");
    s.words.push_back(tok.substr(0, at));
    s.tags.push_back(tok.substr(at + 1));
  }
  return s;
}

Sentence parse_plain_line(std::string_view line) {
  Sentence s;
  s.words = split_ws(line);
  return s;
}

std::vector<Sentence> read_sentences(const std::filesystem::path& path, bool tagged) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sentence file '" + path.string() + "'");
  std::vector<Sentence> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (split_ws(line).empty()) continue;
    try {
      out.push_back(tagged ? parse_tagged_line(line) : parse_plain_line(line));
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    std::size_t len;
    char32_t cp;
    if (b0 < 0x80) {
      len = 1;
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    } else {
      throw std::invalid_argument("invalid UTF-8 lead byte at offset " + std::to_string(i));
    }
    if (i + len > s.size()) throw std::invalid_argument("truncated UTF-8 sequence");
    for (std::size_t k = 1; k < len; ++k) {
      const auto b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) throw std::invalid_argument("invalid UTF-8 continuation byte");
      cp = (cp << 6) | (b & 0x3F);
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string encode_utf8(char32_t c) {
  std::string out;
  if (c < 0x80) {
    out += static_cast<char>(c);
  } else if (c < 0x800) {
    out += static_cast<char>(0xC0 | (c >> 6));
    out += static_cast<char>(0x80 | (c & 0x3F));
  } else if (c < 0x10000) {
    out += static_cast<char>(0xE0 | (c >> 12));
    out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (c & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (c >> 18));
    out += static_cast<char>(0x80 | ((c >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (c & 0x3F));
  }
  return out;
}

SymbolTable::SymbolTable() {
  for (const char* s : {"<pad>", "<unk>", "<start>", "<stop>"}) add(s);
}

SymbolTable::SymbolTable(std::vector<std::string> symbols) {
  if (symbols.size() < 4) throw std::invalid_argument("symbol table is missing reserved entries");
  for (auto& s : symbols) {
    if (ids_.count(s)) throw std::invalid_argument("duplicate symbol '" + s + "'");
    ids_.emplace(s, symbols_.size());
    symbols_.push_back(std::move(s));
  }
}

std::size_t SymbolTable::add(const std::string& s) {
  if (auto it = ids_.find(s); it != ids_.end()) return it->second;
  ids_.emplace(s, symbols_.size());
  symbols_.push_back(s);
  return symbols_.size() - 1;
}

std::size_t SymbolTable::id(const std::string& s) const {
  auto it = ids_.find(s);
  return it == ids_.end() ? unknown : it->second;
}

Vocabulary Vocabulary::from_trees(std::span<const Tree> trees) {
  Vocabulary v;
  for (const auto& t : trees)
    for (const auto& tw : leaves(t)) {
      v.words.add(tw.word);
      v.tags.add(tw.tag);
      for (char32_t c : decode_utf8(tw.word)) v.chars.add(encode_utf8(c));
    }
  return v;
}

std::vector<std::size_t> Vocabulary::char_ids(std::string_view word) const {
  std::vector<std::size_t> ids;
  for (char32_t c : decode_utf8(word)) ids.push_back(chars.id(encode_utf8(c)));
  return ids;
}

}  // namespace sapar
