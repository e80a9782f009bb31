#include "sapar/tree.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace sapar {

Tree Tree::leaf(std::string tag, std::string word) {
  Tree t;
  t.label = std::move(tag);
  t.word = std::move(word);
  return t;
}

Tree Tree::node(std::string label, std::vector<Tree> children) {
  Tree t;
  t.label = std::move(label);
  t.children = std::move(children);
  return t;
}

const std::string& Tree::tag() const {
  if (!is_leaf()) throw std::logic_error("tag() called on internal node '" + label + "'");
  return label;
}

std::size_t Tree::num_leaves() const {
  if (is_leaf()) return 1;
  std::size_t n = 0;
  for (const auto& c : children) n += c.num_leaves();
  return n;
}

std::size_t Tree::depth() const {
  std::size_t d = 0;
  for (const auto& c : children) d = std::max(d, c.depth());
  return d + 1;
}

namespace {

void collect_leaves(const Tree& t, std::vector<TaggedWord>& out) {
  if (t.is_leaf()) {
    out.push_back({*t.word, t.label});
    return;
  }
  for (const auto& c : t.children) collect_leaves(c, out);
}

}  // namespace

std::vector<TaggedWord> leaves(const Tree& t) {
  std::vector<TaggedWord> out;
  collect_leaves(t, out);
  return out;
}

ParseError::ParseError(const std::string& what, std::size_t line_, std::size_t column_,
                       std::size_t offset_)
    : std::runtime_error("line " + std::to_string(line_) + ", column " + std::to_string(column_) +
                         ": " + what),
      line(line_),
      column(column_),
      offset(offset_) {}

namespace {

class BracketReader {
 public:
  explicit BracketReader(std::string_view text) : text_(text) {}

  std::vector<Tree> read_all() {
    std::vector<Tree> trees;
    skip_top_level();
    while (pos_ < text_.size()) {
      if (text_[pos_] != '(') fail("expected '(' at start of tree");
      Tree t = read_tree();
      if (t.label.empty() && !t.is_leaf() && t.children.size() == 1) t = std::move(t.children[0]);
      trees.push_back(std::move(t));
      skip_top_level();
    }
    return trees;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < pos_ && i < text_.size(); ++i) {
      if (text_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(what, line, col, pos_);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  // Between trees, '#' starts a comment running to the end of the line.
  void skip_top_level() {
    skip_space();
    while (pos_ < text_.size() && text_[pos_] == '#') {
      while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      skip_space();
    }
  }

  std::string read_token() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')' &&
           !std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  // Called with pos_ on '('.
  Tree read_tree() {
    ++pos_;
    skip_space();
    std::string label = read_token();
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input, missing ')'");
    if (text_[pos_] == ')') {
      if (label.empty()) fail("empty constituent");
      fail("constituent '" + label + "' has neither children nor a word");
    }
    if (text_[pos_] != '(') {
      std::string word = read_token();
      skip_space();
      if (pos_ >= text_.size()) fail("unexpected end of input, missing ')'");
      if (text_[pos_] == '(') fail("leaf '" + label + "' has children");
      if (text_[pos_] != ')') fail("leaf '" + label + "' has more than one word");
      ++pos_;
      if (label.empty()) fail("leaf with empty tag");
      return Tree::leaf(std::move(label), std::move(word));
    }
    std::vector<Tree> children;
    while (true) {
      skip_space();
      if (pos_ >= text_.size()) fail("unexpected end of input, missing ')'");
      if (text_[pos_] == ')') {
        ++pos_;
        break;
      }
      if (text_[pos_] != '(') fail("word '" + read_token() + "' mixed with constituents");
      children.push_back(read_tree());
    }
    return Tree::node(std::move(label), std::move(children));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void render(const Tree& t, std::string& out) {
  out += '(';
  out += t.label;
  if (t.is_leaf()) {
    out += ' ';
    out += *t.word;
  } else {
    for (const auto& c : t.children) {
      out += ' ';
      render(c, out);
    }
  }
  out += ')';
}

}  // namespace

std::vector<Tree> parse_bracketed(std::string_view text) { return BracketReader(text).read_all(); }

std::string render_bracketed(const Tree& t) {
  std::string out;
  render(t, out);
  return out;
}

std::vector<Tree> read_treebank(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open treebank '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_bracketed(ss.str());
}

void write_treebank(const std::filesystem::path& path, std::span<const Tree> trees) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write treebank '" + path.string() + "'");
  for (const auto& t : trees) out << render_bracketed(t) << '\n';
}

Tree collapse_unary(const Tree& t, std::string_view separator) {
  if (t.is_leaf()) return t;
  std::string label = t.label;
  const Tree* cur = &t;
  while (cur->children.size() == 1 && !cur->children[0].is_leaf()) {
    cur = &cur->children[0];
    label += separator;
    label += cur->label;
  }
  std::vector<Tree> children;
  children.reserve(cur->children.size());
  for (const auto& c : cur->children) children.push_back(collapse_unary(c, separator));
  return Tree::node(std::move(label), std::move(children));
}

namespace {

std::vector<std::string> split_label(const std::string& label, std::string_view separator) {
  if (separator.empty()) throw std::invalid_argument("unary separator must not be empty");
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t at = label.find(separator, start);
    if (at == std::string::npos) {
      parts.push_back(label.substr(start));
      return parts;
    }
    parts.push_back(label.substr(start, at - start));
    start = at + separator.size();
  }
}

}  // namespace

Tree expand_unary(const Tree& t, std::string_view separator) {
  if (t.is_leaf()) return t;
  std::vector<Tree> children;
  children.reserve(t.children.size());
  for (const auto& c : t.children) children.push_back(expand_unary(c, separator));
  const auto chain = split_label(t.label, separator);
  Tree inner = Tree::node(chain.back(), std::move(children));
  for (auto it = chain.rbegin() + 1; it != chain.rend(); ++it)
    inner = Tree::node(*it, std::vector<Tree>{std::move(inner)});
  return inner;
}

}  // namespace sapar
