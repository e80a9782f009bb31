#include "sapar/binarize.hpp"

#include <stdexcept>

namespace sapar {

LabelInventory::LabelInventory() {
  names_.emplace_back(null_name);
  ids_.emplace(std::string(null_name), null_id);
}

namespace {

void collect_labels(const Tree& t, LabelInventory& inv) {
  if (t.is_leaf()) return;
  inv.add(t.label);
  for (const auto& c : t.children) collect_labels(c, inv);
}

}  // namespace

LabelInventory LabelInventory::from_trees(std::span<const Tree> collapsed) {
  LabelInventory inv;
  for (const auto& t : collapsed) collect_labels(t, inv);
  return inv;
}

LabelId LabelInventory::add(const std::string& label) {
  if (auto it = ids_.find(label); it != ids_.end()) return it->second;
  const auto id = static_cast<LabelId>(names_.size());
  names_.push_back(label);
  ids_.emplace(label, id);
  return id;
}

std::optional<LabelId> LabelInventory::find(const std::string& label) const {
  if (auto it = ids_.find(label); it != ids_.end()) return it->second;
  return std::nullopt;
}

LabelId LabelInventory::id(const std::string& label) const {
  if (auto found = find(label)) return *found;
  throw std::out_of_range("unknown label '" + label + "'");
}

const std::string& LabelInventory::name(LabelId id) const {
  if (id >= names_.size()) throw std::out_of_range("label id " + std::to_string(id) + " out of range");
  return names_[id];
}

std::size_t BinaryTree::node_count() const {
  std::size_t n = 1;
  for (const auto& c : children) n += c.node_count();
  return n;
}

namespace {

BinaryTree make_internal(LabelId label, BinaryTree left, BinaryTree right) {
  BinaryTree b;
  b.label = label;
  b.begin = left.begin;
  b.end = right.end;
  b.children.push_back(std::move(left));
  b.children.push_back(std::move(right));
  return b;
}

BinaryTree binarize_at(const Tree& t, const LabelInventory& labels, Binarization dir,
                       std::size_t& cursor) {
  if (t.is_leaf()) {
    BinaryTree b;
    b.begin = cursor;
    b.end = ++cursor;
    return b;
  }
  const LabelId label = labels.id(t.label);
  if (t.children.size() == 1) {
    // Only a preterminal can be a sole child after collapsing.
    BinaryTree b = binarize_at(t.children[0], labels, dir, cursor);
    b.label = label;
    return b;
  }
  std::vector<BinaryTree> kids;
  kids.reserve(t.children.size());
  for (const auto& c : t.children) kids.push_back(binarize_at(c, labels, dir, cursor));

  if (dir == Binarization::Right) {
    BinaryTree acc = std::move(kids.back());
    for (std::size_t k = kids.size() - 1; k-- > 1;)
      acc = make_internal(LabelInventory::null_id, std::move(kids[k]), std::move(acc));
    return make_internal(label, std::move(kids[0]), std::move(acc));
  }
  BinaryTree acc = std::move(kids.front());
  for (std::size_t k = 1; k + 1 < kids.size(); ++k)
    acc = make_internal(LabelInventory::null_id, std::move(acc), std::move(kids[k]));
  return make_internal(label, std::move(acc), std::move(kids.back()));
}

// Builds the unary chain named by a collapsed label over `children`.
Tree wrap_chain(const std::string& label, std::vector<Tree> children, std::string_view sep) {
  if (sep.empty()) throw std::invalid_argument("unary separator must not be empty");
  std::vector<std::string> chain;
  std::size_t start = 0;
  for (std::size_t at; (at = label.find(sep, start)) != std::string::npos; start = at + sep.size())
    chain.push_back(label.substr(start, at - start));
  chain.push_back(label.substr(start));
  Tree t = Tree::node(chain.back(), std::move(children));
  for (auto it = chain.rbegin() + 1; it != chain.rend(); ++it)
    t = Tree::node(*it, std::vector<Tree>{std::move(t)});
  return t;
}

std::vector<Tree> debinarize_at(const BinaryTree& b, const LabelInventory& labels,
                                std::span<const TaggedWord> words, std::string_view sep) {
  std::vector<Tree> kids;
  if (b.is_leaf()) {
    if (b.end != b.begin + 1) throw std::invalid_argument("binary leaf spans more than one word");
    if (b.begin >= words.size()) throw std::invalid_argument("binary tree longer than the sentence");
    kids.push_back(Tree::leaf(words[b.begin].tag, words[b.begin].word));
  } else {
    for (const auto& c : b.children) {
      auto sub = debinarize_at(c, labels, words, sep);
      for (auto& s : sub) kids.push_back(std::move(s));
    }
  }
  if (b.label == LabelInventory::null_id) return kids;
  std::vector<Tree> out;
  out.push_back(wrap_chain(labels.name(b.label), std::move(kids), sep));
  return out;
}

void collect_spans(const BinaryTree& b, std::vector<LabeledSpan>& out) {
  out.push_back({b.begin, b.end, b.label});
  for (const auto& c : b.children) collect_spans(c, out);
}

}  // namespace

BinaryTree binarize(const Tree& collapsed, const LabelInventory& labels, Binarization direction) {
  std::size_t cursor = 0;
  return binarize_at(collapsed, labels, direction, cursor);
}

Tree debinarize(const BinaryTree& b, const LabelInventory& labels,
                std::span<const TaggedWord> words, std::string_view separator) {
  if (b.label == LabelInventory::null_id)
    throw std::invalid_argument("cannot debinarize a tree whose root has the dummy label");
  if (b.begin != 0 || b.end != words.size())
    throw std::invalid_argument("binary tree span does not cover the sentence");
  auto out = debinarize_at(b, labels, words, separator);
  return std::move(out.front());
}

std::vector<LabeledSpan> gold_spans(const BinaryTree& b) {
  std::vector<LabeledSpan> out;
  collect_spans(b, out);
  return out;
}

void check_binary_tree(const BinaryTree& b, std::size_t n) {
  if (!(b.begin < b.end && b.end <= n)) throw std::invalid_argument("binary tree: invalid span");
  if (b.is_leaf()) {
    if (b.end - b.begin != 1) throw std::invalid_argument("binary tree: leaf wider than one word");
    return;
  }
  if (b.children.size() != 2) throw std::invalid_argument("binary tree: node without two children");
  const auto& l = b.children[0];
  const auto& r = b.children[1];
  if (l.begin != b.begin || l.end != r.begin || r.end != b.end)
    throw std::invalid_argument("binary tree: children do not partition the parent span");
  check_binary_tree(l, n);
  check_binary_tree(r, n);
}

}  // namespace sapar
