#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sapar/tree.hpp"

namespace sapar {

using LabelId = std::uint32_t;

/// Bijection between (collapsed) constituent labels and dense ids. Id 0 is
/// the dummy label for nodes introduced by binarization.
class LabelInventory {
 public:
  static constexpr LabelId null_id = 0;
  static constexpr std::string_view null_name = "<null>";

  LabelInventory();

  /// Collects every internal label of the given unary-collapsed trees, in
  /// first-seen order.
  static LabelInventory from_trees(std::span<const Tree> collapsed);

  LabelId add(const std::string& label);
  LabelId id(const std::string& label) const;
  std::optional<LabelId> find(const std::string& label) const;
  const std::string& name(LabelId id) const;
  std::size_t size() const { return names_.size(); }
  /// All names, index == id (entry 0 is the dummy label).
  const std::vector<std::string>& names() const { return names_; }

  friend bool operator==(const LabelInventory& a, const LabelInventory& b) {
    return a.names_ == b.names_;
  }

 private:
  std::vector<std::string> names_;
  std::map<std::string, LabelId> ids_;
};

/// Binarized tree over fencepost spans [begin, end). Internal nodes have
/// exactly two children; width-1 spans are leaves.
struct BinaryTree {
  LabelId label = LabelInventory::null_id;
  std::size_t begin = 0;
  std::size_t end = 0;
  std::vector<BinaryTree> children;

  bool is_leaf() const { return children.empty(); }
  std::size_t node_count() const;

  friend bool operator==(const BinaryTree&, const BinaryTree&) = default;
};

struct LabeledSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  LabelId label = LabelInventory::null_id;
  friend auto operator<=>(const LabeledSpan&, const LabeledSpan&) = default;
};

enum class Binarization { Right, Left };

/// `collapsed` must already be unary-collapsed. A preterminal directly under
/// a multi-child node becomes a width-1 leaf with the dummy label; a
/// constituent whose only child is a preterminal labels that width-1 span.
BinaryTree binarize(const Tree& collapsed, const LabelInventory& labels,
                    Binarization direction = Binarization::Right);

/// Splices out dummy-labeled nodes and expands collapsed unary chains.
/// `words` supplies the preterminals, left to right.
Tree debinarize(const BinaryTree& b, const LabelInventory& labels,
                std::span<const TaggedWord> words,
                std::string_view separator = kUnarySeparator);

/// One triple per node, dummy-labeled nodes included, in pre-order.
std::vector<LabeledSpan> gold_spans(const BinaryTree& b);

/// Validates the structural invariants; throws std::invalid_argument.
void check_binary_tree(const BinaryTree& b, std::size_t sentence_length);

}  // namespace sapar
