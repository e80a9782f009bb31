#pragma once

// Reverse-mode automatic differentiation over dense row-major matrices.
//
// Every tensor is two-dimensional (a vector is a 1 x n row, a scalar is
// 1 x 1).  Operations record a closure on the result node; calling
// backward() on a scalar walks the graph in reverse topological order and
// accumulates gradients into every node that requires them.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sapar {

using Rng = std::mt19937_64;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace ad {

struct Node {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> value;
  std::vector<double> grad;  // empty until something is accumulated
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;  // pushes this->grad into parents

  void ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
  }
};

class Tensor {
 public:
  Tensor() = default;

  static Tensor constant(std::size_t rows, std::size_t cols, std::vector<double> values);
  static Tensor zeros(std::size_t rows, std::size_t cols);
  static Tensor scalar(double v);
  /// A leaf that collects gradients (parameters, or inputs under test).
  static Tensor variable(std::size_t rows, std::size_t cols, std::vector<double> values);

  bool defined() const { return node_ != nullptr; }
  std::size_t rows() const { return node_->rows; }
  std::size_t cols() const { return node_->cols; }
  std::size_t size() const { return node_->value.size(); }
  std::vector<std::size_t> shape() const { return {rows(), cols()}; }

  const std::vector<double>& values() const { return node_->value; }
  std::vector<double>& mutable_values() { return node_->value; }
  double at(std::size_t r, std::size_t c) const { return node_->value[r * cols() + c]; }
  double item() const;

  bool requires_grad() const { return node_->requires_grad; }
  /// Gradient buffer; zeros if nothing has been accumulated yet.
  const std::vector<double>& grad() const;
  std::vector<double>& mutable_grad();
  void zero_grad() { node_->grad.clear(); }

  /// Backpropagates from this 1x1 tensor. Leaf gradients accumulate across
  /// calls; intermediate gradients are recomputed each call.
  void backward() const;

  Node* node() const { return node_.get(); }
  const std::shared_ptr<Node>& node_ptr() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<Node> n) : node_(std::move(n)) {}
  friend Tensor make_result(std::size_t, std::size_t, std::vector<double>,
                            std::vector<Tensor>, std::function<void(Node&)>);
  std::shared_ptr<Node> node_;
};

/// Internal: builds an op result, attaching the closure only when gradient
/// tracking is on and some input requires it.
Tensor make_result(std::size_t rows, std::size_t cols, std::vector<double> value,
                   std::vector<Tensor> inputs, std::function<void(Node&)> backward);

/// Disables graph recording on the current thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};
bool grad_enabled();

// Linear algebra
Tensor matmul(const Tensor& a, const Tensor& b);
/// a * b^T
Tensor matmul_nt(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

// Elementwise
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
/// a [r x c] + row [1 x c] added to every row.
Tensor add_row(const Tensor& a, const Tensor& row);
Tensor scale(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double s);
Tensor relu(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor tanh(const Tensor& a);

// Structure
Tensor concat_cols(std::span<const Tensor> parts);
Tensor concat_rows(std::span<const Tensor> parts);
Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end);
Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end);
Tensor gather_rows(const Tensor& a, std::span<const std::size_t> rows);
Tensor gather_cols(const Tensor& a, std::span<const std::size_t> cols);
Tensor reshape(const Tensor& a, std::size_t rows, std::size_t cols);
/// Embedding lookup: rows of `table` selected by id.
inline Tensor embedding_lookup(const Tensor& table, std::span<const std::size_t> ids) {
  return gather_rows(table, ids);
}

// Normalisation
Tensor softmax_rows(const Tensor& a);
Tensor layer_norm_rows(const Tensor& a, const Tensor& gain, const Tensor& bias,
                       double eps = 1e-5);

// Stochastic regularisation. Inverted scaling, identity when !train or p == 0.
Tensor dropout(const Tensor& a, double p, bool train, Rng& rng);
/// Zeroes entire rows with probability p.
Tensor dropout_rows(const Tensor& a, double p, bool train, Rng& rng);

// Reductions
Tensor sum(const Tensor& a);
/// Sum of the selected (row, col) entries; repeated entries count repeatedly.
Tensor pick_sum(const Tensor& a, std::span<const std::pair<std::size_t, std::size_t>> entries);

}  // namespace ad
}  // namespace sapar
