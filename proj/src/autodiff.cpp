#include "sapar/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

namespace sapar::ad {

namespace {

thread_local bool g_grad_enabled = true;

std::string shape_str(const Tensor& t) {
  std::ostringstream os;
  os << "[" << t.rows() << " x " << t.cols() << "]";
  return os.str();
}

[[noreturn]] void dim_error(const char* op, const Tensor& a, const Tensor& b) {
  throw DimensionError(std::string(op) + ": incompatible shapes " + shape_str(a) + " and " +
                       shape_str(b));
}

[[noreturn]] void dim_error(const char* op, const Tensor& a, const std::string& why) {
  throw DimensionError(std::string(op) + ": " + why + " (shape " + shape_str(a) + ")");
}

void require_defined(const char* op, const Tensor& t) {
  if (!t.defined()) throw std::invalid_argument(std::string(op) + ": undefined tensor");
}

}  // namespace

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }
bool grad_enabled() { return g_grad_enabled; }

Tensor Tensor::constant(std::size_t rows, std::size_t cols, std::vector<double> values) {
  if (values.size() != rows * cols) {
    throw DimensionError("constant: " + std::to_string(values.size()) +
                         " values for shape [" + std::to_string(rows) + " x " +
                         std::to_string(cols) + "]");
  }
  auto n = std::make_shared<Node>();
  n->rows = rows;
  n->cols = cols;
  n->value = std::move(values);
  return Tensor(std::move(n));
}

Tensor Tensor::zeros(std::size_t rows, std::size_t cols) {
  return constant(rows, cols, std::vector<double>(rows * cols, 0.0));
}

Tensor Tensor::scalar(double v) { return constant(1, 1, {v}); }

Tensor Tensor::variable(std::size_t rows, std::size_t cols, std::vector<double> values) {
  Tensor t = constant(rows, cols, std::move(values));
  t.node_->requires_grad = true;
  return t;
}

double Tensor::item() const {
  if (size() != 1) throw DimensionError("item: tensor is not a scalar (shape " + shape_str(*this) + ")");
  return node_->value[0];
}

const std::vector<double>& Tensor::grad() const {
  node_->ensure_grad();
  return node_->grad;
}

std::vector<double>& Tensor::mutable_grad() {
  node_->ensure_grad();
  return node_->grad;
}

void Tensor::backward() const {
  if (size() != 1) throw DimensionError("backward: loss must be a scalar, got " + shape_str(*this));
  if (!node_->requires_grad) return;

  // Iterative post-order DFS gives a topological order (parents first).
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{node_.get(), 0}};
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      Node* p = n->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  // Leaves collect this call's gradient separately and add it to what they
  // held before, so repeated calls accumulate exactly.
  std::vector<std::pair<Node*, std::vector<double>>> held;
  for (Node* n : order) {
    if (n->backward) {
      n->grad.assign(n->value.size(), 0.0);
    } else {
      held.emplace_back(n, std::move(n->grad));
      n->grad.assign(n->value.size(), 0.0);
    }
  }
  node_->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backward) (*it)->backward(**it);
  }
  for (auto& [n, before] : held) {
    if (before.size() != n->grad.size()) continue;
    for (std::size_t k = 0; k < before.size(); ++k) n->grad[k] += before[k];
  }
}

Tensor make_result(std::size_t rows, std::size_t cols, std::vector<double> value,
                   std::vector<Tensor> inputs, std::function<void(Node&)> backward) {
  auto n = std::make_shared<Node>();
  n->rows = rows;
  n->cols = cols;
  n->value = std::move(value);
  if (g_grad_enabled) {
    bool any = std::any_of(inputs.begin(), inputs.end(),
                           [](const Tensor& t) { return t.requires_grad(); });
    if (any) {
      n->requires_grad = true;
      n->parents.reserve(inputs.size());
      for (auto& t : inputs) n->parents.push_back(t.node_ptr());
      n->backward = std::move(backward);
    }
  }
  return Tensor(std::move(n));
}

namespace {

// Gradient sink for an input: null when the input does not track gradients.
double* grad_of(Node* p) {
  if (!p->requires_grad) return nullptr;
  p->ensure_grad();
  return p->grad.data();
}

void gemm_acc(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
              std::size_t n) {
  // c[m x n] += a[m x k] * b[k x n]
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    const double* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_defined("matmul", a);
  require_defined("matmul", b);
  if (a.cols() != b.rows()) dim_error("matmul", a, b);
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  std::vector<double> out(m * n, 0.0);
  gemm_acc(a.values().data(), b.values().data(), out.data(), m, k, n);
  return make_result(m, n, std::move(out), {a, b}, [m, k, n](Node& self) {
    Node* pa = self.parents[0].get();
    Node* pb = self.parents[1].get();
    const double* g = self.grad.data();
    if (double* ga = grad_of(pa)) {
      // ga[m x k] += g[m x n] * b^T
      const double* bv = pb->value.data();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j] * bv[p * n + j];
          ga[i * k + p] += acc;
        }
    }
    if (double* gb = grad_of(pb)) {
      // gb[k x n] += a^T * g
      const double* av = pa->value.data();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          const double x = av[i * k + p];
          if (x == 0.0) continue;
          for (std::size_t j = 0; j < n; ++j) gb[p * n + j] += x * g[i * n + j];
        }
    }
  });
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  require_defined("matmul_nt", a);
  require_defined("matmul_nt", b);
  if (a.cols() != b.cols()) dim_error("matmul_nt", a, b);
  const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
  std::vector<double> out(m * n, 0.0);
  const double* av = a.values().data();
  const double* bv = b.values().data();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += av[i * k + p] * bv[j * k + p];
      out[i * n + j] = acc;
    }
  return make_result(m, n, std::move(out), {a, b}, [m, k, n](Node& self) {
    Node* pa = self.parents[0].get();
    Node* pb = self.parents[1].get();
    const double* g = self.grad.data();
    if (double* ga = grad_of(pa)) gemm_acc(g, pb->value.data(), ga, m, n, k);
    if (double* gb = grad_of(pb)) {
      const double* av = pa->value.data();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          const double gij = g[i * n + j];
          if (gij == 0.0) continue;
          for (std::size_t p = 0; p < k; ++p) gb[j * k + p] += gij * av[i * k + p];
        }
    }
  });
}

Tensor transpose(const Tensor& a) {
  require_defined("transpose", a);
  const std::size_t r = a.rows(), c = a.cols();
  std::vector<double> out(r * c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = a.values()[i * c + j];
  return make_result(c, r, std::move(out), {a}, [r, c](Node& self) {
    if (double* ga = grad_of(self.parents[0].get()))
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) ga[i * c + j] += self.grad[j * r + i];
  });
}

namespace {

template <typename F, typename DA, typename DB>
Tensor binary_elementwise(const char* op, const Tensor& a, const Tensor& b, F f, DA da, DB db) {
  require_defined(op, a);
  require_defined(op, b);
  if (a.rows() != b.rows() || a.cols() != b.cols()) dim_error(op, a, b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(a.values()[i], b.values()[i]);
  return make_result(a.rows(), a.cols(), std::move(out), {a, b}, [da, db](Node& self) {
    Node* pa = self.parents[0].get();
    Node* pb = self.parents[1].get();
    double* ga = grad_of(pa);
    double* gb = grad_of(pb);
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      const double g = self.grad[i];
      if (ga) ga[i] += g * da(pa->value[i], pb->value[i]);
      if (gb) gb[i] += g * db(pa->value[i], pb->value[i]);
    }
  });
}

template <typename F, typename D>
Tensor unary_elementwise(const char* op, const Tensor& a, F f, D d) {
  require_defined(op, a);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(a.values()[i]);
  return make_result(a.rows(), a.cols(), std::move(out), {a}, [d](Node& self) {
    Node* pa = self.parents[0].get();
    if (double* ga = grad_of(pa))
      for (std::size_t i = 0; i < self.grad.size(); ++i)
        ga[i] += self.grad[i] * d(pa->value[i], self.value[i]);
  });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return binary_elementwise(
      "add", a, b, [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
      [](double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary_elementwise(
      "sub", a, b, [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
      [](double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary_elementwise(
      "mul", a, b, [](double x, double y) { return x * y; }, [](double, double y) { return y; },
      [](double x, double) { return x; });
}

Tensor add_row(const Tensor& a, const Tensor& row) {
  require_defined("add_row", a);
  require_defined("add_row", row);
  if (row.rows() != 1 || row.cols() != a.cols()) dim_error("add_row", a, row);
  const std::size_t r = a.rows(), c = a.cols();
  std::vector<double> out(a.values());
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] += row.values()[j];
  return make_result(r, c, std::move(out), {a, row}, [r, c](Node& self) {
    if (double* ga = grad_of(self.parents[0].get()))
      for (std::size_t i = 0; i < r * c; ++i) ga[i] += self.grad[i];
    if (double* gb = grad_of(self.parents[1].get()))
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) gb[j] += self.grad[i * c + j];
  });
}

Tensor scale(const Tensor& a, double s) {
  return unary_elementwise(
      "scale", a, [s](double x) { return x * s; }, [s](double, double) { return s; });
}

Tensor add_scalar(const Tensor& a, double s) {
  return unary_elementwise(
      "add_scalar", a, [s](double x) { return x + s; }, [](double, double) { return 1.0; });
}

Tensor relu(const Tensor& a) {
  return unary_elementwise(
      "relu", a, [](double x) { return x > 0.0 || std::isnan(x) ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor sigmoid(const Tensor& a) {
  return unary_elementwise(
      "sigmoid", a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& a) {
  return unary_elementwise(
      "tanh", a, [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no inputs");
  const std::size_t r = parts[0].rows();
  std::vector<std::size_t> offsets;
  std::size_t total = 0;
  for (const auto& p : parts) {
    require_defined("concat_cols", p);
    if (p.rows() != r) dim_error("concat_cols", parts[0], p);
    offsets.push_back(total);
    total += p.cols();
  }
  std::vector<double> out(r * total);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const std::size_t c = parts[k].cols();
    for (std::size_t i = 0; i < r; ++i)
      std::copy_n(parts[k].values().data() + i * c, c, out.data() + i * total + offsets[k]);
  }
  return make_result(r, total, std::move(out), {parts.begin(), parts.end()},
                     [r, total, offsets](Node& self) {
                       for (std::size_t k = 0; k < self.parents.size(); ++k) {
                         Node* p = self.parents[k].get();
                         double* g = grad_of(p);
                         if (!g) continue;
                         const std::size_t c = p->cols;
                         for (std::size_t i = 0; i < r; ++i)
                           for (std::size_t j = 0; j < c; ++j)
                             g[i * c + j] += self.grad[i * total + offsets[k] + j];
                       }
                     });
}

Tensor concat_rows(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no inputs");
  const std::size_t c = parts[0].cols();
  std::vector<std::size_t> offsets;
  std::size_t total = 0;
  for (const auto& p : parts) {
    require_defined("concat_rows", p);
    if (p.cols() != c) dim_error("concat_rows", parts[0], p);
    offsets.push_back(total);
    total += p.rows();
  }
  std::vector<double> out;
  out.reserve(total * c);
  for (const auto& p : parts) out.insert(out.end(), p.values().begin(), p.values().end());
  return make_result(total, c, std::move(out), {parts.begin(), parts.end()},
                     [c, offsets](Node& self) {
                       for (std::size_t k = 0; k < self.parents.size(); ++k) {
                         Node* p = self.parents[k].get();
                         double* g = grad_of(p);
                         if (!g) continue;
                         const double* src = self.grad.data() + offsets[k] * c;
                         for (std::size_t i = 0; i < p->value.size(); ++i) g[i] += src[i];
                       }
                     });
}

Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end) {
  require_defined("slice_cols", a);
  if (begin > end || end > a.cols())
    dim_error("slice_cols", a, "column range [" + std::to_string(begin) + ", " +
                                   std::to_string(end) + ") out of bounds");
  const std::size_t r = a.rows(), c = a.cols(), w = end - begin;
  std::vector<double> out(r * w);
  for (std::size_t i = 0; i < r; ++i)
    std::copy_n(a.values().data() + i * c + begin, w, out.data() + i * w);
  return make_result(r, w, std::move(out), {a}, [r, c, w, begin](Node& self) {
    if (double* g = grad_of(self.parents[0].get()))
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < w; ++j) g[i * c + begin + j] += self.grad[i * w + j];
  });
}

Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end) {
  require_defined("slice_rows", a);
  if (begin > end || end > a.rows())
    dim_error("slice_rows", a, "row range [" + std::to_string(begin) + ", " +
                                   std::to_string(end) + ") out of bounds");
  const std::size_t c = a.cols();
  std::vector<double> out(a.values().begin() + static_cast<std::ptrdiff_t>(begin * c),
                          a.values().begin() + static_cast<std::ptrdiff_t>(end * c));
  return make_result(end - begin, c, std::move(out), {a}, [begin, c](Node& self) {
    if (double* g = grad_of(self.parents[0].get()))
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[begin * c + i] += self.grad[i];
  });
}

Tensor gather_rows(const Tensor& a, std::span<const std::size_t> rows) {
  require_defined("gather_rows", a);
  const std::size_t c = a.cols();
  std::vector<double> out(rows.size() * c);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= a.rows())
      dim_error("gather_rows", a, "row index " + std::to_string(rows[i]) + " out of bounds");
    std::copy_n(a.values().data() + rows[i] * c, c, out.data() + i * c);
  }
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  return make_result(rows.size(), c, std::move(out), {a}, [idx, c](Node& self) {
    if (double* g = grad_of(self.parents[0].get()))
      for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < c; ++j) g[idx[i] * c + j] += self.grad[i * c + j];
  });
}

Tensor gather_cols(const Tensor& a, std::span<const std::size_t> cols) {
  require_defined("gather_cols", a);
  const std::size_t r = a.rows(), c = a.cols(), w = cols.size();
  for (std::size_t j : cols)
    if (j >= c) dim_error("gather_cols", a, "column index " + std::to_string(j) + " out of bounds");
  std::vector<double> out(r * w);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < w; ++j) out[i * w + j] = a.values()[i * c + cols[j]];
  std::vector<std::size_t> idx(cols.begin(), cols.end());
  return make_result(r, w, std::move(out), {a}, [idx, r, c, w](Node& self) {
    if (double* g = grad_of(self.parents[0].get()))
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < w; ++j) g[i * c + idx[j]] += self.grad[i * w + j];
  });
}

Tensor reshape(const Tensor& a, std::size_t rows, std::size_t cols) {
  require_defined("reshape", a);
  if (rows * cols != a.size())
    dim_error("reshape", a, "cannot view as [" + std::to_string(rows) + " x " +
                                std::to_string(cols) + "]");
  return make_result(rows, cols, a.values(), {a}, [](Node& self) {
    if (double* g = grad_of(self.parents[0].get()))
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
  });
}

Tensor softmax_rows(const Tensor& a) {
  require_defined("softmax_rows", a);
  const std::size_t r = a.rows(), c = a.cols();
  if (c == 0) dim_error("softmax_rows", a, "empty rows");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < r; ++i) {
    const double* x = a.values().data() + i * c;
    double* y = out.data() + i * c;
    const double mx = *std::max_element(x, x + c);
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) z += (y[j] = std::exp(x[j] - mx));
    for (std::size_t j = 0; j < c; ++j) y[j] /= z;
  }
  return make_result(r, c, std::move(out), {a}, [r, c](Node& self) {
    double* g = grad_of(self.parents[0].get());
    if (!g) return;
    for (std::size_t i = 0; i < r; ++i) {
      const double* y = self.value.data() + i * c;
      const double* gy = self.grad.data() + i * c;
      double dot = 0.0;
      for (std::size_t j = 0; j < c; ++j) dot += gy[j] * y[j];
      for (std::size_t j = 0; j < c; ++j) g[i * c + j] += y[j] * (gy[j] - dot);
    }
  });
}

Tensor layer_norm_rows(const Tensor& a, const Tensor& gain, const Tensor& bias, double eps) {
  require_defined("layer_norm", a);
  const std::size_t r = a.rows(), c = a.cols();
  if (gain.rows() != 1 || gain.cols() != c) dim_error("layer_norm", a, gain);
  if (bias.rows() != 1 || bias.cols() != c) dim_error("layer_norm", a, bias);
  std::vector<double> normed(a.size());
  std::vector<double> inv_std(r);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < r; ++i) {
    const double* x = a.values().data() + i * c;
    double mean = 0.0;
    for (std::size_t j = 0; j < c; ++j) mean += x[j];
    mean /= static_cast<double>(c);
    double var = 0.0;
    for (std::size_t j = 0; j < c; ++j) var += (x[j] - mean) * (x[j] - mean);
    var /= static_cast<double>(c);
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < c; ++j) {
      normed[i * c + j] = (x[j] - mean) * inv_std[i];
      out[i * c + j] = normed[i * c + j] * gain.values()[j] + bias.values()[j];
    }
  }
  return make_result(r, c, std::move(out), {a, gain, bias},
                     [r, c, normed = std::move(normed), inv_std = std::move(inv_std)](Node& self) {
                       Node* px = self.parents[0].get();
                       Node* pg = self.parents[1].get();
                       double* gx = grad_of(px);
                       double* gg = grad_of(pg);
                       double* gb = grad_of(self.parents[2].get());
                       const double n = static_cast<double>(c);
                       std::vector<double> dn(c);
                       for (std::size_t i = 0; i < r; ++i) {
                         const double* gy = self.grad.data() + i * c;
                         const double* xh = normed.data() + i * c;
                         double mean_dn = 0.0, mean_dn_xh = 0.0;
                         for (std::size_t j = 0; j < c; ++j) {
                           if (gg) gg[j] += gy[j] * xh[j];
                           if (gb) gb[j] += gy[j];
                           dn[j] = gy[j] * pg->value[j];
                           mean_dn += dn[j];
                           mean_dn_xh += dn[j] * xh[j];
                         }
                         if (!gx) continue;
                         mean_dn /= n;
                         mean_dn_xh /= n;
                         for (std::size_t j = 0; j < c; ++j)
                           gx[i * c + j] += inv_std[i] * (dn[j] - mean_dn - xh[j] * mean_dn_xh);
                       }
                     });
}

namespace {

Tensor apply_mask(const Tensor& a, std::vector<double> mask) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] * mask[i];
  return make_result(a.rows(), a.cols(), std::move(out), {a},
                     [mask = std::move(mask)](Node& self) {
                       if (double* g = grad_of(self.parents[0].get()))
                         for (std::size_t i = 0; i < mask.size(); ++i) g[i] += self.grad[i] * mask[i];
                     });
}

void check_probability(double p) {
  if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("dropout: probability must be in [0, 1)");
}

}  // namespace

Tensor dropout(const Tensor& a, double p, bool train, Rng& rng) {
  require_defined("dropout", a);
  check_probability(p);
  if (!train || p == 0.0) return a;
  std::bernoulli_distribution keep(1.0 - p);
  const double s = 1.0 / (1.0 - p);
  std::vector<double> mask(a.size());
  for (auto& m : mask) m = keep(rng) ? s : 0.0;
  return apply_mask(a, std::move(mask));
}

Tensor dropout_rows(const Tensor& a, double p, bool train, Rng& rng) {
  require_defined("dropout_rows", a);
  check_probability(p);
  if (!train || p == 0.0) return a;
  std::bernoulli_distribution keep(1.0 - p);
  const double s = 1.0 / (1.0 - p);
  std::vector<double> mask(a.size());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double m = keep(rng) ? s : 0.0;
    std::fill_n(mask.begin() + static_cast<std::ptrdiff_t>(i * a.cols()), a.cols(), m);
  }
  return apply_mask(a, std::move(mask));
}

Tensor sum(const Tensor& a) {
  require_defined("sum", a);
  double s = 0.0;
  for (double v : a.values()) s += v;
  return make_result(1, 1, {s}, {a}, [](Node& self) {
    Node* p = self.parents[0].get();
    if (double* g = grad_of(p))
      for (std::size_t i = 0; i < p->value.size(); ++i) g[i] += self.grad[0];
  });
}

Tensor pick_sum(const Tensor& a, std::span<const std::pair<std::size_t, std::size_t>> entries) {
  require_defined("pick_sum", a);
  double s = 0.0;
  std::vector<std::size_t> flat;
  flat.reserve(entries.size());
  for (auto [r, c] : entries) {
    if (r >= a.rows() || c >= a.cols())
      dim_error("pick_sum", a, "entry (" + std::to_string(r) + ", " + std::to_string(c) +
                                   ") out of bounds");
    flat.push_back(r * a.cols() + c);
    s += a.values()[flat.back()];
  }
  return make_result(1, 1, {s}, {a}, [flat = std::move(flat)](Node& self) {
    if (double* g = grad_of(self.parents[0].get()))
      for (std::size_t k : flat) g[k] += self.grad[0];
  });
}

}  // namespace sapar::ad
