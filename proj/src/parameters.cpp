#include "sapar/parameters.hpp"

#include <cmath>

namespace sapar {

ad::Tensor ParameterStore::add(const std::string& name, std::size_t rows, std::size_t cols,
                               Init init, Rng& rng) {
  if (contains(name)) throw std::invalid_argument("duplicate parameter name '" + name + "'");
  std::vector<double> values(rows * cols, 0.0);
  switch (init) {
    case Init::GlorotUniform: {
      const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
      std::uniform_real_distribution<double> dist(-a, a);
      for (auto& v : values) v = dist(rng);
      break;
    }
    case Init::Zeros:
      break;
    case Init::Ones:
      std::fill(values.begin(), values.end(), 1.0);
      break;
    case Init::ScaledNormal: {
      std::normal_distribution<double> dist(0.0, 1.0 / std::sqrt(static_cast<double>(cols)));
      for (auto& v : values) v = dist(rng);
      break;
    }
    case Init::Identity:
      if (rows != cols) throw DimensionError("identity init requires a square matrix: " + name);
      for (std::size_t i = 0; i < rows; ++i) values[i * cols + i] = 1.0;
      break;
  }
  Parameter p;
  p.name = name;
  p.tensor = ad::Tensor::variable(rows, cols, std::move(values));
  p.first_moment.assign(rows * cols, 0.0);
  p.second_moment.assign(rows * cols, 0.0);
  index_[name] = params_.size();
  params_.push_back(std::move(p));
  return params_.back().tensor;
}

const Parameter& ParameterStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no parameter named '" + name + "'");
  return params_[it->second];
}

Parameter& ParameterStore::get(const std::string& name) {
  return const_cast<Parameter&>(static_cast<const ParameterStore&>(*this).get(name));
}

std::size_t ParameterStore::count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.tensor.size();
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) p.tensor.zero_grad();
}

std::vector<std::vector<double>> ParameterStore::snapshot() const {
  std::vector<std::vector<double>> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.tensor.values());
  return out;
}

void ParameterStore::restore(const std::vector<std::vector<double>>& values) {
  if (values.size() != params_.size()) throw std::invalid_argument("restore: parameter count mismatch");
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (values[i].size() != params_[i].tensor.size())
      throw DimensionError("restore: size mismatch for '" + params_[i].name + "'");
    params_[i].tensor.mutable_values() = values[i];
  }
}

void adam_step(ParameterStore& params, double lr, const AdamConfig& config) {
  for (auto& p : params.all()) {
    for (double g : p.tensor.grad())
      if (!std::isfinite(g)) throw NonFiniteGradient(p.name);
  }
  for (auto& p : params.all()) {
    ++p.step;
    const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(p.step));
    const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(p.step));
    auto& w = p.tensor.mutable_values();
    const auto& g = p.tensor.grad();
    for (std::size_t i = 0; i < w.size(); ++i) {
      p.first_moment[i] = config.beta1 * p.first_moment[i] + (1.0 - config.beta1) * g[i];
      p.second_moment[i] = config.beta2 * p.second_moment[i] + (1.0 - config.beta2) * g[i] * g[i];
      const double m_hat = p.first_moment[i] / c1;
      const double v_hat = p.second_moment[i] / c2;
      w[i] -= lr * m_hat / (std::sqrt(v_hat) + config.eps);
    }
    p.tensor.zero_grad();
  }
}

}  // namespace sapar
