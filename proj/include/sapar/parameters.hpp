#pragma once

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "sapar/autodiff.hpp"

namespace sapar {

enum class Init {
  GlorotUniform,   // U(-a, a), a = sqrt(6 / (fan_in + fan_out))
  Zeros,
  Ones,
  ScaledNormal,    // N(0, 1) / sqrt(cols), used for embedding tables
  Identity,        // square matrices only
};

struct Parameter {
  std::string name;
  ad::Tensor tensor;
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  long step = 0;
};

/// Owns every trainable tensor of a model, in registration order.
class ParameterStore {
 public:
  ad::Tensor add(const std::string& name, std::size_t rows, std::size_t cols, Init init, Rng& rng);

  const Parameter& get(const std::string& name) const;
  Parameter& get(const std::string& name);
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  std::vector<Parameter>& all() { return params_; }
  const std::vector<Parameter>& all() const { return params_; }

  /// Number of trainable scalars.
  std::size_t count() const;
  void zero_grad();

  /// Copies of every parameter value, in registration order.
  std::vector<std::vector<double>> snapshot() const;
  void restore(const std::vector<std::vector<double>>& values);

 private:
  std::vector<Parameter> params_;
  std::map<std::string, std::size_t> index_;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class NonFiniteGradient : public std::runtime_error {
 public:
  NonFiniteGradient(const std::string& param)
      : std::runtime_error("non-finite gradient in parameter '" + param + "'"), parameter(param) {}
  std::string parameter;
};

/// One bias-corrected Adam update over every parameter, then clears gradients.
/// Throws NonFiniteGradient without touching any parameter if a gradient
/// entry is NaN or infinite.
void adam_step(ParameterStore& params, double lr, const AdamConfig& config = {});

}  // namespace sapar
