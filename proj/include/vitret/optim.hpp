#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "vitret/tensor.hpp"

namespace vitret {

/// Named trainable tensors of one model. Order is the registration order and
/// is part of a model's serialized layout.
class ParamSet {
 public:
  /// Registers a tensor as trainable and returns a stable reference to the
  /// stored copy. Names must be unique.
  Tensor& add(const std::string& name, Tensor value);

  Tensor& get(const std::string& name);
  const Tensor& get(const std::string& name) const;
  bool has(const std::string& name) const;

  std::size_t count() const { return items_.size(); }
  std::size_t value_count() const;  // total scalar parameters

  const std::vector<std::string>& names() const { return names_; }
  Tensor& at(std::size_t i) { return *items_[i]; }
  const Tensor& at(std::size_t i) const { return *items_[i]; }

 private:
  // deque-like stability: tensors live in unique_ptrs so references returned
  // by add() survive later insertions
  std::vector<std::unique_ptr<Tensor>> items_;
  std::vector<std::string> names_;
  std::map<std::string, std::size_t> index_;
};

/// Total scalar values across a model's parameter list.
std::size_t param_value_count(const std::vector<Tensor*>& params);

/// Adam with bias correction. One optimizer instance per model; moments are
/// keyed by parameter index and created lazily at the first step.
class Adam {
 public:
  explicit Adam(double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8);

  /// Applies one update using the gradients recorded for each parameter's
  /// tape node; parameters without an entry are treated as zero-gradient.
  void step(ParamSet& params, const GradMap& grads);
  void step(const std::vector<Tensor*>& params, const GradMap& grads);

  std::size_t steps_taken() const { return t_; }
  double learning_rate() const { return lr_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  std::size_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace vitret
