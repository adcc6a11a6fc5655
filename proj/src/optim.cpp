#include "vitret/optim.hpp"

#include <cmath>

namespace vitret {

Tensor& ParamSet::add(const std::string& name, Tensor value) {
  if (index_.count(name)) throw ValueError("duplicate parameter name '" + name + "'");
  value.set_requires_grad(true);
  items_.push_back(std::make_unique<Tensor>(std::move(value)));
  names_.push_back(name);
  index_[name] = items_.size() - 1;
  return *items_.back();
}

Tensor& ParamSet::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ValueError("no parameter named '" + name + "'");
  return *items_[it->second];
}

const Tensor& ParamSet::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ValueError("no parameter named '" + name + "'");
  return *items_[it->second];
}

bool ParamSet::has(const std::string& name) const { return index_.count(name) > 0; }

std::size_t ParamSet::value_count() const {
  std::size_t n = 0;
  for (const auto& t : items_) n += t->size();
  return n;
}

std::size_t param_value_count(const std::vector<Tensor*>& params) {
  std::size_t n = 0;
  for (const Tensor* t : params) n += t->size();
  return n;
}

Adam::Adam(double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  if (lr < 0.0) throw ValueError("adam: learning rate must be nonnegative");
}

void Adam::step(ParamSet& params, const GradMap& grads) {
  std::vector<Tensor*> ptrs;
  ptrs.reserve(params.count());
  for (std::size_t i = 0; i < params.count(); ++i) ptrs.push_back(&params.at(i));
  step(ptrs, grads);
}

void Adam::step(const std::vector<Tensor*>& params, const GradMap& grads) {
  if (m_.empty()) {
    m_.resize(params.size());
    v_.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i].assign(params[i]->size(), 0.0);
      v_[i].assign(params[i]->size(), 0.0);
    }
  }
  if (m_.size() != params.size()) {
    throw ValueError("adam: parameter count changed between steps");
  }

  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));

  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    const Tensor g = grad_for(grads, p);
    if (g.shape() != p.shape()) {
      throw ShapeError("adam: gradient shape " + shape_str(g.shape()) +
                       " does not match parameter " + shape_str(p.shape()));
    }
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = beta1_ * m[j] + (1.0 - beta1_) * g[j];
      v[j] = beta2_ * v[j] + (1.0 - beta2_) * g[j] * g[j];
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      p[j] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

}  // namespace vitret
