// SPDX-License-Identifier: Apache-2.0
#include "timegrad/num/params.hpp"

#include <cmath>

#include "timegrad/error.hpp"

namespace timegrad::num {

Tensor ParameterSet::add(const std::string& name, Shape shape, std::vector<double> values) {
  if (contains(name)) throw ContractError("parameter '" + name + "' registered twice");
  Tensor t = Tensor::parameter(std::move(shape), std::move(values));
  index_.emplace(name, entries_.size());
  entries_.push_back(Entry{name, t, std::vector<double>(t.numel(), 0.0),
                           std::vector<double>(t.numel(), 0.0)});
  return t;
}

Tensor ParameterSet::add_uniform(const std::string& name, Shape shape, std::size_t fan_in,
                                 RngStream& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::vector<double> values(shape_numel(shape));
  for (double& v : values) v = (2.0 * rng.uniform() - 1.0) * bound;
  return add(name, std::move(shape), std::move(values));
}

Tensor ParameterSet::add_constant(const std::string& name, Shape shape, double value) {
  std::vector<double> values(shape_numel(shape), value);
  return add(name, std::move(shape), std::move(values));
}

const Tensor& ParameterSet::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractError("unknown parameter '" + name + "'");
  return entries_[it->second].value;
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.value.numel();
  return n;
}

void ParameterSet::zero_grads() {
  for (auto& e : entries_) e.value.zero_grad();
}

void ParameterSet::copy_values_from(const ParameterSet& other) {
  if (other.entries_.size() != entries_.size()) {
    throw ContractError("copy_values_from: parameter sets differ in size");
  }
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& src = other.entries_[i];
    auto& dst = entries_[i];
    if (src.name != dst.name || src.value.shape() != dst.value.shape()) {
      throw ContractError("copy_values_from: mismatch at '" + dst.name + "'");
    }
    auto out = dst.value.mutable_data();
    std::copy(src.value.data().begin(), src.value.data().end(), out.begin());
  }
}

void adam_step(ParameterSet& params, double learning_rate, const AdamOptions& options) {
  for (const auto& e : params.entries()) {
    if (!e.value.has_grad()) {
      throw ContractError("adam_step: parameter '" + e.name + "' has no gradient");
    }
  }
  const std::uint64_t t = params.step() + 1;
  const double correction1 = 1.0 - std::pow(options.beta1, static_cast<double>(t));
  const double correction2 = 1.0 - std::pow(options.beta2, static_cast<double>(t));
  for (auto& e : params.entries()) {
    auto values = e.value.mutable_data();
    auto grad = e.value.grad();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double g = grad[i];
      e.first_moment[i] = options.beta1 * e.first_moment[i] + (1.0 - options.beta1) * g;
      e.second_moment[i] = options.beta2 * e.second_moment[i] + (1.0 - options.beta2) * g * g;
      const double m_hat = e.first_moment[i] / correction1;
      const double v_hat = e.second_moment[i] / correction2;
      values[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + options.epsilon);
    }
    for (double v : values) {
      if (!std::isfinite(v)) throw NumericError("adam_step: parameter '" + e.name + "' diverged");
    }
  }
  params.set_step(t);
}

}  // namespace timegrad::num
