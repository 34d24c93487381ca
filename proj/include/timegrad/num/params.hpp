// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "timegrad/num/rng.hpp"
#include "timegrad/num/tensor.hpp"

namespace timegrad::num {

/// Named trainable tensors plus their Adam state, in insertion order.
class ParameterSet {
 public:
  struct Entry {
    std::string name;
    Tensor value;
    std::vector<double> first_moment;
    std::vector<double> second_moment;
  };

  /// Registers a parameter; names must be unique.
  Tensor add(const std::string& name, Shape shape, std::vector<double> values);
  /// U(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialisation.
  Tensor add_uniform(const std::string& name, Shape shape, std::size_t fan_in, RngStream& rng);
  Tensor add_constant(const std::string& name, Shape shape, double value);

  const Tensor& get(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t scalar_count() const;

  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::vector<Entry>& entries() noexcept { return entries_; }

  std::uint64_t step() const noexcept { return step_; }
  void set_step(std::uint64_t step) noexcept { step_ = step; }

  void zero_grads();
  /// Overwrites parameter values in place (shapes must agree); Adam state untouched.
  void copy_values_from(const ParameterSet& other);

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
  std::uint64_t step_ = 0;
};

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// One bias-corrected Adam update. Every parameter must carry a gradient;
/// gradients are left in place for the caller to zero.
void adam_step(ParameterSet& params, double learning_rate, const AdamOptions& options = {});

}  // namespace timegrad::num
