// SPDX-License-Identifier: Apache-2.0
#include "timegrad/diffusion/schedule.hpp"

#include <cmath>
#include <string>

#include "timegrad/error.hpp"

namespace timegrad::diffusion {

DiffusionSchedule DiffusionSchedule::linear(std::size_t levels, double beta_first,
                                            double beta_last) {
  if (levels == 0) throw ConfigError("schedule: number of noise levels must be >= 1");
  if (!(beta_first > 0.0) || !(beta_first <= beta_last) || !(beta_last < 1.0)) {
    throw ConfigError("schedule: require 0 < beta_1 <= beta_N < 1, got beta_1=" +
                      std::to_string(beta_first) + " beta_N=" + std::to_string(beta_last));
  }
  std::vector<double> betas(levels);
  if (levels == 1) {
    betas[0] = beta_first;
  } else {
    const double step = (beta_last - beta_first) / static_cast<double>(levels - 1);
    for (std::size_t i = 0; i < levels; ++i) betas[i] = beta_first + step * static_cast<double>(i);
    betas.back() = beta_last;
  }
  return DiffusionSchedule(std::move(betas));
}

DiffusionSchedule DiffusionSchedule::from_betas(std::vector<double> betas) {
  if (betas.empty()) throw ConfigError("schedule: empty beta list");
  for (double b : betas) {
    if (!(b > 0.0 && b < 1.0)) {
      throw ConfigError("schedule: beta " + std::to_string(b) + " outside (0, 1)");
    }
  }
  return DiffusionSchedule(std::move(betas));
}

DiffusionSchedule::DiffusionSchedule(std::vector<double> betas) : betas_(std::move(betas)) {
  const std::size_t n = betas_.size();
  alphas_.resize(n);
  alpha_bars_.resize(n + 1);
  tilde_betas_.resize(n);
  alpha_bars_[0] = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    alphas_[i] = 1.0 - betas_[i];
    alpha_bars_[i + 1] = alpha_bars_[i] * alphas_[i];
    tilde_betas_[i] = (1.0 - alpha_bars_[i]) / (1.0 - alpha_bars_[i + 1]) * betas_[i];
  }
}

std::size_t DiffusionSchedule::check(NoiseLevel n) const {
  if (n.value < 1 || n.value > betas_.size()) {
    throw ContractError("noise level " + std::to_string(n.value) + " outside [1, " +
                        std::to_string(betas_.size()) + "]");
  }
  return n.value;
}

double DiffusionSchedule::beta(NoiseLevel n) const { return betas_[check(n) - 1]; }
double DiffusionSchedule::alpha(NoiseLevel n) const { return alphas_[check(n) - 1]; }
double DiffusionSchedule::tilde_beta(NoiseLevel n) const { return tilde_betas_[check(n) - 1]; }

double DiffusionSchedule::alpha_bar(std::size_t n) const {
  if (n > betas_.size()) {
    throw ContractError("alpha_bar: index " + std::to_string(n) + " beyond N=" +
                        std::to_string(betas_.size()));
  }
  return alpha_bars_[n];
}

}  // namespace timegrad::diffusion
