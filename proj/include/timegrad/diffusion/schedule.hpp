// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

namespace timegrad::diffusion {

/// Noise index n in [1, N]. Construction does not know N; schedules check it.
struct NoiseLevel {
  std::size_t value = 1;
  friend bool operator==(NoiseLevel, NoiseLevel) = default;
};

/// Precomputed variance schedule. All accessors are 1-indexed in n.
///
///   alpha_n     = 1 - beta_n
///   alpha_bar_n = prod_{i<=n} alpha_i, with alpha_bar_0 = 1
///   tilde_beta_n = (1 - alpha_bar_{n-1}) / (1 - alpha_bar_n) * beta_n
class DiffusionSchedule {
 public:
  /// betas equally spaced from beta_first to beta_last inclusive.
  static DiffusionSchedule linear(std::size_t levels, double beta_first, double beta_last);
  /// Arbitrary betas, each in (0, 1).
  static DiffusionSchedule from_betas(std::vector<double> betas);

  std::size_t levels() const noexcept { return betas_.size(); }

  double beta(NoiseLevel n) const;
  double alpha(NoiseLevel n) const;
  /// Accepts n = 0 (returns 1).
  double alpha_bar(std::size_t n) const;
  double alpha_bar(NoiseLevel n) const { return alpha_bar(check(n)); }
  double tilde_beta(NoiseLevel n) const;

  const std::vector<double>& betas() const noexcept { return betas_; }

  /// Throws ContractError unless 1 <= n <= N; returns n.value.
  std::size_t check(NoiseLevel n) const;

 private:
  explicit DiffusionSchedule(std::vector<double> betas);

  std::vector<double> betas_;
  std::vector<double> alphas_;
  std::vector<double> alpha_bars_;  // index 0 holds alpha_bar_0 = 1
  std::vector<double> tilde_betas_;
};

}  // namespace timegrad::diffusion
