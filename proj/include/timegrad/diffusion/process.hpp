// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "timegrad/diffusion/schedule.hpp"
#include "timegrad/num/rng.hpp"
#include "timegrad/num/tensor.hpp"

namespace timegrad::diffusion {

/// The noise predictor eps_theta(x^n, h, n), batched over rows.
class EpsilonModel {
 public:
  virtual ~EpsilonModel() = default;
  /// xn (B,D), cond (B,H), one level per row -> (B,D).
  virtual num::Tensor predict(const num::Tensor& xn, const num::Tensor& cond,
                              std::span<const NoiseLevel> levels) const = 0;
  virtual std::size_t dimension() const = 0;
};

/// sqrt(alpha_bar_n) x0 + sqrt(1 - alpha_bar_n) eps
num::Tensor forward_marginal(const num::Tensor& x0, NoiseLevel n, const num::Tensor& eps,
                             const DiffusionSchedule& sched);
/// Row-wise variant for (B,D) inputs with one level per row.
num::Tensor forward_marginal(const num::Tensor& x0, std::span<const NoiseLevel> levels,
                             const num::Tensor& eps, const DiffusionSchedule& sched);

/// One draw of q(x^n | x^{n-1}) = N(sqrt(1 - beta_n) x_prev, beta_n I).
num::Tensor forward_step(const num::Tensor& x_prev, NoiseLevel n, num::RngStream& rng,
                         const DiffusionSchedule& sched);

/// Mean of q(x^{n-1} | x^n, x^0). Its variance is sched.tilde_beta(n).
num::Tensor posterior_mean(const num::Tensor& xn, const num::Tensor& x0, NoiseLevel n,
                           const DiffusionSchedule& sched);

/// Levels drawn independently and uniformly from {1..N}.
std::vector<NoiseLevel> draw_levels(num::RngStream& rng, std::size_t count,
                                    const DiffusionSchedule& sched);

/// Simplified epsilon-matching objective, averaged over every row and
/// component: mean((eps - eps_theta(x^n, h, n))^2) with eps drawn from `rng`.
/// x0 (B,D) is data (no gradient); cond (B,H) may carry gradient.
num::Tensor training_loss(const num::Tensor& x0, const num::Tensor& cond,
                          std::span<const NoiseLevel> levels, num::RngStream& rng,
                          const EpsilonModel& model, const DiffusionSchedule& sched);
num::Tensor training_loss(const num::Tensor& x0, const num::Tensor& cond, NoiseLevel n,
                          num::RngStream& rng, const EpsilonModel& model,
                          const DiffusionSchedule& sched);

/// x^{n-1} = (x^n - beta_n / sqrt(1 - alpha_bar_n) eps_theta) / sqrt(alpha_n)
///           + sqrt(tilde_beta_n) z
/// `z` must be (B,D) for n > 1. At n = 1 it may be left undefined; if given
/// it must be all zeros.
num::Tensor reverse_step(const num::Tensor& xn, const num::Tensor& cond, NoiseLevel n,
                         const num::Tensor& z, const EpsilonModel& model,
                         const DiffusionSchedule& sched);

/// Annealed Langevin sampling from x^N ~ N(0, I) down to x^0.
/// Row r of the result draws all of its noise from rngs[r], so rows are
/// independent of each other and of the batch size.
num::Tensor sample(const num::Tensor& cond, std::span<num::RngStream> rngs,
                   const EpsilonModel& model, const DiffusionSchedule& sched);
/// Single-row convenience: cond (1,H) or (H).
num::Tensor sample(const num::Tensor& cond, num::RngStream& rng, const EpsilonModel& model,
                   const DiffusionSchedule& sched);

}  // namespace timegrad::diffusion
