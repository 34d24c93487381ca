// SPDX-License-Identifier: Apache-2.0
#include "timegrad/diffusion/process.hpp"

#include <cmath>
#include <string>

#include "timegrad/error.hpp"
#include "timegrad/num/ops.hpp"

namespace timegrad::diffusion {

using num::Tensor;

namespace {

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": incompatible shapes " + num::shape_str(a.shape()) +
                         " and " + num::shape_str(b.shape()));
  }
}

std::size_t rows_of(const char* op, const Tensor& t, std::size_t level_count) {
  if (t.rank() != 2 || t.dim(0) != level_count) {
    throw DimensionError(std::string(op) + ": expected (" + std::to_string(level_count) +
                         ",D) rows, got " + num::shape_str(t.shape()));
  }
  return t.dim(0);
}

std::string describe_levels(std::span<const NoiseLevel> levels) {
  std::string s;
  for (std::size_t i = 0; i < levels.size() && i < 8; ++i) {
    s += (i ? "," : "") + std::to_string(levels[i].value);
  }
  if (levels.size() > 8) s += ",...";
  return s;
}

}  // namespace

Tensor forward_marginal(const Tensor& x0, NoiseLevel n, const Tensor& eps,
                        const DiffusionSchedule& sched) {
  require_same_shape("forward_marginal", x0, eps);
  const double ab = sched.alpha_bar(n);
  const double a = std::sqrt(ab), b = std::sqrt(1.0 - ab);
  std::vector<double> out(x0.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * x0.at(i) + b * eps.at(i);
  return Tensor::from(x0.shape(), std::move(out));
}

Tensor forward_marginal(const Tensor& x0, std::span<const NoiseLevel> levels, const Tensor& eps,
                        const DiffusionSchedule& sched) {
  require_same_shape("forward_marginal", x0, eps);
  const std::size_t rows = rows_of("forward_marginal", x0, levels.size());
  const std::size_t width = x0.dim(1);
  std::vector<double> out(x0.numel());
  for (std::size_t r = 0; r < rows; ++r) {
    const double ab = sched.alpha_bar(levels[r]);
    const double a = std::sqrt(ab), b = std::sqrt(1.0 - ab);
    for (std::size_t d = 0; d < width; ++d) {
      const std::size_t i = r * width + d;
      out[i] = a * x0.at(i) + b * eps.at(i);
    }
  }
  return Tensor::from(x0.shape(), std::move(out));
}

Tensor forward_step(const Tensor& x_prev, NoiseLevel n, num::RngStream& rng,
                    const DiffusionSchedule& sched) {
  const double beta = sched.beta(n);
  const double keep = std::sqrt(1.0 - beta), spread = std::sqrt(beta);
  std::vector<double> noise(x_prev.numel());
  rng.fill_normal(noise);
  for (std::size_t i = 0; i < noise.size(); ++i) noise[i] = keep * x_prev.at(i) + spread * noise[i];
  return Tensor::from(x_prev.shape(), std::move(noise));
}

Tensor posterior_mean(const Tensor& xn, const Tensor& x0, NoiseLevel n,
                      const DiffusionSchedule& sched) {
  require_same_shape("posterior_mean", xn, x0);
  const std::size_t k = sched.check(n);
  const double ab = sched.alpha_bar(k), ab_prev = sched.alpha_bar(k - 1);
  const double beta = sched.beta(n), alpha = sched.alpha(n);
  const double c0 = std::sqrt(ab_prev) * beta / (1.0 - ab);
  const double cn = std::sqrt(alpha) * (1.0 - ab_prev) / (1.0 - ab);
  std::vector<double> out(xn.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = c0 * x0.at(i) + cn * xn.at(i);
  return Tensor::from(xn.shape(), std::move(out));
}

std::vector<NoiseLevel> draw_levels(num::RngStream& rng, std::size_t count,
                                    const DiffusionSchedule& sched) {
  std::vector<NoiseLevel> levels(count);
  for (auto& n : levels) n.value = 1 + static_cast<std::size_t>(rng.uniform_index(sched.levels()));
  return levels;
}

Tensor training_loss(const Tensor& x0, const Tensor& cond, std::span<const NoiseLevel> levels,
                     num::RngStream& rng, const EpsilonModel& model,
                     const DiffusionSchedule& sched) {
  rows_of("training_loss", x0, levels.size());
  for (NoiseLevel n : levels) sched.check(n);
  try {
    Tensor eps = num::gaussian_draw(rng, x0.shape());
    Tensor xn = forward_marginal(x0, levels, eps, sched);
    Tensor predicted = model.predict(xn, cond, levels);
    Tensor diff = num::sub(eps, predicted);
    return num::mean(num::mul(diff, diff));
  } catch (const NumericError& e) {
    throw NumericError(std::string(e.what()) + " in training loss at noise level(s) n=" +
                       describe_levels(levels));
  }
}

Tensor training_loss(const Tensor& x0, const Tensor& cond, NoiseLevel n, num::RngStream& rng,
                     const EpsilonModel& model, const DiffusionSchedule& sched) {
  std::vector<NoiseLevel> levels(x0.rank() == 2 ? x0.dim(0) : 1, n);
  if (x0.rank() == 1) {
    return training_loss(num::reshape(x0, {1, x0.dim(0)}), cond, levels, rng, model, sched);
  }
  return training_loss(x0, cond, levels, rng, model, sched);
}

Tensor reverse_step(const Tensor& xn, const Tensor& cond, NoiseLevel n, const Tensor& z,
                    const EpsilonModel& model, const DiffusionSchedule& sched) {
  const std::size_t k = sched.check(n);
  if (xn.rank() != 2) {
    throw DimensionError("reverse_step: expected (B,D) input, got " + num::shape_str(xn.shape()));
  }
  if (k > 1 && !z.defined()) throw ContractError("reverse_step: noise z required for n > 1");
  if (z.defined()) {
    require_same_shape("reverse_step", xn, z);
    if (k == 1) {
      for (double v : z.data()) {
        if (v != 0.0) throw ContractError("reverse_step: z must be zero at n = 1");
      }
    }
  }
  const std::vector<NoiseLevel> levels(xn.dim(0), n);
  const Tensor eps = model.predict(xn, cond, levels);
  require_same_shape("reverse_step", xn, eps);

  const double beta = sched.beta(n);
  const double inv_sqrt_alpha = 1.0 / std::sqrt(sched.alpha(n));
  const double eps_coef = beta / std::sqrt(1.0 - sched.alpha_bar(k));
  const double sigma = std::sqrt(sched.tilde_beta(n));
  std::vector<double> out(xn.numel());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = inv_sqrt_alpha * (xn.at(i) - eps_coef * eps.at(i));
    if (k > 1) out[i] += sigma * z.at(i);
  }
  try {
    return Tensor::from(xn.shape(), std::move(out));
  } catch (const NumericError&) {
    throw NumericError("reverse_step: non-finite sample at noise level n=" + std::to_string(k));
  }
}

Tensor sample(const Tensor& cond, std::span<num::RngStream> rngs, const EpsilonModel& model,
              const DiffusionSchedule& sched) {
  const std::size_t rows = rngs.size();
  if (cond.rank() != 2 || cond.dim(0) != rows) {
    throw DimensionError("sample: conditioning " + num::shape_str(cond.shape()) + " for " +
                         std::to_string(rows) + " streams");
  }
  const std::size_t width = model.dimension();
  std::vector<double> buf(rows * width);
  for (std::size_t r = 0; r < rows; ++r) {
    rngs[r].fill_normal(std::span<double>(buf).subspan(r * width, width));
  }
  Tensor x = Tensor::from({rows, width}, buf);
  for (std::size_t k = sched.levels(); k >= 1; --k) {
    Tensor z;
    if (k > 1) {
      for (std::size_t r = 0; r < rows; ++r) {
        rngs[r].fill_normal(std::span<double>(buf).subspan(r * width, width));
      }
      z = Tensor::from({rows, width}, buf);
    }
    x = reverse_step(x, cond, NoiseLevel{k}, z, model, sched);
  }
  return x;
}

Tensor sample(const Tensor& cond, num::RngStream& rng, const EpsilonModel& model,
              const DiffusionSchedule& sched) {
  const Tensor row = cond.rank() == 1 ? num::reshape(cond, {1, cond.dim(0)}) : cond;
  return sample(row, std::span<num::RngStream>(&rng, 1), model, sched);
}

}  // namespace timegrad::diffusion
