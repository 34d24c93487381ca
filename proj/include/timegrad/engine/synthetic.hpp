// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

#include "timegrad/data/dataset.hpp"
#include "timegrad/metrics/crps.hpp"
#include "timegrad/num/rng.hpp"

namespace timegrad::engine {

/// x_t = level + A (x_{t-1} - level) + e_t,  e_t ~ N(0, noise_sd^2 [[1, rho], [rho, 1]])
struct VarProcess {
  std::array<double, 4> coefficients{0.7, 0.2, 0.1, 0.8};  // row-major 2x2, eigenvalues 0.9 and 0.6
  std::array<double, 2> level{10.0, 15.0};
  double noise_sd = 1.0;
  double noise_correlation = 0.8;

  double spectral_radius() const;
  /// One transition from `prev` using two standard normals from `rng`.
  std::array<double, 2> step(const std::array<double, 2>& prev, num::RngStream& rng) const;
};

/// Stationary start, then `length` rows. Hourly stamps from 2021-01-04.
data::Dataset generate_var(const VarProcess& process, std::size_t length, std::uint64_t seed,
                           std::size_t burn_in = 200);

/// Trajectories from the true process starting at `last` (the final context row).
metrics::SampleCube var_oracle_forecast(const VarProcess& process, const std::array<double, 2>& last,
                                        std::size_t steps, std::size_t samples,
                                        const num::RngStream& rng);

/// x_t - level = coefficient (x_{t-1} - level) + noise_sd * eps, hourly stamps.
struct Ar1Process {
  double coefficient = 0.9;
  double noise_sd = 0.1;
  double level = 0.0;
};
data::Dataset generate_ar1(const Ar1Process& process, std::size_t length, std::uint64_t seed);

/// i.i.d. N(mean, sd^2) scalar series, hourly stamps.
data::Dataset generate_static(double mean, double sd, std::size_t length, std::uint64_t seed);

}  // namespace timegrad::engine
