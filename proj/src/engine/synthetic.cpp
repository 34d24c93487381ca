// SPDX-License-Identifier: Apache-2.0
#include "timegrad/engine/synthetic.hpp"

#include <cmath>
#include <complex>

#include "timegrad/error.hpp"

namespace timegrad::engine {

namespace {

data::Timestamp fixture_start() {
  using namespace std::chrono;
  return sys_days(year(2021) / January / 4);
}

}  // namespace

double VarProcess::spectral_radius() const {
  const double a = coefficients[0], b = coefficients[1], c = coefficients[2], d = coefficients[3];
  const double tr = a + d, det = a * d - b * c;
  const std::complex<double> disc = std::sqrt(std::complex<double>(tr * tr - 4.0 * det));
  return std::max(std::abs((tr + disc) / 2.0), std::abs((tr - disc) / 2.0));
}

std::array<double, 2> VarProcess::step(const std::array<double, 2>& prev, num::RngStream& rng) const {
  const double z1 = rng.normal();
  const double z2 = rng.normal();
  const double e1 = noise_sd * z1;
  const double e2 = noise_sd * (noise_correlation * z1 + std::sqrt(1.0 - noise_correlation * noise_correlation) * z2);
  const double d1 = prev[0] - level[0], d2 = prev[1] - level[1];
  return {level[0] + coefficients[0] * d1 + coefficients[1] * d2 + e1,
          level[1] + coefficients[2] * d1 + coefficients[3] * d2 + e2};
}

data::Dataset generate_var(const VarProcess& process, std::size_t length, std::uint64_t seed,
                           std::size_t burn_in) {
  if (length == 0) throw ConfigError("generate_var: length must be >= 1");
  num::RngStream rng(seed);
  std::array<double, 2> x = process.level;
  for (std::size_t t = 0; t < burn_in; ++t) x = process.step(x, rng);
  std::vector<double> values;
  values.reserve(2 * length);
  for (std::size_t t = 0; t < length; ++t) {
    x = process.step(x, rng);
    values.push_back(x[0]);
    values.push_back(x[1]);
  }
  return data::make_regular(data::Frequency::Hour, fixture_start(), 2, std::move(values));
}

metrics::SampleCube var_oracle_forecast(const VarProcess& process, const std::array<double, 2>& last,
                                        std::size_t steps, std::size_t samples,
                                        const num::RngStream& rng) {
  metrics::SampleCube cube(samples, steps, 2);
  for (std::size_t s = 0; s < samples; ++s) {
    num::RngStream stream = rng.split(s);
    std::array<double, 2> x = last;
    for (std::size_t t = 0; t < steps; ++t) {
      x = process.step(x, stream);
      cube.at(s, t, 0) = x[0];
      cube.at(s, t, 1) = x[1];
    }
  }
  return cube;
}

data::Dataset generate_ar1(const Ar1Process& process, std::size_t length, std::uint64_t seed) {
  if (length == 0) throw ConfigError("generate_ar1: length must be >= 1");
  num::RngStream rng(seed);
  const double stationary_sd =
      process.noise_sd / std::sqrt(1.0 - process.coefficient * process.coefficient);
  double x = process.level + stationary_sd * rng.normal();
  std::vector<double> values;
  values.reserve(length);
  for (std::size_t t = 0; t < length; ++t) {
    x = process.level + process.coefficient * (x - process.level) + process.noise_sd * rng.normal();
    values.push_back(x);
  }
  return data::make_regular(data::Frequency::Hour, fixture_start(), 1, std::move(values));
}

data::Dataset generate_static(double mean, double sd, std::size_t length, std::uint64_t seed) {
  if (length == 0) throw ConfigError("generate_static: length must be >= 1");
  num::RngStream rng(seed);
  std::vector<double> values(length);
  for (double& v : values) v = mean + sd * rng.normal();
  return data::make_regular(data::Frequency::Hour, fixture_start(), 1, std::move(values));
}

}  // namespace timegrad::engine
