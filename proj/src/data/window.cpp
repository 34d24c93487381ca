// SPDX-License-Identifier: Apache-2.0
#include "timegrad/data/window.hpp"

#include <cmath>

#include "timegrad/error.hpp"

namespace timegrad::data {

WindowSample sample_window(Span region, std::size_t prediction_steps, num::RngStream& rng) {
  if (prediction_steps == 0) throw ConfigError("sample_window: prediction steps must be >= 1");
  const std::size_t need = 2 * prediction_steps;
  if (region.length < need) {
    throw ConfigError("training range of " + std::to_string(region.length) +
                      " rows is too short for windows of " + std::to_string(need) +
                      " (context + prediction)");
  }
  const std::size_t choices = region.length - need + 1;
  WindowSample w;
  w.offset = region.start + static_cast<std::size_t>(rng.uniform_index(choices));
  w.context_length = prediction_steps;
  w.prediction_length = prediction_steps;
  return w;
}

std::vector<WindowSample> rolling_windows(Span target, std::size_t prediction_steps) {
  if (prediction_steps == 0 || target.length % prediction_steps != 0) {
    throw ConfigError("rolling windows: span of " + std::to_string(target.length) +
                      " rows is not a multiple of " + std::to_string(prediction_steps));
  }
  if (target.start < prediction_steps) {
    throw ConfigError("rolling windows: no room for a context before row " +
                      std::to_string(target.start));
  }
  std::vector<WindowSample> out;
  for (std::size_t s = target.start; s < target.end(); s += prediction_steps) {
    out.push_back({s - prediction_steps, prediction_steps, prediction_steps});
  }
  return out;
}

std::vector<double> window_values(const Dataset& ds, std::size_t offset, std::size_t count) {
  if (offset + count > ds.length()) {
    throw ContractError("window rows [" + std::to_string(offset) + ", " +
                        std::to_string(offset + count) + ") exceed dataset length " +
                        std::to_string(ds.length()));
  }
  const auto first = ds.values.begin() + static_cast<std::ptrdiff_t>(offset * ds.dimension);
  return {first, first + static_cast<std::ptrdiff_t>(count * ds.dimension)};
}

Scaler::Scaler(std::vector<double> divisors) : divisors_(std::move(divisors)) {
  for (double d : divisors_) {
    if (d == 0.0 || !std::isfinite(d)) throw ContractError("scaler: divisors must be finite and nonzero");
  }
}

Scaler Scaler::fit(std::span<const double> context, std::size_t dimension) {
  if (dimension == 0 || context.empty() || context.size() % dimension != 0) {
    throw ContractError("scaler: context must hold at least one full row");
  }
  const std::size_t rows = context.size() / dimension;
  std::vector<double> div(dimension, 0.0);
  for (std::size_t t = 0; t < rows; ++t) {
    for (std::size_t d = 0; d < dimension; ++d) div[d] += context[t * dimension + d];
  }
  for (double& v : div) {
    v /= static_cast<double>(rows);
    if (v == 0.0) v = 1.0;
  }
  return Scaler(std::move(div));
}

void Scaler::scale(std::span<double> values) const {
  const std::size_t width = divisors_.size();
  if (width == 0 || values.size() % width != 0) {
    throw DimensionError("scaler: " + std::to_string(values.size()) +
                         " values are not rows of width " + std::to_string(width));
  }
  for (std::size_t i = 0; i < values.size(); ++i) values[i] /= divisors_[i % width];
}

void Scaler::unscale(std::span<double> values) const {
  const std::size_t width = divisors_.size();
  if (width == 0 || values.size() % width != 0) {
    throw DimensionError("scaler: " + std::to_string(values.size()) +
                         " values are not rows of width " + std::to_string(width));
  }
  for (std::size_t i = 0; i < values.size(); ++i) values[i] *= divisors_[i % width];
}

std::vector<double> Scaler::scaled(std::span<const double> values) const {
  std::vector<double> out(values.begin(), values.end());
  scale(out);
  return out;
}

std::vector<double> Scaler::unscaled(std::span<const double> values) const {
  std::vector<double> out(values.begin(), values.end());
  unscale(out);
  return out;
}

}  // namespace timegrad::data
