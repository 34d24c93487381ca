// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "timegrad/data/dataset.hpp"
#include "timegrad/num/rng.hpp"

namespace timegrad::data {

/// A context block immediately followed by a prediction block of the same
/// length. `offset` is the absolute row of the first context step.
struct WindowSample {
  std::size_t offset = 0;
  std::size_t context_length = 0;
  std::size_t prediction_length = 0;

  std::size_t length() const noexcept { return context_length + prediction_length; }
  std::size_t forecast_start() const noexcept { return offset + context_length; }
};

/// Uniformly random window lying entirely inside `region`.
WindowSample sample_window(Span region, std::size_t prediction_steps, num::RngStream& rng);

/// Back-to-back windows whose prediction blocks tile `target` and whose
/// contexts are the `prediction_steps` rows preceding each block.
std::vector<WindowSample> rolling_windows(Span target, std::size_t prediction_steps);

/// Raw values of rows [offset, offset + count), row-major.
std::vector<double> window_values(const Dataset& ds, std::size_t offset, std::size_t count);

/// Per-entity mean scaling fitted on a context block.
class Scaler {
 public:
  Scaler() = default;
  explicit Scaler(std::vector<double> divisors);

  /// context: rows x D row-major. A zero mean becomes divisor 1.
  static Scaler fit(std::span<const double> context, std::size_t dimension);

  std::size_t dimension() const noexcept { return divisors_.size(); }
  const std::vector<double>& divisors() const noexcept { return divisors_; }

  /// Row-major rows x D, in place.
  void scale(std::span<double> values) const;
  void unscale(std::span<double> values) const;
  std::vector<double> scaled(std::span<const double> values) const;
  std::vector<double> unscaled(std::span<const double> values) const;

 private:
  std::vector<double> divisors_;
};

}  // namespace timegrad::data
