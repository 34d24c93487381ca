// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "timegrad/data/dataset.hpp"
#include "timegrad/data/window.hpp"
#include "timegrad/engine/model.hpp"
#include "timegrad/metrics/crps.hpp"
#include "timegrad/num/rng.hpp"

namespace timegrad::engine {

/// Sampled trajectories for one window, already in original units.
struct ForecastSampleSet {
  data::WindowSample window;
  std::vector<data::Timestamp> timestamps;  // one per prediction step
  metrics::SampleCube samples;              // S x L x D
  std::vector<double> divisors;
  std::vector<double> truth;                // L x D, empty when the data ends first
};

/// Warms the encoder on the window's context, then rolls out S trajectories.
/// Trajectory j draws only from `rng.split(j)`. The prediction block may run
/// past the end of the data; timestamps are extrapolated.
ForecastSampleSet forecast_window(const TimeGradModel& model, const data::Dataset& ds,
                                  const data::WindowSample& window, std::size_t samples,
                                  const num::RngStream& rng);

/// Forecast after the last observation, using the final L rows as context.
ForecastSampleSet forecast_future(const TimeGradModel& model, const data::Dataset& ds,
                                  std::size_t samples, const num::RngStream& rng);

/// Rolling windows over the test block of split(ds, L, test_windows);
/// window w uses rng.split(w).
std::vector<ForecastSampleSet> forecast_rolling(const TimeGradModel& model, const data::Dataset& ds,
                                                std::size_t test_windows, std::size_t samples,
                                                const num::RngStream& rng);

/// Empirical quantiles (linear interpolation between order statistics):
/// with sorted X_0..X_{S-1}, h = (S-1) p, q = X_floor(h) + (h - floor(h)) (X_ceil(h) - X_floor(h)).
double empirical_quantile(std::span<const double> sorted, double level);

/// out[(t * D + d) * levels.size() + k] for level k.
std::vector<double> quantiles(const metrics::SampleCube& samples, std::span<const double> levels);

}  // namespace timegrad::engine
