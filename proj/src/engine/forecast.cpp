// SPDX-License-Identifier: Apache-2.0
#include "timegrad/engine/forecast.hpp"

#include <algorithm>
#include <cmath>

#include "timegrad/data/covariates.hpp"
#include "timegrad/diffusion/process.hpp"
#include "timegrad/error.hpp"
#include "timegrad/num/ops.hpp"

namespace timegrad::engine {

using num::Tensor;

ForecastSampleSet forecast_window(const TimeGradModel& model, const data::Dataset& ds,
                                  const data::WindowSample& window, std::size_t samples,
                                  const num::RngStream& rng) {
  const ModelConfig& mc = model.config();
  if (ds.dimension != mc.dimension) {
    throw ContractError("forecast: dataset has " + std::to_string(ds.dimension) +
                        " entities, model was trained on " + std::to_string(mc.dimension));
  }
  if (samples == 0) throw ContractError("forecast: need at least one trajectory");
  const std::size_t len = mc.prediction_length;
  if (window.context_length != len || window.prediction_length != len) {
    throw ContractError("forecast: window lengths differ from the model's prediction length");
  }
  if (window.forecast_start() > ds.length()) {
    throw ContractError("forecast: context runs past the end of the data");
  }
  const std::size_t dim = mc.dimension;
  const std::size_t width = mc.covariate_width();

  const std::size_t lead = std::min(window.offset, mc.max_lag());
  const std::size_t first = window.offset - lead;
  const auto raw = data::window_values(ds, first, lead + len);
  const auto scaler = data::Scaler::fit(std::span<const double>(raw).subspan(lead * dim), dim);
  const data::ScaledHistory base(first, dim, scaler.scaled(raw));

  ForecastSampleSet out;
  out.window = window;
  out.divisors = scaler.divisors();
  const auto step = data::frequency_step(ds.frequency);
  const data::Timestamp origin = ds.timestamps[window.offset];
  auto stamp = [&](std::size_t abs) { return origin + step * static_cast<long>(abs - window.offset); };
  for (std::size_t k = 0; k < len; ++k) out.timestamps.push_back(stamp(window.forecast_start() + k));
  if (window.forecast_start() + len <= ds.length()) {
    out.truth = data::window_values(ds, window.forecast_start(), len);
  }

  // Warm up on the context with a single row, then fan out.
  model::EncoderState state = model.encoder().zero_state(1);
  std::vector<double> cov(width);
  for (std::size_t s = 0; s < len; ++s) {
    const std::size_t abs = window.offset + s;
    const auto row = base.row(abs);
    data::covariate_row(stamp(abs), abs, mc.frequency, mc.covariates, base, cov);
    const Tensor obs = Tensor::from({1, dim}, {row.begin(), row.end()});
    const Tensor c = width > 0 ? Tensor::from({1, width}, cov) : Tensor();
    state = model.encoder().step(model.encoder_input(obs, c), state);
  }
  state = model::repeat_state(state, samples);

  std::vector<num::RngStream> streams;
  streams.reserve(samples);
  for (std::size_t j = 0; j < samples; ++j) streams.push_back(rng.split(j));
  std::vector<data::ScaledHistory> histories(samples, base);

  metrics::SampleCube cube(samples, len, dim);
  std::vector<double> covs(samples * width);
  for (std::size_t k = 0; k < len; ++k) {
    const Tensor x = diffusion::sample(state.conditioning(), streams, model.denoiser(), model.schedule());
    for (std::size_t j = 0; j < samples; ++j) {
      const auto row = x.data().subspan(j * dim, dim);
      histories[j].append(row);
      for (std::size_t d = 0; d < dim; ++d) cube.at(j, k, d) = row[d];
    }
    if (k + 1 == len) break;
    const std::size_t abs = window.forecast_start() + k;
    for (std::size_t j = 0; j < samples; ++j) {
      data::covariate_row(stamp(abs), abs, mc.frequency, mc.covariates, histories[j],
                          std::span<double>(covs).subspan(j * width, width));
    }
    const Tensor c = width > 0 ? Tensor::from({samples, width}, covs) : Tensor();
    state = model.encoder().step(model.encoder_input(x, c), state);
  }

  for (std::size_t j = 0; j < samples; ++j) {
    for (std::size_t k = 0; k < len; ++k) {
      for (std::size_t d = 0; d < dim; ++d) cube.at(j, k, d) *= out.divisors[d];
    }
  }
  out.samples = std::move(cube);
  return out;
}

ForecastSampleSet forecast_future(const TimeGradModel& model, const data::Dataset& ds,
                                  std::size_t samples, const num::RngStream& rng) {
  const std::size_t len = model.config().prediction_length;
  if (ds.length() < len) {
    throw ConfigError("forecast: need " + std::to_string(len) + " rows of context, dataset has " +
                      std::to_string(ds.length()));
  }
  return forecast_window(model, ds, {ds.length() - len, len, len}, samples, rng);
}

std::vector<ForecastSampleSet> forecast_rolling(const TimeGradModel& model, const data::Dataset& ds,
                                                std::size_t test_windows, std::size_t samples,
                                                const num::RngStream& rng) {
  const std::size_t len = model.config().prediction_length;
  const auto parts = data::split(ds, len, test_windows);
  const auto windows = data::rolling_windows(parts.test, len);
  std::vector<ForecastSampleSet> out;
  out.reserve(windows.size());
  for (std::size_t w = 0; w < windows.size(); ++w) {
    out.push_back(forecast_window(model, ds, windows[w], samples, rng.split(w)));
  }
  return out;
}

double empirical_quantile(std::span<const double> sorted, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw ContractError("quantile level " + std::to_string(level) + " outside (0, 1)");
  }
  if (sorted.empty()) throw ContractError("quantile of an empty sample");
  const double h = static_cast<double>(sorted.size() - 1) * level;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<double> quantiles(const metrics::SampleCube& samples, std::span<const double> levels) {
  for (double p : levels) {
    if (!(p > 0.0 && p < 1.0)) {
      throw ContractError("quantile level " + std::to_string(p) + " outside (0, 1)");
    }
  }
  std::vector<double> out(samples.steps * samples.dimension * levels.size());
  std::vector<double> column(samples.samples);
  for (std::size_t t = 0; t < samples.steps; ++t) {
    for (std::size_t d = 0; d < samples.dimension; ++d) {
      for (std::size_t s = 0; s < samples.samples; ++s) column[s] = samples.at(s, t, d);
      std::sort(column.begin(), column.end());
      for (std::size_t k = 0; k < levels.size(); ++k) {
        out[(t * samples.dimension + d) * levels.size() + k] = empirical_quantile(column, levels[k]);
      }
    }
  }
  return out;
}

}  // namespace timegrad::engine
