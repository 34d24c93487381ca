// SPDX-License-Identifier: Apache-2.0
#include "timegrad/engine/train.hpp"

#include <cmath>
#include <limits>

#include "timegrad/data/covariates.hpp"
#include "timegrad/diffusion/process.hpp"
#include "timegrad/error.hpp"
#include "timegrad/num/ops.hpp"
#include "timegrad/num/params.hpp"

namespace timegrad::engine {

using num::Tensor;

namespace {

constexpr std::uint64_t kTrainStream = 10;
constexpr std::uint64_t kValidationStream = 20;

std::vector<data::WindowSample> validation_windows(const data::Dataset& ds, const ModelConfig& mc,
                                                   const TrainConfig& tc) {
  const auto parts = data::split(ds, mc.prediction_length, tc.test_windows);
  return data::rolling_windows(parts.validation, mc.prediction_length);
}

struct ParamSnapshot {
  std::vector<std::vector<double>> values;

  static ParamSnapshot take(const num::ParameterSet& params) {
    ParamSnapshot s;
    for (const auto& e : params.entries()) s.values.emplace_back(e.value.data().begin(), e.value.data().end());
    return s;
  }
  void restore(num::ParameterSet& params) const {
    auto& entries = params.entries();
    for (std::size_t i = 0; i < entries.size(); ++i) {
      auto out = entries[i].value.mutable_data();
      std::copy(values[i].begin(), values[i].end(), out.begin());
    }
  }
};

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("train: learning rate must be positive");
  }
  if (batch_size == 0) throw ConfigError("train: batch size must be >= 1");
  if (batches_per_epoch == 0) throw ConfigError("train: batches per epoch must be >= 1");
  if (patience == 0) throw ConfigError("train: patience must be >= 1");
  if (validation_replicates == 0) throw ConfigError("train: validation replicates must be >= 1");
  if (test_windows == 0) throw ConfigError("train: test windows must be >= 1");
}

PreparedBatch prepare_batch(const data::Dataset& ds, std::span<const data::WindowSample> windows,
                            const ModelConfig& config) {
  if (windows.empty()) throw ContractError("prepare_batch: no windows");
  if (ds.dimension != config.dimension) {
    throw ContractError("dataset has " + std::to_string(ds.dimension) + " entities, model expects " +
                        std::to_string(config.dimension));
  }
  const std::size_t len = config.prediction_length;
  const std::size_t dim = config.dimension;
  const std::size_t width = config.covariate_width();
  const std::size_t batch = windows.size();
  const std::size_t steps = 2 * len - 1;

  std::vector<std::vector<double>> obs(steps, std::vector<double>(batch * dim));
  std::vector<std::vector<double>> cov(steps, std::vector<double>(batch * width));
  std::vector<double> targets(len * batch * dim);

  for (std::size_t b = 0; b < batch; ++b) {
    const auto& w = windows[b];
    if (w.context_length != len || w.prediction_length != len) {
      throw ContractError("prepare_batch: window lengths differ from the model's prediction length");
    }
    const std::size_t lead = std::min(w.offset, config.max_lag());
    const std::size_t first = w.offset - lead;
    const auto raw = data::window_values(ds, first, lead + w.length());
    const auto context = std::span<const double>(raw).subspan(lead * dim, len * dim);
    const auto scaler = data::Scaler::fit(context, dim);
    const data::ScaledHistory history(first, dim, scaler.scaled(raw));

    for (std::size_t s = 0; s < steps; ++s) {
      const std::size_t abs = w.offset + s;
      const auto row = history.row(abs);
      std::copy(row.begin(), row.end(), obs[s].begin() + static_cast<std::ptrdiff_t>(b * dim));
      data::covariate_row(ds.timestamps[abs], abs, config.frequency, config.covariates, history,
                          std::span<double>(cov[s]).subspan(b * width, width));
    }
    for (std::size_t k = 0; k < len; ++k) {
      const auto row = history.row(w.forecast_start() + k);
      std::copy(row.begin(), row.end(),
                targets.begin() + static_cast<std::ptrdiff_t>((k * batch + b) * dim));
    }
  }

  PreparedBatch out;
  out.windows = batch;
  for (std::size_t s = 0; s < steps; ++s) {
    out.observations.push_back(Tensor::from({batch, dim}, std::move(obs[s])));
    if (width > 0) out.covariates.push_back(Tensor::from({batch, width}, std::move(cov[s])));
    else out.covariates.emplace_back();
  }
  out.targets = Tensor::from({len * batch, dim}, std::move(targets));
  return out;
}

Tensor batch_loss(const TimeGradModel& model, const PreparedBatch& batch, num::RngStream& rng) {
  const std::size_t len = model.config().prediction_length;
  const std::size_t steps = 2 * len - 1;
  if (batch.observations.size() != steps) {
    throw ContractError("batch_loss: batch prepared for a different prediction length");
  }
  model::EncoderState state = model.encoder().zero_state(batch.windows);
  std::vector<Tensor> conditioning;
  conditioning.reserve(len);
  for (std::size_t s = 0; s < steps; ++s) {
    state = model.encoder().step(model.encoder_input(batch.observations[s], batch.covariates[s]), state);
    if (s + 1 >= len) conditioning.push_back(state.conditioning());
  }
  const Tensor cond = num::concat(conditioning, 0);
  const auto levels = diffusion::draw_levels(rng, len * batch.windows, model.schedule());
  return diffusion::training_loss(batch.targets, cond, levels, rng, model.denoiser(), model.schedule());
}

double validation_loss(const TimeGradModel& model, const data::Dataset& ds, const TrainConfig& config) {
  const auto windows = validation_windows(ds, model.config(), config);
  const PreparedBatch batch = prepare_batch(ds, windows, model.config());
  const num::RngStream root = num::RngStream(config.seed).split(kValidationStream);
  double total = 0.0;
  for (std::size_t r = 0; r < config.validation_replicates; ++r) {
    num::RngStream rng = root.split(r);
    total += batch_loss(model, batch, rng).item();
  }
  return total / static_cast<double>(config.validation_replicates);
}

TrainResult train(const data::Dataset& ds, const ModelConfig& model_config, const TrainConfig& config,
                  const std::function<void(const EpochRecord&)>& on_epoch) {
  config.validate();
  model_config.validate();
  if (ds.dimension != model_config.dimension) {
    throw ConfigError("dataset has " + std::to_string(ds.dimension) + " entities, model configured for " +
                      std::to_string(model_config.dimension));
  }
  const auto parts = data::split(ds, model_config.prediction_length, config.test_windows);
  if (parts.train.length < 2 * model_config.prediction_length) {
    throw ConfigError("training range of " + std::to_string(parts.train.length) +
                      " rows is shorter than one window of " +
                      std::to_string(2 * model_config.prediction_length));
  }

  TrainResult result{TimeGradModel(model_config, config.seed), {}, 0.0, 0.0, 0};
  TimeGradModel& model = result.model;
  result.initial_validation_loss = validation_loss(model, ds, config);
  result.best_validation_loss = result.initial_validation_loss;
  ParamSnapshot best = ParamSnapshot::take(model.params());

  const num::RngStream train_root = num::RngStream(config.seed).split(kTrainStream);
  std::vector<data::WindowSample> windows(config.batch_size);
  std::size_t since_best = 0;
  std::uint64_t batch_index = 0;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    double epoch_loss = 0.0;
    for (std::size_t b = 0; b < config.batches_per_epoch; ++b, ++batch_index) {
      num::RngStream rng = train_root.split(batch_index);
      for (auto& w : windows) w = data::sample_window(parts.train, model_config.prediction_length, rng);
      const PreparedBatch batch = prepare_batch(ds, windows, model_config);
      model.params().zero_grads();
      try {
        num::Graph graph;
        num::GraphScope scope(graph);
        const Tensor loss = batch_loss(model, batch, rng);
        num::backward(loss);
        epoch_loss += loss.item();
      } catch (const NumericError& e) {
        throw NumericError("epoch " + std::to_string(epoch) + ", batch " + std::to_string(b + 1) +
                           ": " + e.what());
      }
      num::adam_step(model.params(), config.learning_rate);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = epoch_loss / static_cast<double>(config.batches_per_epoch);
    rec.validation_loss = validation_loss(model, ds, config);
    if (rec.validation_loss < result.best_validation_loss) {
      result.best_validation_loss = rec.validation_loss;
      result.best_epoch = epoch;
      best = ParamSnapshot::take(model.params());
      since_best = 0;
    } else {
      ++since_best;
    }
    rec.best_validation_loss = result.best_validation_loss;
    result.log.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (since_best >= config.patience) break;
  }
  best.restore(model.params());
  return result;
}

}  // namespace timegrad::engine
