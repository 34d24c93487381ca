// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "timegrad/data/covariates.hpp"
#include "timegrad/data/dataset.hpp"
#include "timegrad/diffusion/schedule.hpp"
#include "timegrad/model/denoiser.hpp"
#include "timegrad/model/encoder.hpp"
#include "timegrad/num/params.hpp"

namespace timegrad::engine {

/// Everything needed to rebuild the network and its inputs. Stored in checkpoints.
struct ModelConfig {
  std::size_t dimension = 1;
  data::Frequency frequency = data::Frequency::Day;
  std::size_t prediction_length = 24;  // context length is the same
  data::CovariateOptions covariates;

  model::CellKind cell = model::CellKind::Lstm;
  std::size_t rnn_layers = 2;
  std::size_t rnn_hidden = 40;

  std::size_t residual_layers = 8;
  std::size_t residual_channels = 8;
  std::size_t dilation_cycle = 2;
  std::size_t noise_embedding_dim = 32;
  std::size_t noise_embedding_max = 500;
  bool spatial_conditioning = true;
  std::size_t entity_embedding_dim = 0;  // 0 disables learned entity embeddings

  std::size_t diffusion_levels = 100;
  double beta_first = 1e-4;
  double beta_last = 0.1;

  std::size_t covariate_width() const;
  /// Observation + covariates + flattened entity embeddings.
  std::size_t input_size() const;
  std::size_t max_lag() const;
  /// ConfigError on any inconsistent field.
  void validate() const;
};

/// Deterministic `key=value` lines, one per field.
std::string serialize_config(const ModelConfig& config);
ModelConfig parse_model_config(const std::string& text);

/// Encoder, denoiser and optional entity embedding sharing one parameter set.
class TimeGradModel {
 public:
  TimeGradModel(const ModelConfig& config, std::uint64_t init_seed);

  TimeGradModel(TimeGradModel&&) noexcept = default;
  TimeGradModel& operator=(TimeGradModel&&) noexcept = default;
  TimeGradModel(const TimeGradModel&) = delete;
  TimeGradModel& operator=(const TimeGradModel&) = delete;

  const ModelConfig& config() const noexcept { return config_; }
  num::ParameterSet& params() noexcept { return params_; }
  const num::ParameterSet& params() const noexcept { return params_; }
  const diffusion::DiffusionSchedule& schedule() const noexcept { return schedule_; }
  const model::Encoder& encoder() const noexcept { return encoder_; }
  const model::Denoiser& denoiser() const noexcept { return denoiser_; }

  /// Encoder input for B rows: [observation (B,D) | covariates (B,F) | embeddings].
  num::Tensor encoder_input(const num::Tensor& observation, const num::Tensor& covariates) const;

 private:
  ModelConfig config_;
  num::ParameterSet params_;
  diffusion::DiffusionSchedule schedule_;
  model::Encoder encoder_;
  model::Denoiser denoiser_;
  num::Tensor entity_embedding_;
};

}  // namespace timegrad::engine
