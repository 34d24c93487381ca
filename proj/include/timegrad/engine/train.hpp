// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "timegrad/data/dataset.hpp"
#include "timegrad/data/window.hpp"
#include "timegrad/engine/model.hpp"
#include "timegrad/num/rng.hpp"
#include "timegrad/num/tensor.hpp"

namespace timegrad::engine {

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 64;
  std::size_t max_epochs = 20;
  std::size_t batches_per_epoch = 50;
  std::size_t patience = 5;
  std::uint64_t seed = 0;
  /// Repeated (n, eps) draws per validation window; the draws are fixed across epochs.
  std::size_t validation_replicates = 8;
  /// Rolling prediction windows held out for testing (validation uses as many).
  std::size_t test_windows = 1;

  void validate() const;
};

/// Teacher-forced inputs for a batch of windows.
///
/// inputs[s] is the encoder input (B, D + F) at window step s = 0..2L-2;
/// targets stacks the prediction rows step-major: row k*B + b is window b at
/// prediction step k.
struct PreparedBatch {
  std::size_t windows = 0;
  std::vector<num::Tensor> observations;  // (B, D) scaled
  std::vector<num::Tensor> covariates;    // (B, F)
  num::Tensor targets;                    // (L*B, D) scaled
};

PreparedBatch prepare_batch(const data::Dataset& ds, std::span<const data::WindowSample> windows,
                            const ModelConfig& config);

/// Mean eps-matching loss over every (window, prediction step) row, with one
/// noise level drawn per row. Records on the active graph if any.
num::Tensor batch_loss(const TimeGradModel& model, const PreparedBatch& batch, num::RngStream& rng);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double validation_loss = 0.0;
  double best_validation_loss = 0.0;
};

struct TrainResult {
  TimeGradModel model;
  std::vector<EpochRecord> log;
  double initial_validation_loss = 0.0;
  double best_validation_loss = 0.0;
  std::size_t best_epoch = 0;  // 0 = untrained parameters were never beaten
};

/// Validation windows tile the validation block of split(ds, L, test_windows).
double validation_loss(const TimeGradModel& model, const data::Dataset& ds,
                       const TrainConfig& config);

/// Adam on random training windows with early stopping on the validation
/// loss. The returned model holds the best parameters seen.
TrainResult train(const data::Dataset& ds, const ModelConfig& model_config,
                  const TrainConfig& config,
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

}  // namespace timegrad::engine
