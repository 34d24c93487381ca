// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

#include "timegrad/engine/model.hpp"

namespace timegrad::engine {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Binary layout, all integers little-endian:
///   "TGCKPT\0\0"                  8 bytes
///   version                       u32
///   config length, config text    u64 + bytes (serialize_config)
///   best validation loss          f64
///   seed                          u64
///   parameter count               u64
///   per parameter: name length, name bytes, rank, dims (u64 each), values (f64 each)
struct Checkpoint {
  TimeGradModel model;
  double best_validation_loss = 0.0;
  std::uint64_t seed = 0;
};

std::string encode_checkpoint(const TimeGradModel& model, double best_validation_loss,
                              std::uint64_t seed);
/// CheckpointVersionError, CheckpointTruncatedError, CheckpointShapeError or
/// plain CheckpointError (bad magic, trailing bytes, unknown parameter).
Checkpoint decode_checkpoint(const std::string& bytes);

void save_checkpoint(const std::string& path, const TimeGradModel& model,
                     double best_validation_loss, std::uint64_t seed);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace timegrad::engine
