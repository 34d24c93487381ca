// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "timegrad/num/params.hpp"
#include "timegrad/num/rng.hpp"
#include "timegrad/num/tensor.hpp"

namespace timegrad::model {

enum class CellKind { Lstm, Gru };

struct EncoderConfig {
  CellKind cell = CellKind::Lstm;
  std::size_t layers = 2;
  std::size_t hidden = 40;
  std::size_t input_size = 1;  // D + covariate dimension
};

/// Per-layer recurrent state for a batch of B sequences. `cell` is only
/// populated for LSTM encoders.
struct EncoderState {
  std::vector<num::Tensor> hidden;  // each (B, hidden)
  std::vector<num::Tensor> cell;    // each (B, hidden)

  /// Top-layer hidden state, the vector the denoiser is conditioned on.
  const num::Tensor& conditioning() const { return hidden.back(); }
  std::size_t batch() const { return hidden.front().dim(0); }
};

/// Multi-layer LSTM/GRU; layer l consumes layer l-1's hidden output.
class Encoder {
 public:
  Encoder(const EncoderConfig& config, num::ParameterSet& params, num::RngStream init,
          const std::string& prefix = "encoder.");

  const EncoderConfig& config() const noexcept { return config_; }

  EncoderState zero_state(std::size_t batch) const;
  /// input (B, input_size)
  EncoderState step(const num::Tensor& input, const EncoderState& prev) const;
  /// States after each input, starting from `initial`.
  std::vector<EncoderState> unroll(std::span<const num::Tensor> inputs,
                                   const EncoderState& initial) const;

 private:
  struct Layer {
    num::Tensor w_input;   // (in, G*H)
    num::Tensor w_hidden;  // (H, G*H)
    num::Tensor bias;      // (G*H)
    num::Tensor bias_hidden;  // GRU only: (3H), applied inside the reset gate
  };

  EncoderConfig config_;
  std::vector<Layer> layers_;
};

/// Row-wise repetition of a single state: (1,H) tensors -> (rows,H).
EncoderState repeat_state(const EncoderState& state, std::size_t rows);
/// Row-wise stacking of several batches of the same depth.
EncoderState stack_states(std::span<const EncoderState> states);

}  // namespace timegrad::model
