// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "timegrad/diffusion/process.hpp"
#include "timegrad/num/params.hpp"
#include "timegrad/num/rng.hpp"
#include "timegrad/num/tensor.hpp"

namespace timegrad::model {

/// Sinusoidal embedding of the noise index: for j = 0..dim/2-1,
///   e[2j]   = sin(n / max_index^(2j/dim))
///   e[2j+1] = cos(n / max_index^(2j/dim))
class NoiseEmbeddingTable {
 public:
  explicit NoiseEmbeddingTable(std::size_t max_index = 500, std::size_t dim = 32);

  std::size_t max_index() const noexcept { return max_index_; }
  std::size_t dim() const noexcept { return dim_; }
  /// 1 <= n <= max_index, otherwise ContractError.
  std::vector<double> embed(std::size_t n) const;
  /// Rows for the given levels stacked into a (count, dim) constant.
  num::Tensor rows(std::span<const std::size_t> levels) const;

 private:
  std::size_t max_index_;
  std::size_t dim_;
};

struct DenoiserConfig {
  std::size_t dimension = 1;        // D, the spatial size
  std::size_t cond_size = 40;       // size of the encoder conditioning vector
  std::size_t residual_layers = 8;
  std::size_t residual_channels = 8;
  std::size_t dilation_cycle = 2;   // block i uses dilation 2^(i % cycle)
  std::size_t embedding_dim = 32;
  std::size_t max_levels = 500;     // N_max of the noise embedding
  /// Adds an FC up-sampler h -> R^D whose output is injected per position.
  bool spatial_conditioning = true;
};

struct ResidualBlockParams {
  std::size_t index = 0;
  std::size_t dilation = 1;
  num::Tensor dilated_weight;  // (2C, C, 3)
  num::Tensor dilated_bias;    // (2C)
  num::Tensor cond_weight;     // (H, 2C)
  num::Tensor cond_bias;       // (2C)
  num::Tensor noise_weight;    // (E, 2C)
  num::Tensor spatial_weight;  // (2C, 1, 1); undefined without spatial conditioning
  num::Tensor out_weight;      // (2C, C, 1)
  num::Tensor out_bias;        // (2C)
};

/// Everything a block is conditioned on, for a batch of B rows.
struct BlockConditioning {
  num::Tensor cond;                    // (B, H) encoder state
  num::Tensor noise_table;             // (U, E) embeddings of the distinct levels
  std::vector<std::size_t> noise_rows; // B entries indexing noise_table
  num::Tensor spatial;                 // (B, 1, D) up-sampled conditioning, optional
};

struct BlockOutput {
  num::Tensor residual;  // (B, C, D)
  num::Tensor skip;      // (B, C, D)
};

/// One conditional residual block:
///   pre  = dilated_conv(x) + broadcast(W_h h + b_h + W_e e_n) + conv1x1(spatial)
///   gate = sigmoid(pre[:C]) * tanh(pre[C:])
///   out  = conv1x1(gate)      -> residual (x + out[:C]) / sqrt(2), skip out[C:]
BlockOutput residual_block_forward(const num::Tensor& x, const BlockConditioning& cond,
                                   const ResidualBlockParams& params);

/// eps_theta: gated dilated-convolution residual stack over the D entities.
class Denoiser final : public diffusion::EpsilonModel {
 public:
  /// Registers all parameters under `prefix` in `params`.
  Denoiser(const DenoiserConfig& config, num::ParameterSet& params, num::RngStream init,
           const std::string& prefix = "denoiser.");

  num::Tensor predict(const num::Tensor& xn, const num::Tensor& cond,
                      std::span<const diffusion::NoiseLevel> levels) const override;
  std::size_t dimension() const override { return config_.dimension; }

  const DenoiserConfig& config() const noexcept { return config_; }
  const std::vector<ResidualBlockParams>& blocks() const noexcept { return blocks_; }
  const NoiseEmbeddingTable& embedding() const noexcept { return embedding_; }

 private:
  DenoiserConfig config_;
  NoiseEmbeddingTable embedding_;
  num::Tensor input_weight_, input_bias_;
  num::Tensor upsample_weight_, upsample_bias_;
  std::vector<ResidualBlockParams> blocks_;
  num::Tensor skip_weight_, skip_bias_;
  num::Tensor output_weight_, output_bias_;
};

}  // namespace timegrad::model
