// SPDX-License-Identifier: Apache-2.0
#include "timegrad/model/denoiser.hpp"

#include <cmath>
#include <map>

#include "timegrad/error.hpp"
#include "timegrad/num/ops.hpp"

namespace timegrad::model {

using num::Tensor;

NoiseEmbeddingTable::NoiseEmbeddingTable(std::size_t max_index, std::size_t dim)
    : max_index_(max_index), dim_(dim) {
  if (max_index == 0 || dim == 0 || dim % 2 != 0) {
    throw ConfigError("noise embedding: need max_index >= 1 and an even dimension");
  }
}

std::vector<double> NoiseEmbeddingTable::embed(std::size_t n) const {
  if (n < 1 || n > max_index_) {
    throw ContractError("noise embedding: index " + std::to_string(n) + " outside [1, " +
                        std::to_string(max_index_) + "]");
  }
  std::vector<double> out(dim_);
  const double base = static_cast<double>(max_index_);
  for (std::size_t j = 0; j < dim_ / 2; ++j) {
    const double freq = std::pow(base, static_cast<double>(2 * j) / static_cast<double>(dim_));
    const double angle = static_cast<double>(n) / freq;
    out[2 * j] = std::sin(angle);
    out[2 * j + 1] = std::cos(angle);
  }
  return out;
}

Tensor NoiseEmbeddingTable::rows(std::span<const std::size_t> levels) const {
  std::vector<double> values;
  values.reserve(levels.size() * dim_);
  for (std::size_t n : levels) {
    auto e = embed(n);
    values.insert(values.end(), e.begin(), e.end());
  }
  return Tensor::from({levels.size(), dim_}, std::move(values));
}

BlockOutput residual_block_forward(const Tensor& x, const BlockConditioning& cond,
                                   const ResidualBlockParams& p) {
  try {
    const std::size_t channels = p.out_weight.dim(1);
    if (x.rank() != 3 || x.dim(1) != channels) {
      throw DimensionError("expected (B," + std::to_string(channels) + ",D) input, got " +
                           num::shape_str(x.shape()));
    }
    const std::size_t width = x.dim(2);

    Tensor global = num::add_rowwise(num::matmul(cond.cond, p.cond_weight), p.cond_bias);
    Tensor noise = num::gather_rows(num::matmul(cond.noise_table, p.noise_weight), cond.noise_rows);
    Tensor pre = num::add(num::conv1d_circular(x, p.dilated_weight, p.dilated_bias, p.dilation),
                          num::broadcast_spatial(num::add(global, noise), width));
    if (p.spatial_weight.defined()) {
      pre = num::add(pre, num::conv1d_circular(cond.spatial, p.spatial_weight, 1));
    }
    Tensor gate = num::mul(num::sigmoid(num::slice(pre, 1, 0, channels)),
                           num::tanh(num::slice(pre, 1, channels, channels)));
    Tensor out = num::conv1d_circular(gate, p.out_weight, p.out_bias, 1);
    Tensor residual =
        num::scale(num::add(x, num::slice(out, 1, 0, channels)), 1.0 / std::sqrt(2.0));
    return {residual, num::slice(out, 1, channels, channels)};
  } catch (const DimensionError& e) {
    throw DimensionError("residual block " + std::to_string(p.index) + ": " + e.what());
  }
}

Denoiser::Denoiser(const DenoiserConfig& config, num::ParameterSet& params, num::RngStream init,
                   const std::string& prefix)
    : config_(config), embedding_(config.max_levels, config.embedding_dim) {
  if (config.dimension == 0 || config.cond_size == 0 || config.residual_layers == 0 ||
      config.residual_channels == 0 || config.dilation_cycle == 0) {
    throw ConfigError("denoiser: sizes must be positive");
  }
  const std::size_t c = config.residual_channels;
  const std::size_t h = config.cond_size;
  const std::size_t e = config.embedding_dim;

  input_weight_ = params.add_uniform(prefix + "input.weight", {c, 1, 1}, 1, init);
  input_bias_ = params.add_uniform(prefix + "input.bias", {c}, 1, init);
  if (config.spatial_conditioning) {
    upsample_weight_ = params.add_uniform(prefix + "upsample.weight", {h, config.dimension}, h, init);
    upsample_bias_ = params.add_uniform(prefix + "upsample.bias", {config.dimension}, h, init);
  }
  for (std::size_t i = 0; i < config.residual_layers; ++i) {
    const std::string bp = prefix + "block" + std::to_string(i) + ".";
    ResidualBlockParams b;
    b.index = i;
    b.dilation = std::size_t{1} << (i % config.dilation_cycle);
    b.dilated_weight = params.add_uniform(bp + "dilated.weight", {2 * c, c, 3}, 3 * c, init);
    b.dilated_bias = params.add_uniform(bp + "dilated.bias", {2 * c}, 3 * c, init);
    b.cond_weight = params.add_uniform(bp + "cond.weight", {h, 2 * c}, h, init);
    b.cond_bias = params.add_uniform(bp + "cond.bias", {2 * c}, h, init);
    b.noise_weight = params.add_uniform(bp + "noise.weight", {e, 2 * c}, e, init);
    if (config.spatial_conditioning) {
      b.spatial_weight = params.add_uniform(bp + "spatial.weight", {2 * c, 1, 1}, 1, init);
    }
    b.out_weight = params.add_uniform(bp + "out.weight", {2 * c, c, 1}, c, init);
    b.out_bias = params.add_uniform(bp + "out.bias", {2 * c}, c, init);
    blocks_.push_back(std::move(b));
  }
  skip_weight_ = params.add_uniform(prefix + "skip.weight", {c, c, 1}, c, init);
  skip_bias_ = params.add_uniform(prefix + "skip.bias", {c}, c, init);
  output_weight_ = params.add_constant(prefix + "output.weight", {1, c, 1}, 0.0);
  output_bias_ = params.add_constant(prefix + "output.bias", {1}, 0.0);
}

Tensor Denoiser::predict(const Tensor& xn, const Tensor& cond,
                         std::span<const diffusion::NoiseLevel> levels) const {
  const std::size_t width = config_.dimension;
  if (xn.rank() != 2 || xn.dim(1) != width || xn.dim(0) != levels.size()) {
    throw DimensionError("denoiser: expected (" + std::to_string(levels.size()) + "," +
                         std::to_string(width) + ") input, got " + num::shape_str(xn.shape()));
  }
  if (cond.rank() != 2 || cond.dim(0) != levels.size() || cond.dim(1) != config_.cond_size) {
    throw DimensionError("denoiser: expected (" + std::to_string(levels.size()) + "," +
                         std::to_string(config_.cond_size) + ") conditioning, got " +
                         num::shape_str(cond.shape()));
  }
  const std::size_t batch = levels.size();

  BlockConditioning bc;
  bc.cond = cond;
  std::map<std::size_t, std::size_t> slot;
  std::vector<std::size_t> distinct;
  bc.noise_rows.reserve(batch);
  for (const auto& n : levels) {
    auto [it, inserted] = slot.emplace(n.value, distinct.size());
    if (inserted) distinct.push_back(n.value);
    bc.noise_rows.push_back(it->second);
  }
  bc.noise_table = embedding_.rows(distinct);
  if (config_.spatial_conditioning) {
    bc.spatial = num::reshape(
        num::add_rowwise(num::matmul(cond, upsample_weight_), upsample_bias_), {batch, 1, width});
  }

  Tensor x = num::conv1d_circular(num::reshape(xn, {batch, 1, width}), input_weight_, input_bias_, 1);
  Tensor skip_sum;
  for (const auto& block : blocks_) {
    BlockOutput out = residual_block_forward(x, bc, block);
    x = out.residual;
    skip_sum = skip_sum.defined() ? num::add(skip_sum, out.skip) : out.skip;
  }
  skip_sum = num::scale(skip_sum, 1.0 / std::sqrt(static_cast<double>(blocks_.size())));
  Tensor hidden = num::softplus(num::conv1d_circular(skip_sum, skip_weight_, skip_bias_, 1));
  Tensor out = num::conv1d_circular(hidden, output_weight_, output_bias_, 1);
  return num::reshape(out, {batch, width});
}

}  // namespace timegrad::model
