// SPDX-License-Identifier: Apache-2.0
#include "timegrad/model/encoder.hpp"

#include "timegrad/error.hpp"
#include "timegrad/num/ops.hpp"

namespace timegrad::model {

using num::Tensor;

Encoder::Encoder(const EncoderConfig& config, num::ParameterSet& params, num::RngStream init,
                 const std::string& prefix)
    : config_(config) {
  if (config.layers == 0 || config.hidden == 0 || config.input_size == 0) {
    throw ConfigError("encoder: layers, hidden size and input size must be >= 1");
  }
  const std::size_t h = config.hidden;
  const std::size_t gates = config.cell == CellKind::Lstm ? 4 : 3;
  for (std::size_t l = 0; l < config.layers; ++l) {
    const std::string lp = prefix + "layer" + std::to_string(l) + ".";
    const std::size_t in = l == 0 ? config.input_size : h;
    Layer layer;
    layer.w_input = params.add_uniform(lp + "w_input", {in, gates * h}, h, init);
    layer.w_hidden = params.add_uniform(lp + "w_hidden", {h, gates * h}, h, init);
    if (config.cell == CellKind::Lstm) {
      // Gate order i, f, g, o; forget gate starts at 1.
      std::vector<double> bias(gates * h, 0.0);
      std::fill_n(bias.begin() + static_cast<std::ptrdiff_t>(h), h, 1.0);
      layer.bias = params.add(lp + "bias", {gates * h}, std::move(bias));
    } else {
      // Gate order r, z, n.
      layer.bias = params.add_uniform(lp + "bias", {gates * h}, h, init);
      layer.bias_hidden = params.add_uniform(lp + "bias_hidden", {gates * h}, h, init);
    }
    layers_.push_back(std::move(layer));
  }
}

EncoderState Encoder::zero_state(std::size_t batch) const {
  EncoderState s;
  for (std::size_t l = 0; l < config_.layers; ++l) {
    s.hidden.push_back(Tensor::zeros({batch, config_.hidden}));
    if (config_.cell == CellKind::Lstm) s.cell.push_back(Tensor::zeros({batch, config_.hidden}));
  }
  return s;
}

EncoderState Encoder::step(const Tensor& input, const EncoderState& prev) const {
  if (input.rank() != 2 || input.dim(1) != config_.input_size) {
    throw DimensionError("encoder: expected input (B," + std::to_string(config_.input_size) +
                         "), got " + num::shape_str(input.shape()));
  }
  if (prev.hidden.size() != config_.layers || prev.batch() != input.dim(0)) {
    throw DimensionError("encoder: state holds " + std::to_string(prev.hidden.size()) +
                         " layers of batch " + std::to_string(prev.batch()) + ", expected " +
                         std::to_string(config_.layers) + " of batch " +
                         std::to_string(input.dim(0)));
  }
  const std::size_t h = config_.hidden;
  EncoderState next;
  Tensor x = input;
  for (std::size_t l = 0; l < config_.layers; ++l) {
    const Layer& layer = layers_[l];
    const Tensor& h_prev = prev.hidden[l];
    if (config_.cell == CellKind::Lstm) {
      Tensor gates = num::add_rowwise(
          num::add(num::matmul(x, layer.w_input), num::matmul(h_prev, layer.w_hidden)), layer.bias);
      Tensor i = num::sigmoid(num::slice(gates, 1, 0, h));
      Tensor f = num::sigmoid(num::slice(gates, 1, h, h));
      Tensor g = num::tanh(num::slice(gates, 1, 2 * h, h));
      Tensor o = num::sigmoid(num::slice(gates, 1, 3 * h, h));
      Tensor c = num::add(num::mul(f, prev.cell[l]), num::mul(i, g));
      Tensor hn = num::mul(o, num::tanh(c));
      next.cell.push_back(c);
      next.hidden.push_back(hn);
      x = hn;
    } else {
      Tensor xi = num::add_rowwise(num::matmul(x, layer.w_input), layer.bias);
      Tensor hh = num::add_rowwise(num::matmul(h_prev, layer.w_hidden), layer.bias_hidden);
      Tensor r = num::sigmoid(num::add(num::slice(xi, 1, 0, h), num::slice(hh, 1, 0, h)));
      Tensor z = num::sigmoid(num::add(num::slice(xi, 1, h, h), num::slice(hh, 1, h, h)));
      Tensor n = num::tanh(
          num::add(num::slice(xi, 1, 2 * h, h), num::mul(r, num::slice(hh, 1, 2 * h, h))));
      // (1 - z) * n + z * h_prev
      Tensor hn = num::add(n, num::mul(z, num::sub(h_prev, n)));
      next.hidden.push_back(hn);
      x = hn;
    }
  }
  return next;
}

std::vector<EncoderState> Encoder::unroll(std::span<const Tensor> inputs,
                                          const EncoderState& initial) const {
  if (inputs.empty()) throw ContractError("encoder: cannot unroll an empty window");
  std::vector<EncoderState> states;
  states.reserve(inputs.size());
  const EncoderState* prev = &initial;
  for (const Tensor& in : inputs) {
    states.push_back(step(in, *prev));
    prev = &states.back();
  }
  return states;
}

EncoderState repeat_state(const EncoderState& state, std::size_t rows) {
  EncoderState out;
  for (const Tensor& t : state.hidden) out.hidden.push_back(num::broadcast_rows(t, rows));
  for (const Tensor& t : state.cell) out.cell.push_back(num::broadcast_rows(t, rows));
  return out;
}

EncoderState stack_states(std::span<const EncoderState> states) {
  if (states.empty()) throw ContractError("stack_states: nothing to stack");
  EncoderState out;
  const std::size_t depth = states.front().hidden.size();
  std::vector<Tensor> parts;
  for (std::size_t l = 0; l < depth; ++l) {
    parts.clear();
    for (const auto& s : states) parts.push_back(s.hidden[l]);
    out.hidden.push_back(num::concat(parts, 0));
  }
  for (std::size_t l = 0; l < states.front().cell.size(); ++l) {
    parts.clear();
    for (const auto& s : states) parts.push_back(s.cell[l]);
    out.cell.push_back(num::concat(parts, 0));
  }
  return out;
}

}  // namespace timegrad::model
