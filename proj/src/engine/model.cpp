// SPDX-License-Identifier: Apache-2.0
#include "timegrad/engine/model.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

#include "timegrad/error.hpp"
#include "timegrad/num/ops.hpp"

namespace timegrad::engine {

using num::Tensor;

namespace {

model::EncoderConfig encoder_config(const ModelConfig& c) {
  c.validate();
  model::EncoderConfig e;
  e.cell = c.cell;
  e.layers = c.rnn_layers;
  e.hidden = c.rnn_hidden;
  e.input_size = c.input_size();
  return e;
}

model::DenoiserConfig denoiser_config(const ModelConfig& c) {
  model::DenoiserConfig d;
  d.dimension = c.dimension;
  d.cond_size = c.rnn_hidden;
  d.residual_layers = c.residual_layers;
  d.residual_channels = c.residual_channels;
  d.dilation_cycle = c.dilation_cycle;
  d.embedding_dim = c.noise_embedding_dim;
  d.max_levels = c.noise_embedding_max;
  d.spatial_conditioning = c.spatial_conditioning;
  return d;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::size_t to_size(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const unsigned long long n = std::stoull(v, &used);
    if (used != v.size() || v.front() == '-') throw std::invalid_argument(v);
    return static_cast<std::size_t>(n);
  } catch (const std::exception&) {
    throw ConfigError("model config: '" + key + "' expects a non-negative integer, got '" + v + "'");
  }
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("model config: '" + key + "' expects a number, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("model config: '" + key + "' expects true or false, got '" + v + "'");
}

}  // namespace

std::size_t ModelConfig::covariate_width() const {
  return data::covariate_width(frequency, covariates, dimension);
}

std::size_t ModelConfig::input_size() const {
  return dimension + covariate_width() + dimension * entity_embedding_dim;
}

std::size_t ModelConfig::max_lag() const {
  return covariates.lags.empty() ? 0 : *std::max_element(covariates.lags.begin(), covariates.lags.end());
}

void ModelConfig::validate() const {
  if (dimension == 0) throw ConfigError("model: dimension must be >= 1");
  if (prediction_length == 0) throw ConfigError("model: prediction length must be >= 1");
  if (rnn_layers == 0 || rnn_hidden == 0) throw ConfigError("model: rnn layers and hidden size must be >= 1");
  if (residual_layers == 0 || residual_channels == 0 || dilation_cycle == 0) {
    throw ConfigError("model: residual layers, channels and dilation cycle must be >= 1");
  }
  if (noise_embedding_dim == 0 || noise_embedding_dim % 2 != 0) {
    throw ConfigError("model: noise embedding dimension must be even and positive");
  }
  if (diffusion_levels == 0 || diffusion_levels > noise_embedding_max) {
    throw ConfigError("model: diffusion levels must lie in [1, " + std::to_string(noise_embedding_max) + "]");
  }
  for (std::size_t lag : covariates.lags) {
    if (lag == 0) throw ConfigError("model: lag indices must be positive");
  }
  diffusion::DiffusionSchedule::linear(diffusion_levels, beta_first, beta_last);
}

std::string serialize_config(const ModelConfig& c) {
  std::ostringstream out;
  out << "dimension=" << c.dimension << '\n';
  out << "frequency=" << data::frequency_name(c.frequency) << '\n';
  out << "prediction_length=" << c.prediction_length << '\n';
  out << "calendar=" << (c.covariates.calendar ? "true" : "false") << '\n';
  out << "lags=";
  for (std::size_t i = 0; i < c.covariates.lags.size(); ++i) out << (i ? "," : "") << c.covariates.lags[i];
  out << '\n';
  out << "cell=" << (c.cell == model::CellKind::Lstm ? "lstm" : "gru") << '\n';
  out << "rnn_layers=" << c.rnn_layers << '\n';
  out << "rnn_hidden=" << c.rnn_hidden << '\n';
  out << "residual_layers=" << c.residual_layers << '\n';
  out << "residual_channels=" << c.residual_channels << '\n';
  out << "dilation_cycle=" << c.dilation_cycle << '\n';
  out << "noise_embedding_dim=" << c.noise_embedding_dim << '\n';
  out << "noise_embedding_max=" << c.noise_embedding_max << '\n';
  out << "spatial_conditioning=" << (c.spatial_conditioning ? "true" : "false") << '\n';
  out << "entity_embedding_dim=" << c.entity_embedding_dim << '\n';
  out << "diffusion_levels=" << c.diffusion_levels << '\n';
  out << "beta_first=" << format_double(c.beta_first) << '\n';
  out << "beta_last=" << format_double(c.beta_last) << '\n';
  return out.str();
}

ModelConfig parse_model_config(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("model config: malformed line '" + line + "'");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  ModelConfig c;
  for (const auto& [key, v] : kv) {
    if (key == "dimension") c.dimension = to_size(key, v);
    else if (key == "frequency") c.frequency = data::parse_frequency(v);
    else if (key == "prediction_length") c.prediction_length = to_size(key, v);
    else if (key == "calendar") c.covariates.calendar = to_bool(key, v);
    else if (key == "lags") {
      c.covariates.lags.clear();
      std::istringstream ls(v);
      std::string item;
      while (std::getline(ls, item, ',')) {
        if (!item.empty()) c.covariates.lags.push_back(to_size(key, item));
      }
    } else if (key == "cell") {
      if (v == "lstm") c.cell = model::CellKind::Lstm;
      else if (v == "gru") c.cell = model::CellKind::Gru;
      else throw ConfigError("model config: unknown cell '" + v + "'");
    } else if (key == "rnn_layers") c.rnn_layers = to_size(key, v);
    else if (key == "rnn_hidden") c.rnn_hidden = to_size(key, v);
    else if (key == "residual_layers") c.residual_layers = to_size(key, v);
    else if (key == "residual_channels") c.residual_channels = to_size(key, v);
    else if (key == "dilation_cycle") c.dilation_cycle = to_size(key, v);
    else if (key == "noise_embedding_dim") c.noise_embedding_dim = to_size(key, v);
    else if (key == "noise_embedding_max") c.noise_embedding_max = to_size(key, v);
    else if (key == "spatial_conditioning") c.spatial_conditioning = to_bool(key, v);
    else if (key == "entity_embedding_dim") c.entity_embedding_dim = to_size(key, v);
    else if (key == "diffusion_levels") c.diffusion_levels = to_size(key, v);
    else if (key == "beta_first") c.beta_first = to_double(key, v);
    else if (key == "beta_last") c.beta_last = to_double(key, v);
    else throw ConfigError("model config: unknown key '" + key + "'");
  }
  c.validate();
  return c;
}

TimeGradModel::TimeGradModel(const ModelConfig& config, std::uint64_t init_seed)
    : config_(config),
      schedule_(diffusion::DiffusionSchedule::linear(config.diffusion_levels, config.beta_first,
                                                     config.beta_last)),
      encoder_(encoder_config(config), params_, num::RngStream(init_seed).split(1)),
      denoiser_(denoiser_config(config), params_, num::RngStream(init_seed).split(2)) {
  if (config.entity_embedding_dim > 0) {
    num::RngStream rng = num::RngStream(init_seed).split(3);
    std::vector<double> init(config.dimension * config.entity_embedding_dim);
    rng.fill_normal(init);
    entity_embedding_ = params_.add("entity_embedding",
                                    {config.dimension * config.entity_embedding_dim}, std::move(init));
  }
}

Tensor TimeGradModel::encoder_input(const Tensor& observation, const Tensor& covariates) const {
  const std::size_t rows = observation.dim(0);
  std::vector<Tensor> parts{observation};
  if (config_.covariate_width() > 0) parts.push_back(covariates);
  if (entity_embedding_.defined()) parts.push_back(num::broadcast_rows(entity_embedding_, rows));
  return parts.size() == 1 ? observation : num::concat(parts, 1);
}

}  // namespace timegrad::engine
