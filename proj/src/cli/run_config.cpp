// SPDX-License-Identifier: Apache-2.0
#include "timegrad/cli/run_config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "timegrad/data/covariates.hpp"
#include "timegrad/error.hpp"

namespace timegrad::cli {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

const std::vector<std::pair<std::string, std::string>>& RunConfig::defaults() {
  static const std::vector<std::pair<std::string, std::string>> table = {
      {"data.path", ""},
      {"data.format", "csv_wide"},
      {"data.frequency", "hour"},
      {"data.prediction_length", "24"},
      {"data.test_windows", "1"},
      {"covariates.calendar", "true"},
      {"covariates.lags", "default"},
      {"covariates.entity_embedding_dim", "0"},
      {"model.cell", "lstm"},
      {"model.rnn_layers", "2"},
      {"model.rnn_hidden", "40"},
      {"model.residual_layers", "8"},
      {"model.residual_channels", "8"},
      {"model.dilation_cycle", "2"},
      {"model.noise_embedding_dim", "32"},
      {"model.spatial_conditioning", "true"},
      {"diffusion.steps", "100"},
      {"diffusion.beta_first", "1e-4"},
      {"diffusion.beta_last", "0.1"},
      {"train.learning_rate", "1e-3"},
      {"train.batch_size", "64"},
      {"train.max_epochs", "20"},
      {"train.batches_per_epoch", "50"},
      {"train.patience", "5"},
      {"train.seed", "0"},
      {"train.validation_replicates", "8"},
      {"forecast.samples", "100"},
      {"forecast.quantiles", "0.05,0.25,0.5,0.75,0.95"},
      {"forecast.seed", "0"},
      {"forecast.mode", "rolling"},
      {"output.dir", "out"},
      {"output.checkpoint", "model.ckpt"},
      {"ablation.levels", "2,4,8,16,32,64,128,256"},
      {"ablation.repeats", "5"},
      {"generate.kind", "var"},
      {"generate.length", "2100"},
      {"generate.seed", "0"},
      {"generate.name", "synthetic.csv"},
  };
  return table;
}

std::string RunConfig::env_name(const std::string& key) {
  std::string out = kEnvPrefix;
  for (char c : key) {
    out.push_back(c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  return out;
}

RunConfig::RunConfig() {
  for (const auto& [k, v] : defaults()) values_[k] = {v, Source::Default};
}

void RunConfig::set(const std::string& key, const std::string& value, Source source) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown configuration key '" + key + "'");
  it->second = {value, source};
}

void RunConfig::apply_text(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'section.key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    if (values_.find(key) == values_.end()) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": unknown configuration key '" + key + "'");
    }
    set(key, trim(line.substr(eq + 1)), Source::File);
  }
}

void RunConfig::apply_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  apply_text(buf.str(), path);
}

void RunConfig::apply_environment(
    const std::function<std::optional<std::string>(const std::string&)>& lookup) {
  for (const auto& [key, unused] : defaults()) {
    if (auto v = lookup(env_name(key))) set(key, *v, Source::Environment);
  }
}

void RunConfig::apply_environment() {
  apply_environment([](const std::string& name) -> std::optional<std::string> {
    if (const char* v = std::getenv(name.c_str())) return std::string(v);
    return std::nullopt;
  });
}

void RunConfig::apply_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("expected section.key=value, got '" + assignment + "'");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)), Source::Flag);
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown configuration key '" + key + "'");
  return it->second.first;
}

RunConfig::Source RunConfig::source(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown configuration key '" + key + "'");
  return it->second.second;
}

std::size_t RunConfig::get_size(const std::string& key) const {
  return static_cast<std::size_t>(get_u64(key));
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
  const std::string& v = get(key);
  try {
    std::size_t used = 0;
    if (v.empty() || v.front() == '-') throw std::invalid_argument(v);
    const auto n = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return n;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  }
}

double RunConfig::get_double(const std::string& key) const {
  const std::string& v = get(key);
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
}

bool RunConfig::get_bool(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::vector<std::size_t> RunConfig::get_size_list(const std::string& key) const {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(get(key))) {
    try {
      std::size_t used = 0;
      if (item.front() == '-') throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(std::stoull(item, &used)));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(key + ": expected a list of non-negative integers, got '" + get(key) + "'");
    }
  }
  return out;
}

std::vector<double> RunConfig::get_double_list(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : split_list(get(key))) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(key + ": expected a list of numbers, got '" + get(key) + "'");
    }
  }
  return out;
}

engine::ModelConfig RunConfig::model_config(std::size_t dimension) const {
  engine::ModelConfig c;
  c.dimension = dimension;
  c.frequency = data::parse_frequency(get("data.frequency"));
  c.prediction_length = get_size("data.prediction_length");
  c.covariates.calendar = get_bool("covariates.calendar");
  c.covariates.lags = get("covariates.lags") == "default" ? data::default_lags(c.frequency)
                                                          : get_size_list("covariates.lags");
  c.entity_embedding_dim = get_size("covariates.entity_embedding_dim");
  const std::string& cell = get("model.cell");
  if (cell == "lstm") c.cell = model::CellKind::Lstm;
  else if (cell == "gru") c.cell = model::CellKind::Gru;
  else throw ConfigError("model.cell: expected lstm or gru, got '" + cell + "'");
  c.rnn_layers = get_size("model.rnn_layers");
  c.rnn_hidden = get_size("model.rnn_hidden");
  c.residual_layers = get_size("model.residual_layers");
  c.residual_channels = get_size("model.residual_channels");
  c.dilation_cycle = get_size("model.dilation_cycle");
  c.noise_embedding_dim = get_size("model.noise_embedding_dim");
  c.spatial_conditioning = get_bool("model.spatial_conditioning");
  c.diffusion_levels = get_size("diffusion.steps");
  c.beta_first = get_double("diffusion.beta_first");
  c.beta_last = get_double("diffusion.beta_last");
  c.validate();
  return c;
}

engine::TrainConfig RunConfig::train_config() const {
  engine::TrainConfig t;
  t.learning_rate = get_double("train.learning_rate");
  t.batch_size = get_size("train.batch_size");
  t.max_epochs = get_size("train.max_epochs");
  t.batches_per_epoch = get_size("train.batches_per_epoch");
  t.patience = get_size("train.patience");
  t.seed = get_u64("train.seed");
  t.validation_replicates = get_size("train.validation_replicates");
  t.test_windows = get_size("data.test_windows");
  t.validate();
  return t;
}

std::string RunConfig::dump() const {
  std::string out;
  for (const auto& [key, unused] : defaults()) out += key + " = " + get(key) + "\n";
  return out;
}

}  // namespace timegrad::cli
