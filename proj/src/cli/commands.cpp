// SPDX-License-Identifier: Apache-2.0
#include "timegrad/cli/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "timegrad/data/dataset.hpp"
#include "timegrad/data/window.hpp"
#include "timegrad/diffusion/schedule.hpp"
#include "timegrad/engine/checkpoint.hpp"
#include "timegrad/engine/synthetic.hpp"
#include "timegrad/engine/train.hpp"

namespace timegrad::cli {

namespace fs = std::filesystem;

namespace {

constexpr int kCsvSchemaVersion = 1;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

fs::path output_dir(const RunConfig& config) {
  const std::string& dir = config.get("output.dir");
  if (dir.empty()) throw ConfigError("output.dir is empty");
  return fs::path(dir);
}

/// A path inside output.dir; absolute paths and '..' are refused.
fs::path output_file(const RunConfig& config, const std::string& name) {
  const fs::path rel(name);
  if (rel.empty() || rel.is_absolute()) {
    throw ConfigError("output file '" + name + "' must be a relative path inside output.dir");
  }
  for (const auto& part : rel) {
    if (part == "..") throw ConfigError("output file '" + name + "' escapes output.dir");
  }
  return output_dir(config) / rel;
}

void ensure_output_dir(const RunConfig& config) {
  std::error_code ec;
  fs::create_directories(output_dir(config), ec);
  if (ec) throw ConfigError("cannot create output directory '" + config.get("output.dir") + "': " + ec.message());
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  return out;
}

data::Dataset load_configured_dataset(const RunConfig& config) {
  const std::string& path = config.get("data.path");
  if (path.empty()) throw ConfigError("data.path is not set");
  if (!fs::exists(path)) throw ConfigError("dataset '" + path + "' does not exist");
  return data::load_dataset(path, data::parse_data_format(config.get("data.format")),
                            data::parse_frequency(config.get("data.frequency")));
}

std::vector<double> quantile_levels(const RunConfig& config) {
  auto levels = config.get_double_list("forecast.quantiles");
  if (levels.empty()) throw ConfigError("forecast.quantiles is empty");
  for (double p : levels) {
    if (!(p > 0.0 && p < 1.0)) throw ConfigError("forecast.quantiles: level " + num(p) + " outside (0, 1)");
  }
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  return levels;
}

std::vector<engine::ForecastSampleSet> run_forecasts(const engine::TimeGradModel& model,
                                                     const data::Dataset& ds, const RunConfig& config,
                                                     std::uint64_t seed) {
  const std::size_t samples = config.get_size("forecast.samples");
  if (samples == 0) throw ConfigError("forecast.samples must be >= 1");
  const num::RngStream rng(seed);
  const std::string& mode = config.get("forecast.mode");
  if (mode == "rolling") {
    return engine::forecast_rolling(model, ds, config.get_size("data.test_windows"), samples, rng);
  }
  if (mode == "future") return {engine::forecast_future(model, ds, samples, rng)};
  throw ConfigError("forecast.mode: expected rolling or future, got '" + mode + "'");
}

double window_mean_crps_sum(std::span<const engine::ForecastSampleSet> forecasts) {
  double total = 0.0;
  for (const auto& f : forecasts) {
    if (f.truth.empty()) throw DataError("forecast window has no ground truth to score against");
    total += metrics::crps_sum(f.samples, f.truth);
  }
  return total / static_cast<double>(forecasts.size());
}

}  // namespace

int exit_code(ErrorClass cls) {
  switch (cls) {
    case ErrorClass::Config: return kExitConfigError;
    case ErrorClass::Data: return kExitDataError;
    case ErrorClass::Numeric: return kExitNumericError;
  }
  return kExitConfigError;
}

const char* error_class_name(ErrorClass cls) {
  switch (cls) {
    case ErrorClass::Config: return "CONFIG_ERROR";
    case ErrorClass::Data: return "DATA_ERROR";
    case ErrorClass::Numeric: return "NUMERIC_ERROR";
  }
  return "CONFIG_ERROR";
}

std::string version_text() {
  return "timegrad 1.0.0\ncheckpoint format " + std::to_string(engine::kCheckpointVersion) +
         "\ncsv schema " + std::to_string(kCsvSchemaVersion) + "\n";
}

void cmd_train(const RunConfig& config, std::ostream& log) {
  const data::Dataset ds = load_configured_dataset(config);
  const engine::ModelConfig mc = config.model_config(ds.dimension);
  const engine::TrainConfig tc = config.train_config();
  const fs::path ckpt_path = output_file(config, config.get("output.checkpoint"));
  const fs::path log_path = output_file(config, "train_log.csv");
  data::split(ds, mc.prediction_length, tc.test_windows);

  ensure_output_dir(config);
  std::ofstream csv = open_output(log_path);
  const std::string header = "epoch,train_loss,val_loss,best";
  csv << header << '\n';
  log << header << '\n';
  const auto result = engine::train(ds, mc, tc, [&](const engine::EpochRecord& r) {
    const std::string line = std::to_string(r.epoch) + "," + num(r.train_loss) + "," +
                             num(r.validation_loss) + "," + num(r.best_validation_loss);
    csv << line << '\n';
    log << line << '\n';
  });
  engine::save_checkpoint(ckpt_path.string(), result.model, result.best_validation_loss, tc.seed);
  log << "checkpoint: " << ckpt_path.string() << '\n';
}

void write_samples_csv(std::ostream& out, std::span<const engine::ForecastSampleSet> forecasts) {
  out << "window,trajectory,t,entity,value\n";
  for (std::size_t w = 0; w < forecasts.size(); ++w) {
    const auto& cube = forecasts[w].samples;
    for (std::size_t s = 0; s < cube.samples; ++s) {
      for (std::size_t t = 0; t < cube.steps; ++t) {
        for (std::size_t d = 0; d < cube.dimension; ++d) {
          out << w << ',' << s << ',' << t << ',' << d << ',' << num(cube.at(s, t, d)) << '\n';
        }
      }
    }
  }
}

void write_quantiles_csv(std::ostream& out, std::span<const engine::ForecastSampleSet> forecasts,
                         std::span<const double> levels) {
  out << "window,t,entity,level,value\n";
  for (std::size_t w = 0; w < forecasts.size(); ++w) {
    const auto& cube = forecasts[w].samples;
    const auto q = engine::quantiles(cube, levels);
    for (std::size_t t = 0; t < cube.steps; ++t) {
      for (std::size_t d = 0; d < cube.dimension; ++d) {
        for (std::size_t k = 0; k < levels.size(); ++k) {
          out << w << ',' << t << ',' << d << ',' << num(levels[k]) << ','
              << num(q[(t * cube.dimension + d) * levels.size() + k]) << '\n';
        }
      }
    }
  }
}

std::string plot_json(std::span<const engine::ForecastSampleSet> forecasts,
                      std::span<const double> levels) {
  nlohmann::ordered_json root;
  root["levels"] = std::vector<double>(levels.begin(), levels.end());
  auto& windows = root["windows"] = nlohmann::ordered_json::array();
  const std::vector<double> median_level{0.5};
  for (std::size_t w = 0; w < forecasts.size(); ++w) {
    const auto& f = forecasts[w];
    const auto& cube = f.samples;
    const auto q = engine::quantiles(cube, levels);
    const auto med = engine::quantiles(cube, median_level);
    nlohmann::ordered_json jw;
    jw["window"] = w;
    jw["forecast_start"] = f.window.forecast_start();
    auto& entities = jw["entities"] = nlohmann::ordered_json::array();
    for (std::size_t d = 0; d < cube.dimension; ++d) {
      nlohmann::ordered_json je;
      je["entity"] = d;
      std::vector<double> median(cube.steps);
      std::vector<std::string> stamps;
      for (std::size_t t = 0; t < cube.steps; ++t) median[t] = med[t * cube.dimension + d];
      for (const auto& ts : f.timestamps) stamps.push_back(data::format_timestamp(ts, data::Frequency::Hour));
      je["timestamps"] = stamps;
      je["median"] = median;
      auto& bands = je["bands"] = nlohmann::ordered_json::array();
      for (std::size_t k = 0; k < levels.size() / 2; ++k) {
        const std::size_t hi = levels.size() - 1 - k;
        std::vector<double> lower(cube.steps), upper(cube.steps);
        for (std::size_t t = 0; t < cube.steps; ++t) {
          lower[t] = q[(t * cube.dimension + d) * levels.size() + k];
          upper[t] = q[(t * cube.dimension + d) * levels.size() + hi];
        }
        nlohmann::ordered_json jb;
        jb["lower_level"] = levels[k];
        jb["upper_level"] = levels[hi];
        jb["lower"] = lower;
        jb["upper"] = upper;
        bands.push_back(jb);
      }
      if (!f.truth.empty()) {
        std::vector<double> truth(cube.steps);
        for (std::size_t t = 0; t < cube.steps; ++t) truth[t] = f.truth[t * cube.dimension + d];
        je["truth"] = truth;
      }
      entities.push_back(je);
    }
    windows.push_back(jw);
  }
  return root.dump(1) + "\n";
}

std::vector<metrics::SampleCube> read_samples_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line) || line != "window,trajectory,t,entity,value") {
    throw DataError(source + ": expected header 'window,trajectory,t,entity,value'");
  }
  struct Cell {
    std::size_t w, s, t, d;
    double v;
  };
  std::vector<Cell> cells;
  std::size_t row = 0;
  std::size_t max_w = 0, max_s = 0, max_t = 0, max_d = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    Cell c{};
    char tail = 0;
    unsigned long long w = 0, s = 0, t = 0, d = 0;
    if (std::sscanf(line.c_str(), "%llu,%llu,%llu,%llu,%lf%c", &w, &s, &t, &d, &c.v, &tail) != 5 ||
        !std::isfinite(c.v)) {
      throw DataError(source + ": row " + std::to_string(row) + " is not 'window,trajectory,t,entity,value'");
    }
    c.w = w, c.s = s, c.t = t, c.d = d;
    max_w = std::max(max_w, c.w), max_s = std::max(max_s, c.s);
    max_t = std::max(max_t, c.t), max_d = std::max(max_d, c.d);
    cells.push_back(c);
  }
  if (cells.empty()) throw DataError(source + ": no samples");
  std::vector<metrics::SampleCube> cubes(max_w + 1, metrics::SampleCube(max_s + 1, max_t + 1, max_d + 1));
  std::vector<std::size_t> filled(max_w + 1, 0);
  for (const auto& c : cells) {
    cubes[c.w].at(c.s, c.t, c.d) = c.v;
    ++filled[c.w];
  }
  for (std::size_t w = 0; w <= max_w; ++w) {
    if (filled[w] != cubes[w].values.size()) {
      throw DataError(source + ": window " + std::to_string(w) + " is incomplete (" +
                      std::to_string(filled[w]) + " of " + std::to_string(cubes[w].values.size()) +
                      " values)");
    }
  }
  return cubes;
}

void cmd_forecast(const RunConfig& config, std::ostream& log) {
  const data::Dataset ds = load_configured_dataset(config);
  const fs::path ckpt_path = output_file(config, config.get("output.checkpoint"));
  const auto levels = quantile_levels(config);
  engine::Checkpoint ck = engine::load_checkpoint(ckpt_path.string());
  if (ck.model.config().dimension != ds.dimension) {
    throw DataError("checkpoint expects " + std::to_string(ck.model.config().dimension) +
                    " entities, dataset has " + std::to_string(ds.dimension));
  }
  if (ck.model.config().prediction_length != config.get_size("data.prediction_length")) {
    throw DataError("checkpoint prediction length " + std::to_string(ck.model.config().prediction_length) +
                    " differs from data.prediction_length " + config.get("data.prediction_length"));
  }
  const auto forecasts = run_forecasts(ck.model, ds, config, config.get_u64("forecast.seed"));

  ensure_output_dir(config);
  {
    auto out = open_output(output_file(config, "samples.csv"));
    write_samples_csv(out, forecasts);
  }
  {
    auto out = open_output(output_file(config, "quantiles.csv"));
    write_quantiles_csv(out, forecasts, levels);
  }
  {
    auto out = open_output(output_file(config, "plot.json"));
    out << plot_json(forecasts, levels);
  }
  log << "forecast: " << forecasts.size() << " window(s), " << config.get("forecast.samples")
      << " trajectories each\n";
}

void cmd_evaluate(const RunConfig& config, std::ostream& log) {
  const data::Dataset ds = load_configured_dataset(config);
  const fs::path samples_path = output_file(config, "samples.csv");
  std::ifstream in(samples_path);
  if (!in) throw ConfigError("cannot open forecast samples '" + samples_path.string() + "'");
  const auto cubes = read_samples_csv(in, samples_path.string());

  const std::size_t len = config.get_size("data.prediction_length");
  const std::size_t test_windows = config.get_size("data.test_windows");
  const auto parts = data::split(ds, len, test_windows);
  const auto windows = data::rolling_windows(parts.test, len);
  if (cubes.size() != windows.size()) {
    throw DataError("forecast holds " + std::to_string(cubes.size()) + " window(s), test span has " +
                    std::to_string(windows.size()));
  }
  std::vector<metrics::CrpsReport> reports;
  for (std::size_t w = 0; w < windows.size(); ++w) {
    if (cubes[w].steps != len) {
      throw DataError("forecast horizon " + std::to_string(cubes[w].steps) +
                      " does not match prediction length " + std::to_string(len));
    }
    if (cubes[w].dimension != ds.dimension) {
      throw DataError("forecast covers " + std::to_string(cubes[w].dimension) + " entities, dataset has " +
                      std::to_string(ds.dimension));
    }
    const auto truth = data::window_values(ds, windows[w].forecast_start(), len);
    reports.push_back(metrics::evaluate_window(cubes[w], truth));
  }
  const auto report = metrics::average_reports(reports);

  ensure_output_dir(config);
  {
    auto out = open_output(output_file(config, "metrics.json"));
    out << metrics::report_json(report) << '\n';
  }
  {
    auto out = open_output(output_file(config, "metrics_per_entity.csv"));
    out << "entity,crps\n";
    for (std::size_t d = 0; d < report.crps_per_entity.size(); ++d) {
      out << d << ',' << num(report.crps_per_entity[d]) << '\n';
    }
  }
  log << "crps_sum: " << num(report.crps_sum) << '\n';
}

void cmd_ablate_n(const RunConfig& config, std::ostream& log) {
  const data::Dataset ds = load_configured_dataset(config);
  const auto levels = config.get_size_list("ablation.levels");
  if (levels.empty()) throw ConfigError("ablation.levels is empty");
  for (std::size_t n : levels) {
    if (n == 0) throw ConfigError("ablation.levels: diffusion lengths must be positive");
  }
  const std::size_t repeats = config.get_size("ablation.repeats");
  if (repeats == 0) throw ConfigError("ablation.repeats must be >= 1");
  const engine::TrainConfig base_train = config.train_config();
  const std::uint64_t forecast_seed = config.get_u64("forecast.seed");
  config.model_config(ds.dimension);

  ensure_output_dir(config);
  auto csv = open_output(output_file(config, "ablation.csv"));
  csv << "N,crps_sum,stderr\n";
  for (std::size_t n : levels) {
    try {
      RunConfig per_n = config;
      per_n.set("diffusion.steps", std::to_string(n), RunConfig::Source::Flag);
      const engine::ModelConfig mc = per_n.model_config(ds.dimension);
      std::vector<double> scores;
      for (std::size_t r = 0; r < repeats; ++r) {
        engine::TrainConfig tc = base_train;
        tc.seed = base_train.seed + r;
        const auto result = engine::train(ds, mc, tc);
        const auto forecasts = run_forecasts(result.model, ds, per_n, forecast_seed + r);
        scores.push_back(window_mean_crps_sum(forecasts));
      }
      double mean = 0.0;
      for (double s : scores) mean += s;
      mean /= static_cast<double>(scores.size());
      double var = 0.0;
      for (double s : scores) var += (s - mean) * (s - mean);
      const double stderr_ = scores.size() > 1
                                 ? std::sqrt(var / static_cast<double>(scores.size() - 1)) /
                                       std::sqrt(static_cast<double>(scores.size()))
                                 : 0.0;
      csv << n << ',' << num(mean) << ',' << num(stderr_) << '\n';
      log << "N=" << n << " crps_sum=" << num(mean) << " stderr=" << num(stderr_) << '\n';
    } catch (const Error& e) {
      csv << n << ",nan,nan\n";
      log << "N=" << n << " failed: " << error_class_name(e.error_class()) << ": " << e.what() << '\n';
    }
  }
}

void cmd_schedule(const RunConfig& config, std::ostream& out) {
  const auto sched = diffusion::DiffusionSchedule::linear(
      config.get_size("diffusion.steps"), config.get_double("diffusion.beta_first"),
      config.get_double("diffusion.beta_last"));
  out << "n,beta,alpha_bar,tilde_beta\n";
  for (std::size_t n = 1; n <= sched.levels(); ++n) {
    const diffusion::NoiseLevel level{n};
    out << n << ',' << num(sched.beta(level)) << ',' << num(sched.alpha_bar(level)) << ','
        << num(sched.tilde_beta(level)) << '\n';
  }
}

void cmd_generate(const RunConfig& config, std::ostream& log) {
  const std::string& kind = config.get("generate.kind");
  const std::size_t length = config.get_size("generate.length");
  const std::uint64_t seed = config.get_u64("generate.seed");
  data::Dataset ds;
  if (kind == "var") ds = engine::generate_var(engine::VarProcess{}, length, seed);
  else if (kind == "ar1") ds = engine::generate_ar1(engine::Ar1Process{}, length, seed);
  else if (kind == "static") ds = engine::generate_static(3.0, 0.5, length, seed);
  else throw ConfigError("generate.kind: expected var, ar1 or static, got '" + kind + "'");
  const fs::path path = output_file(config, config.get("generate.name"));
  ensure_output_dir(config);
  auto out = open_output(path);
  data::write_csv_wide(out, ds);
  log << "wrote " << ds.length() << " rows x " << ds.dimension << " entities to " << path.string() << '\n';
}

}  // namespace timegrad::cli
