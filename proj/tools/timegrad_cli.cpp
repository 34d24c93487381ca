// SPDX-License-Identifier: Apache-2.0
// timegrad: train, forecast, evaluate, ablate-n, schedule, generate.

#include <algorithm>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "timegrad/cli/commands.hpp"
#include "timegrad/cli/run_config.hpp"
#include "timegrad/error.hpp"

namespace {

using timegrad::cli::RunConfig;

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

int fail(const char* cls, const std::string& message, int code) {
  std::cerr << "error: " << cls << ": " << one_line(message) << '\n';
  return code;
}

std::string env_help() {
  std::string text = "Settings are `section.key = value`. Precedence: flags > environment > config file > defaults.\n"
                     "Every key can be set from the environment as TIMEGRAD_<SECTION>_<KEY>, e.g. TIMEGRAD_TRAIN_SEED.\n"
                     "Exit codes: 0 ok, 2 CONFIG_ERROR, 3 DATA_ERROR, 4 NUMERIC_ERROR.\n\nKeys (default):\n";
  for (const auto& [key, value] : RunConfig::defaults()) {
    text += "  " + key + " (" + (value.empty() ? "unset" : value) + ")\n";
  }
  return text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TimeGrad: autoregressive denoising diffusion forecaster"};
  app.footer(env_help());
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::vector<std::string> assignments;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> data_path, out_dir;
  app.add_option("-c,--config", config_path, "Config file with section.key = value lines");
  app.add_option("-s,--set", assignments, "Override a key: section.key=value (repeatable)");
  app.add_option("--seed", seed, "Shortcut for train.seed");
  app.add_option("--data", data_path, "Shortcut for data.path");
  app.add_option("--out", out_dir, "Shortcut for output.dir");
  app.set_version_flag("--version", timegrad::cli::version_text());

  auto* train = app.add_subcommand("train", "Fit a model; writes the checkpoint and train_log.csv");
  auto* forecast = app.add_subcommand("forecast", "Sample trajectories; writes samples.csv, quantiles.csv, plot.json");
  auto* evaluate = app.add_subcommand("evaluate", "Score samples.csv against the test span; writes metrics.json");
  auto* ablate = app.add_subcommand("ablate-n", "Train and score once per diffusion length; writes ablation.csv");
  std::optional<std::string> ablate_levels;
  ablate->add_option("--levels", ablate_levels, "Comma-separated diffusion lengths");
  auto* schedule = app.add_subcommand("schedule", "Print n, beta, alpha_bar, tilde_beta");
  std::optional<std::size_t> sched_n;
  std::optional<std::string> sched_first, sched_last;
  schedule->add_option("-N,--steps", sched_n, "Diffusion length");
  schedule->add_option("--beta-first", sched_first, "First beta");
  schedule->add_option("--beta-last", sched_last, "Last beta");
  auto* generate = app.add_subcommand("generate", "Write a synthetic dataset (var, ar1, static)");
  std::optional<std::string> gen_kind;
  generate->add_option("--kind", gen_kind, "var, ar1 or static");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("CONFIG_ERROR", e.what(), timegrad::cli::kExitConfigError);
  }

  try {
    RunConfig config;
    if (!config_path.empty()) config.apply_file(config_path);
    config.apply_environment();
    for (const auto& a : assignments) config.apply_assignment(a);
    using Src = RunConfig::Source;
    if (seed) config.set("train.seed", std::to_string(*seed), Src::Flag);
    if (data_path) config.set("data.path", *data_path, Src::Flag);
    if (out_dir) config.set("output.dir", *out_dir, Src::Flag);
    if (ablate_levels) config.set("ablation.levels", *ablate_levels, Src::Flag);
    if (sched_n) config.set("diffusion.steps", std::to_string(*sched_n), Src::Flag);
    if (sched_first) config.set("diffusion.beta_first", *sched_first, Src::Flag);
    if (sched_last) config.set("diffusion.beta_last", *sched_last, Src::Flag);
    if (gen_kind) config.set("generate.kind", *gen_kind, Src::Flag);

    if (*train) timegrad::cli::cmd_train(config, std::cout);
    else if (*forecast) timegrad::cli::cmd_forecast(config, std::cout);
    else if (*evaluate) timegrad::cli::cmd_evaluate(config, std::cout);
    else if (*ablate) timegrad::cli::cmd_ablate_n(config, std::cout);
    else if (*schedule) timegrad::cli::cmd_schedule(config, std::cout);
    else if (*generate) timegrad::cli::cmd_generate(config, std::cout);
  } catch (const timegrad::Error& e) {
    return fail(timegrad::cli::error_class_name(e.error_class()), e.what(),
                timegrad::cli::exit_code(e.error_class()));
  } catch (const std::exception& e) {
    return fail("CONFIG_ERROR", e.what(), timegrad::cli::kExitConfigError);
  }
  return timegrad::cli::kExitOk;
}
