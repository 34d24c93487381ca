// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "timegrad/cli/run_config.hpp"
#include "timegrad/engine/forecast.hpp"
#include "timegrad/error.hpp"
#include "timegrad/metrics/crps.hpp"

namespace timegrad::cli {

/// Process exit codes.
enum ExitCode : int { kExitOk = 0, kExitConfigError = 2, kExitDataError = 3, kExitNumericError = 4 };

int exit_code(ErrorClass cls);
/// CONFIG_ERROR, DATA_ERROR or NUMERIC_ERROR.
const char* error_class_name(ErrorClass cls);

/// Checkpoint and file-schema versions, one per line.
std::string version_text();

/// Each command reads the resolved config, writes only under output.dir and
/// reports progress to `log`. Failures surface as timegrad::Error.
void cmd_train(const RunConfig& config, std::ostream& log);
void cmd_forecast(const RunConfig& config, std::ostream& log);
void cmd_evaluate(const RunConfig& config, std::ostream& log);
void cmd_ablate_n(const RunConfig& config, std::ostream& log);
void cmd_schedule(const RunConfig& config, std::ostream& out);
void cmd_generate(const RunConfig& config, std::ostream& log);

// Artifact formats, exposed for tests.
void write_samples_csv(std::ostream& out, std::span<const engine::ForecastSampleSet> forecasts);
void write_quantiles_csv(std::ostream& out, std::span<const engine::ForecastSampleSet> forecasts,
                         std::span<const double> levels);
std::string plot_json(std::span<const engine::ForecastSampleSet> forecasts,
                      std::span<const double> levels);
/// Inverse of write_samples_csv: one cube per window, in window order.
std::vector<metrics::SampleCube> read_samples_csv(std::istream& in, const std::string& source);

}  // namespace timegrad::cli
