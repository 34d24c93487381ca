// SPDX-License-Identifier: Apache-2.0
#include "timegrad/metrics/crps.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "timegrad/error.hpp"

namespace timegrad::metrics {

namespace {

void check_truth(const SampleCube& cube, std::span<const double> truth) {
  if (cube.samples == 0 || cube.values.size() != cube.samples * cube.steps * cube.dimension) {
    throw ContractError("sample cube is empty or inconsistent");
  }
  if (truth.size() != cube.steps * cube.dimension) {
    throw DimensionError("truth holds " + std::to_string(truth.size()) + " values, samples cover " +
                         std::to_string(cube.steps) + " steps x " + std::to_string(cube.dimension) +
                         " entities");
  }
}

}  // namespace

double crps_sorted(std::span<const double> sorted, double x) {
  const std::size_t s = sorted.size();
  if (s == 0) throw ContractError("crps: empty sample set");
  double abs_err = 0.0;
  double spread = 0.0;
  for (std::size_t i = 0; i < s; ++i) {
    abs_err += std::abs(sorted[i] - x);
    // Pair sum: sum_{i<j} (X_j - X_i) = sum_i (2i - S + 1) X_(i), 0-based.
    spread += (2.0 * static_cast<double>(i) - static_cast<double>(s) + 1.0) * sorted[i];
  }
  const double n = static_cast<double>(s);
  const double value = abs_err / n - spread / (n * n);
  return std::max(value, 0.0);
}

double crps_empirical(std::span<const double> samples, double x) {
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  return crps_sorted(sorted, x);
}

double crps_sum(const SampleCube& cube, std::span<const double> truth) {
  check_truth(cube, truth);
  std::vector<double> summed(cube.samples);
  double total = 0.0;
  for (std::size_t t = 0; t < cube.steps; ++t) {
    double target = 0.0;
    for (std::size_t d = 0; d < cube.dimension; ++d) target += truth[t * cube.dimension + d];
    for (std::size_t s = 0; s < cube.samples; ++s) {
      double acc = 0.0;
      for (std::size_t d = 0; d < cube.dimension; ++d) acc += cube.at(s, t, d);
      summed[s] = acc;
    }
    total += crps_empirical(summed, target);
  }
  return total / static_cast<double>(cube.steps);
}

std::vector<double> crps_per_entity(const SampleCube& cube, std::span<const double> truth) {
  check_truth(cube, truth);
  std::vector<double> out(cube.dimension, 0.0);
  std::vector<double> column(cube.samples);
  for (std::size_t d = 0; d < cube.dimension; ++d) {
    for (std::size_t t = 0; t < cube.steps; ++t) {
      for (std::size_t s = 0; s < cube.samples; ++s) column[s] = cube.at(s, t, d);
      out[d] += crps_empirical(column, truth[t * cube.dimension + d]);
    }
    out[d] /= static_cast<double>(cube.steps);
  }
  return out;
}

SampleCube persistence_baseline(std::span<const double> context, std::size_t dimension,
                                std::size_t steps, std::size_t samples) {
  if (dimension == 0 || context.size() < dimension || context.size() % dimension != 0) {
    throw ContractError("persistence baseline: context must hold at least one full row");
  }
  const auto last = context.subspan(context.size() - dimension);
  SampleCube cube(samples, steps, dimension);
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t t = 0; t < steps; ++t) {
      for (std::size_t d = 0; d < dimension; ++d) cube.at(s, t, d) = last[d];
    }
  }
  return cube;
}

CrpsReport evaluate_window(const SampleCube& cube, std::span<const double> truth) {
  CrpsReport r;
  r.crps_sum = crps_sum(cube, truth);
  r.crps_per_entity = crps_per_entity(cube, truth);
  r.samples = cube.samples;
  r.windows = 1;
  return r;
}

CrpsReport average_reports(std::span<const CrpsReport> reports) {
  if (reports.empty()) throw ContractError("no reports to average");
  CrpsReport out;
  out.samples = reports.front().samples;
  out.crps_per_entity.assign(reports.front().crps_per_entity.size(), 0.0);
  for (const auto& r : reports) {
    if (r.crps_per_entity.size() != out.crps_per_entity.size()) {
      throw DimensionError("reports disagree on entity count");
    }
    out.crps_sum += r.crps_sum;
    for (std::size_t d = 0; d < r.crps_per_entity.size(); ++d) out.crps_per_entity[d] += r.crps_per_entity[d];
    out.windows += r.windows;
  }
  const double n = static_cast<double>(reports.size());
  out.crps_sum /= n;
  for (double& v : out.crps_per_entity) v /= n;
  return out;
}

std::string report_json(const CrpsReport& report) {
  nlohmann::ordered_json j;
  j["crps_sum"] = report.crps_sum;
  j["crps_per_entity"] = report.crps_per_entity;
  j["S"] = report.samples;
  j["windows"] = report.windows;
  return j.dump(2);
}

}  // namespace timegrad::metrics
