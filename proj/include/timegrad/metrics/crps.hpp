// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace timegrad::metrics {

/// S x T x D sample block, stored sample-major.
struct SampleCube {
  std::size_t samples = 0;
  std::size_t steps = 0;
  std::size_t dimension = 0;
  std::vector<double> values;

  SampleCube() = default;
  SampleCube(std::size_t s, std::size_t t, std::size_t d)
      : samples(s), steps(t), dimension(d), values(s * t * d, 0.0) {}

  double& at(std::size_t s, std::size_t t, std::size_t d) {
    return values[(s * steps + t) * dimension + d];
  }
  double at(std::size_t s, std::size_t t, std::size_t d) const {
    return values[(s * steps + t) * dimension + d];
  }
};

/// CRPS of the empirical CDF of `samples` against x, via
///   (1/S) sum |X_s - x| - 1/(2 S^2) sum_s sum_t |X_s - X_t|
/// with the pair sum evaluated on sorted samples.
double crps_empirical(std::span<const double> samples, double x);
/// Same, for samples already sorted ascending.
double crps_sorted(std::span<const double> sorted, double x);

/// Sums samples and truth over entities per step, then averages the
/// univariate CRPS over the horizon. truth is T x D row-major.
double crps_sum(const SampleCube& cube, std::span<const double> truth);
/// Horizon-mean CRPS per entity.
std::vector<double> crps_per_entity(const SampleCube& cube, std::span<const double> truth);

/// Every trajectory repeats the last context row. context is rows x D.
SampleCube persistence_baseline(std::span<const double> context, std::size_t dimension,
                                std::size_t steps, std::size_t samples);

struct CrpsReport {
  double crps_sum = 0.0;
  std::vector<double> crps_per_entity;
  std::size_t samples = 0;
  std::size_t windows = 0;
};

CrpsReport evaluate_window(const SampleCube& cube, std::span<const double> truth);
/// Unweighted mean over windows; `windows` becomes the total window count.
CrpsReport average_reports(std::span<const CrpsReport> reports);

/// {"crps_sum": .., "crps_per_entity": [..], "S": .., "windows": ..}
std::string report_json(const CrpsReport& report);

}  // namespace timegrad::metrics
