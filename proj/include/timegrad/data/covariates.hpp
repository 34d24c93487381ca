// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "timegrad/data/dataset.hpp"

namespace timegrad::data {

/// Seasonal lag sets: day {1, 7}, hour {1, 24}, 30min {1, 48}.
std::vector<std::size_t> default_lags(Frequency f);

/// Calendar features per frequency, each bin mapped to bin/(bins-1) - 0.5:
///   day   : day-of-week, day-of-month, day-of-year
///   hour  : hour-of-day, day-of-week
///   30min : half-hour-of-hour, hour-of-day, day-of-week
std::vector<std::string> calendar_feature_names(Frequency f);
std::size_t calendar_feature_count(Frequency f);
void calendar_features(Timestamp ts, Frequency f, std::span<double> out);
double encode_bin(std::size_t bin, std::size_t bins);

/// Scaled observations for absolute rows [first_index, first_index + rows()).
/// Grows by append() as forecast samples become available.
class ScaledHistory {
 public:
  ScaledHistory(std::size_t first_index, std::size_t dimension);
  ScaledHistory(std::size_t first_index, std::size_t dimension, std::vector<double> values);

  std::size_t first_index() const noexcept { return first_; }
  std::size_t dimension() const noexcept { return dim_; }
  std::size_t rows() const noexcept { return values_.size() / dim_; }
  std::size_t end_index() const noexcept { return first_ + rows(); }

  void append(std::span<const double> row);
  std::span<const double> row(std::size_t absolute) const;

  /// Value at absolute row t - lag. Rows before the series start read as 0;
  /// rows outside the held range (and not before the start) are a ContractError.
  double lagged(std::size_t absolute, std::size_t lag, std::size_t entity) const;

 private:
  std::size_t first_;
  std::size_t dim_;
  std::vector<double> values_;
};

struct CovariateOptions {
  bool calendar = true;
  std::vector<std::size_t> lags;  // all >= 1
};

/// Calendar columns first, then lag-major blocks of D entity columns.
std::size_t covariate_width(Frequency f, const CovariateOptions& options, std::size_t dimension);

/// Row-major (timestamps.size() x width) feature block for absolute rows
/// first_index, first_index + 1, ...
struct CovariateSet {
  std::size_t rows = 0;
  std::size_t width = 0;
  std::vector<double> values;

  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(values).subspan(r * width, width);
  }
};

CovariateSet build_covariates(std::span<const Timestamp> timestamps, std::size_t first_index,
                              Frequency f, const CovariateOptions& options,
                              const ScaledHistory& history);

/// One row of covariates, written into `out` (size covariate_width()).
void covariate_row(Timestamp ts, std::size_t absolute, Frequency f, const CovariateOptions& options,
                   const ScaledHistory& history, std::span<double> out);

}  // namespace timegrad::data
