// SPDX-License-Identifier: Apache-2.0
#include "timegrad/data/covariates.hpp"

#include "timegrad/error.hpp"

namespace timegrad::data {

namespace {

struct CalendarParts {
  std::size_t day_of_week;   // Monday = 0
  std::size_t day_of_month;  // 0-based
  std::size_t day_of_year;   // 0-based
  std::size_t hour;
  std::size_t minute;
};

CalendarParts calendar_parts(Timestamp ts) {
  using namespace std::chrono;
  const auto day = floor<days>(ts);
  const year_month_day ymd(day);
  const weekday wd(day);
  const hh_mm_ss hms(ts - day);
  const auto jan1 = sys_days(ymd.year() / January / 1);
  CalendarParts p{};
  p.day_of_week = wd.iso_encoding() - 1;
  p.day_of_month = static_cast<unsigned>(ymd.day()) - 1;
  p.day_of_year = static_cast<std::size_t>((day - jan1).count());
  p.hour = static_cast<std::size_t>(hms.hours().count());
  p.minute = static_cast<std::size_t>(hms.minutes().count());
  return p;
}

}  // namespace

std::vector<std::size_t> default_lags(Frequency f) {
  switch (f) {
    case Frequency::Day: return {1, 7};
    case Frequency::Hour: return {1, 24};
    case Frequency::HalfHour: return {1, 48};
  }
  throw ConfigError("unknown frequency");
}

std::vector<std::string> calendar_feature_names(Frequency f) {
  switch (f) {
    case Frequency::Day: return {"day_of_week", "day_of_month", "day_of_year"};
    case Frequency::Hour: return {"hour_of_day", "day_of_week"};
    case Frequency::HalfHour: return {"half_hour", "hour_of_day", "day_of_week"};
  }
  throw ConfigError("unknown frequency");
}

std::size_t calendar_feature_count(Frequency f) { return calendar_feature_names(f).size(); }

double encode_bin(std::size_t bin, std::size_t bins) {
  if (bins < 2 || bin >= bins) {
    throw ContractError("calendar bin " + std::to_string(bin) + " of " + std::to_string(bins));
  }
  return static_cast<double>(bin) / static_cast<double>(bins - 1) - 0.5;
}

void calendar_features(Timestamp ts, Frequency f, std::span<double> out) {
  if (out.size() != calendar_feature_count(f)) {
    throw DimensionError("calendar features: expected " + std::to_string(calendar_feature_count(f)) +
                         " slots, got " + std::to_string(out.size()));
  }
  const CalendarParts p = calendar_parts(ts);
  switch (f) {
    case Frequency::Day:
      out[0] = encode_bin(p.day_of_week, 7);
      out[1] = encode_bin(p.day_of_month, 31);
      out[2] = encode_bin(p.day_of_year, 366);
      break;
    case Frequency::Hour:
      out[0] = encode_bin(p.hour, 24);
      out[1] = encode_bin(p.day_of_week, 7);
      break;
    case Frequency::HalfHour:
      out[0] = encode_bin(p.minute / 30, 2);
      out[1] = encode_bin(p.hour, 24);
      out[2] = encode_bin(p.day_of_week, 7);
      break;
  }
}

ScaledHistory::ScaledHistory(std::size_t first_index, std::size_t dimension)
    : first_(first_index), dim_(dimension) {
  if (dimension == 0) throw ContractError("scaled history needs at least one entity");
}

ScaledHistory::ScaledHistory(std::size_t first_index, std::size_t dimension, std::vector<double> values)
    : first_(first_index), dim_(dimension), values_(std::move(values)) {
  if (dimension == 0 || values_.size() % dimension != 0) {
    throw ContractError("scaled history: values do not form rows of width " + std::to_string(dimension));
  }
}

void ScaledHistory::append(std::span<const double> row) {
  if (row.size() != dim_) {
    throw DimensionError("scaled history: row of " + std::to_string(row.size()) + ", expected " +
                         std::to_string(dim_));
  }
  values_.insert(values_.end(), row.begin(), row.end());
}

std::span<const double> ScaledHistory::row(std::size_t absolute) const {
  if (absolute < first_ || absolute >= end_index()) {
    throw ContractError("scaled history holds rows [" + std::to_string(first_) + ", " +
                        std::to_string(end_index()) + "), row " + std::to_string(absolute) +
                        " requested");
  }
  return std::span<const double>(values_).subspan((absolute - first_) * dim_, dim_);
}

double ScaledHistory::lagged(std::size_t absolute, std::size_t lag, std::size_t entity) const {
  if (lag == 0) throw ContractError("lag indices must be positive");
  if (absolute < lag) return 0.0;  // before the series starts
  return row(absolute - lag)[entity];
}

std::size_t covariate_width(Frequency f, const CovariateOptions& options, std::size_t dimension) {
  return (options.calendar ? calendar_feature_count(f) : 0) + options.lags.size() * dimension;
}

void covariate_row(Timestamp ts, std::size_t absolute, Frequency f, const CovariateOptions& options,
                   const ScaledHistory& history, std::span<double> out) {
  const std::size_t dim = history.dimension();
  if (out.size() != covariate_width(f, options, dim)) {
    throw DimensionError("covariate row: expected width " +
                         std::to_string(covariate_width(f, options, dim)) + ", got " +
                         std::to_string(out.size()));
  }
  std::size_t col = 0;
  if (options.calendar) {
    const std::size_t k = calendar_feature_count(f);
    calendar_features(ts, f, out.subspan(0, k));
    col = k;
  }
  for (std::size_t lag : options.lags) {
    for (std::size_t d = 0; d < dim; ++d) out[col++] = history.lagged(absolute, lag, d);
  }
}

CovariateSet build_covariates(std::span<const Timestamp> timestamps, std::size_t first_index,
                              Frequency f, const CovariateOptions& options,
                              const ScaledHistory& history) {
  CovariateSet set;
  set.rows = timestamps.size();
  set.width = covariate_width(f, options, history.dimension());
  set.values.assign(set.rows * set.width, 0.0);
  for (std::size_t r = 0; r < set.rows; ++r) {
    covariate_row(timestamps[r], first_index + r, f, options, history,
                  std::span<double>(set.values).subspan(r * set.width, set.width));
  }
  return set;
}

}  // namespace timegrad::data
