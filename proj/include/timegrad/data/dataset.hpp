// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace timegrad::data {

enum class Frequency { Day, Hour, HalfHour };

using Timestamp = std::chrono::sys_seconds;

/// Accepts "D"/"1D"/"day", "H"/"1H"/"hour", "30min"/"30T"/"half-hour".
Frequency parse_frequency(const std::string& text);
std::string frequency_name(Frequency f);
std::chrono::seconds frequency_step(Frequency f);

/// ISO-8601 "YYYY-MM-DD", optionally followed by "THH:MM[:SS]" or " HH:MM[:SS]".
Timestamp parse_timestamp(const std::string& text);
/// "YYYY-MM-DD" for daily data, "YYYY-MM-DDTHH:MM:SS" otherwise.
std::string format_timestamp(Timestamp ts, Frequency f);

/// Regularly sampled multivariate series, values stored row-major (T x D).
struct Dataset {
  Frequency frequency = Frequency::Day;
  std::size_t dimension = 0;
  std::vector<Timestamp> timestamps;
  std::vector<double> values;
  std::vector<std::string> entity_names;

  std::size_t length() const noexcept { return timestamps.size(); }
  double value(std::size_t t, std::size_t d) const { return values[t * dimension + d]; }
  std::span<const double> row(std::size_t t) const {
    return std::span<const double>(values).subspan(t * dimension, dimension);
  }
  /// Rows [start, start + count).
  Dataset slice(std::size_t start, std::size_t count) const;

  /// DataError on gaps, non-increasing stamps, non-finite values or ragged storage.
  void validate() const;
};

/// Builds a dataset with consecutive timestamps starting at `start`.
Dataset make_regular(Frequency f, Timestamp start, std::size_t dimension, std::vector<double> values);

enum class DataFormat { CsvWide, JsonLines };
DataFormat parse_data_format(const std::string& text);

/// `source` names the input in error messages.
Dataset read_csv_wide(std::istream& in, Frequency f, const std::string& source = "<stream>");
Dataset read_jsonlines(std::istream& in, const std::string& source = "<stream>");
/// csv_wide files carry no frequency, so it is passed in (jsonlines ignores it).
Dataset load_dataset(const std::string& path, DataFormat format, Frequency csv_frequency);

/// Values are written with 17 significant digits so a reload is exact.
void write_csv_wide(std::ostream& out, const Dataset& ds);
void save_csv_wide(const std::string& path, const Dataset& ds);

/// Half-open index range into a dataset.
struct Span {
  std::size_t start = 0;
  std::size_t length = 0;
  std::size_t end() const noexcept { return start + length; }
  friend bool operator==(const Span&, const Span&) = default;
};

struct DatasetSplit {
  Span train;
  Span validation;
  Span test;
};

/// Test = the final `test_windows * prediction_steps` rows; validation = an
/// equally sized block right before it; train = everything earlier. Requires
/// T > (2 * test_windows + 1) * prediction_steps.
DatasetSplit split(const Dataset& ds, std::size_t prediction_steps, std::size_t test_windows = 1);

}  // namespace timegrad::data
