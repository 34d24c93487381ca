// SPDX-License-Identifier: Apache-2.0
#include "timegrad/data/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "timegrad/error.hpp"

namespace timegrad::data {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool parse_double(const std::string& text, double& out) {
  if (text.empty()) return false;
  char* end = nullptr;
  out = std::strtod(text.c_str(), &end);
  return end == text.c_str() + text.size() && std::isfinite(out);
}

}  // namespace

Frequency parse_frequency(const std::string& text) {
  if (text == "D" || text == "1D" || text == "day") return Frequency::Day;
  if (text == "H" || text == "1H" || text == "h" || text == "hour") return Frequency::Hour;
  if (text == "30min" || text == "30T" || text == "half-hour") return Frequency::HalfHour;
  throw ConfigError("unknown frequency '" + text + "' (expected day, hour or 30min)");
}

std::string frequency_name(Frequency f) {
  switch (f) {
    case Frequency::Day: return "day";
    case Frequency::Hour: return "hour";
    case Frequency::HalfHour: return "30min";
  }
  return "?";
}

std::chrono::seconds frequency_step(Frequency f) {
  switch (f) {
    case Frequency::Day: return std::chrono::hours(24);
    case Frequency::Hour: return std::chrono::hours(1);
    case Frequency::HalfHour: return std::chrono::minutes(30);
  }
  throw ConfigError("unknown frequency");
}

Timestamp parse_timestamp(const std::string& raw) {
  const std::string text = trim(raw);
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  int consumed = 0;
  if (std::sscanf(text.c_str(), "%4d-%2d-%2d%n", &y, &mo, &d, &consumed) != 3) {
    throw DataError("malformed timestamp '" + text + "'");
  }
  std::string rest = text.substr(static_cast<std::size_t>(consumed));
  if (!rest.empty()) {
    if (rest[0] != 'T' && rest[0] != ' ') throw DataError("malformed timestamp '" + text + "'");
    rest = rest.substr(1);
    int used = 0;
    const int got = std::sscanf(rest.c_str(), "%2d:%2d%n:%2d%n", &h, &mi, &used, &s, &used);
    if (got < 2) throw DataError("malformed timestamp '" + text + "'");
    rest = rest.substr(static_cast<std::size_t>(used));
    if (!rest.empty() && rest != "Z") throw DataError("malformed timestamp '" + text + "'");
  }
  const std::chrono::year_month_day ymd{std::chrono::year(y), std::chrono::month(static_cast<unsigned>(mo)),
                                        std::chrono::day(static_cast<unsigned>(d))};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 59) {
    throw DataError("invalid calendar date in timestamp '" + text + "'");
  }
  return std::chrono::sys_days(ymd) + std::chrono::hours(h) + std::chrono::minutes(mi) +
         std::chrono::seconds(s);
}

std::string format_timestamp(Timestamp ts, Frequency f) {
  const auto day = std::chrono::floor<std::chrono::days>(ts);
  const std::chrono::year_month_day ymd(day);
  const std::chrono::hh_mm_ss hms(ts - day);
  char buf[32];
  if (f == Frequency::Day) {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  } else {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()));
  }
  return buf;
}

Dataset Dataset::slice(std::size_t start, std::size_t count) const {
  if (start + count > length()) {
    throw ContractError("dataset slice [" + std::to_string(start) + ", " +
                        std::to_string(start + count) + ") exceeds length " +
                        std::to_string(length()));
  }
  Dataset out;
  out.frequency = frequency;
  out.dimension = dimension;
  out.entity_names = entity_names;
  out.timestamps.assign(timestamps.begin() + static_cast<std::ptrdiff_t>(start),
                        timestamps.begin() + static_cast<std::ptrdiff_t>(start + count));
  out.values.assign(values.begin() + static_cast<std::ptrdiff_t>(start * dimension),
                    values.begin() + static_cast<std::ptrdiff_t>((start + count) * dimension));
  return out;
}

void Dataset::validate() const {
  if (dimension == 0) throw DataError("dataset has no entities");
  if (values.size() != timestamps.size() * dimension) {
    throw DataError("dataset stores " + std::to_string(values.size()) + " values for " +
                    std::to_string(timestamps.size()) + " rows of " + std::to_string(dimension));
  }
  const auto step = frequency_step(frequency);
  for (std::size_t t = 1; t < timestamps.size(); ++t) {
    const auto expected = timestamps[t - 1] + step;
    if (timestamps[t] != expected) {
      if (timestamps[t] > expected) {
        throw DataError("missing timestamp " + format_timestamp(expected, frequency) +
                        " (gap before row " + std::to_string(t) + ")");
      }
      throw DataError("timestamps not strictly increasing at row " + std::to_string(t) + " (" +
                      format_timestamp(timestamps[t], frequency) + ")");
    }
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw DataError("non-finite value at row " + std::to_string(i / dimension) + ", entity " +
                      std::to_string(i % dimension));
    }
  }
}

Dataset make_regular(Frequency f, Timestamp start, std::size_t dimension, std::vector<double> values) {
  if (dimension == 0 || values.size() % dimension != 0) {
    throw ContractError("make_regular: " + std::to_string(values.size()) +
                        " values do not fill rows of width " + std::to_string(dimension));
  }
  Dataset ds;
  ds.frequency = f;
  ds.dimension = dimension;
  ds.values = std::move(values);
  const std::size_t rows = ds.values.size() / dimension;
  ds.timestamps.reserve(rows);
  for (std::size_t t = 0; t < rows; ++t) {
    ds.timestamps.push_back(start + frequency_step(f) * static_cast<long>(t));
  }
  for (std::size_t d = 0; d < dimension; ++d) ds.entity_names.push_back("s" + std::to_string(d));
  ds.validate();
  return ds;
}

DataFormat parse_data_format(const std::string& text) {
  if (text == "csv_wide" || text == "csv") return DataFormat::CsvWide;
  if (text == "jsonlines" || text == "jsonl") return DataFormat::JsonLines;
  throw ConfigError("unknown dataset format '" + text + "' (expected csv_wide or jsonlines)");
}

Dataset read_csv_wide(std::istream& in, Frequency f, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(source + ": empty file");
  const auto header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "timestamp") {
    throw DataError(source + ": header must be 'timestamp,<entity>,...'");
  }
  Dataset ds;
  ds.frequency = f;
  ds.dimension = header.size() - 1;
  ds.entity_names.assign(header.begin() + 1, header.end());
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw DataError(source + ": row " + std::to_string(row) + " has " +
                      std::to_string(cells.size()) + " columns, expected " +
                      std::to_string(header.size()));
    }
    try {
      ds.timestamps.push_back(parse_timestamp(cells[0]));
    } catch (const DataError& e) {
      throw DataError(source + ": row " + std::to_string(row) + ", column 0: " + e.what());
    }
    for (std::size_t c = 1; c < cells.size(); ++c) {
      double v = 0.0;
      if (!parse_double(cells[c], v)) {
        throw DataError(source + ": row " + std::to_string(row) + ", column " + std::to_string(c) +
                        " (" + header[c] + "): not a finite number: '" + cells[c] + "'");
      }
      ds.values.push_back(v);
    }
  }
  if (ds.timestamps.empty()) throw DataError(source + ": no data rows");
  ds.validate();
  return ds;
}

Dataset read_jsonlines(std::istream& in, const std::string& source) {
  Dataset ds;
  std::vector<std::vector<double>> series;
  std::string line;
  std::size_t lineno = 0;
  Timestamp start{};
  std::string freq_text;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(source + ": line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!rec.contains("start") || !rec.contains("freq") || !rec.contains("values") ||
        !rec["values"].is_array()) {
      throw DataError(source + ": line " + std::to_string(lineno) +
                      ": record needs 'start', 'freq' and 'values'");
    }
    const auto rec_start = parse_timestamp(rec["start"].get<std::string>());
    const auto rec_freq = rec["freq"].get<std::string>();
    if (series.empty()) {
      start = rec_start;
      freq_text = rec_freq;
    } else if (rec_start != start || rec_freq != freq_text) {
      throw DataError(source + ": line " + std::to_string(lineno) +
                      ": every entity must share start and freq");
    }
    std::vector<double> vals;
    std::size_t col = 0;
    for (const auto& v : rec["values"]) {
      if (!v.is_number() || !std::isfinite(v.get<double>())) {
        throw DataError(source + ": line " + std::to_string(lineno) + ", value " +
                        std::to_string(col) + ": not a finite number");
      }
      vals.push_back(v.get<double>());
      ++col;
    }
    if (!series.empty() && vals.size() != series.front().size()) {
      throw DataError(source + ": ragged entities: line " + std::to_string(lineno) + " has " +
                      std::to_string(vals.size()) + " values, first entity has " +
                      std::to_string(series.front().size()));
    }
    std::string name = "s" + std::to_string(series.size());
    if (rec.contains("item_id")) {
      name = rec["item_id"].is_string() ? rec["item_id"].get<std::string>() : rec["item_id"].dump();
    }
    ds.entity_names.push_back(std::move(name));
    series.push_back(std::move(vals));
  }
  if (series.empty() || series.front().empty()) throw DataError(source + ": no data");
  ds.frequency = parse_frequency(freq_text);
  ds.dimension = series.size();
  const std::size_t rows = series.front().size();
  for (std::size_t t = 0; t < rows; ++t) {
    ds.timestamps.push_back(start + frequency_step(ds.frequency) * static_cast<long>(t));
    for (const auto& s : series) ds.values.push_back(s[t]);
  }
  ds.validate();
  return ds;
}

Dataset load_dataset(const std::string& path, DataFormat format, Frequency csv_frequency) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset '" + path + "'");
  return format == DataFormat::CsvWide ? read_csv_wide(in, csv_frequency, path)
                                       : read_jsonlines(in, path);
}

void write_csv_wide(std::ostream& out, const Dataset& ds) {
  out << "timestamp";
  for (std::size_t d = 0; d < ds.dimension; ++d) {
    out << ',' << (d < ds.entity_names.size() ? ds.entity_names[d] : "s" + std::to_string(d));
  }
  out << '\n';
  char buf[40];
  for (std::size_t t = 0; t < ds.length(); ++t) {
    out << format_timestamp(ds.timestamps[t], ds.frequency);
    for (double v : ds.row(t)) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << ',' << buf;
    }
    out << '\n';
  }
}

void save_csv_wide(const std::string& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  write_csv_wide(out, ds);
}

DatasetSplit split(const Dataset& ds, std::size_t prediction_steps, std::size_t test_windows) {
  if (prediction_steps == 0 || test_windows == 0) {
    throw ConfigError("split: prediction steps and test windows must be >= 1");
  }
  const std::size_t held = test_windows * prediction_steps;
  const std::size_t minimum = 2 * held + prediction_steps + 1;
  if (ds.length() < minimum) {
    throw ConfigError("dataset too short: " + std::to_string(ds.length()) + " rows, need at least " +
                      std::to_string(minimum) + " for prediction length " +
                      std::to_string(prediction_steps) + " and " + std::to_string(test_windows) +
                      " test window(s)");
  }
  DatasetSplit s;
  s.test = {ds.length() - held, held};
  s.validation = {s.test.start - held, held};
  s.train = {0, s.validation.start};
  return s;
}

}  // namespace timegrad::data
