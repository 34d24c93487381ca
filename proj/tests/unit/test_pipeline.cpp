// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <sstream>
#include <string>
#include <vector>

#include "timegrad/data/covariates.hpp"
#include "timegrad/data/dataset.hpp"
#include "timegrad/data/window.hpp"
#include "timegrad/error.hpp"
#include "timegrad/num/rng.hpp"

using namespace timegrad;
using namespace timegrad::data;

namespace {

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

Dataset hourly(std::size_t rows, std::size_t dim, std::uint64_t seed) {
  num::RngStream rng(seed);
  std::vector<double> v(rows * dim);
  for (double& x : v) x = 1.0 + 10.0 * rng.uniform();
  return make_regular(Frequency::Hour, parse_timestamp("2021-01-04T00:00:00"), dim, std::move(v));
}

std::uint64_t ulp_distance(double a, double b) {
  std::int64_t ia, ib;
  std::memcpy(&ia, &a, sizeof a);
  std::memcpy(&ib, &b, sizeof b);
  return static_cast<std::uint64_t>(ia > ib ? ia - ib : ib - ia);
}

}  // namespace

TEST(Csv, ParsesWideFormat) {
  std::istringstream in("timestamp,a,b\n2021-01-04,1,2\n2021-01-05,3.5,-4\n2021-01-06,5,6e-1\n");
  const Dataset ds = read_csv_wide(in, Frequency::Day);
  EXPECT_EQ(ds.length(), 3u);
  EXPECT_EQ(ds.dimension, 2u);
  EXPECT_EQ(ds.entity_names, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(ds.value(1, 0), 3.5);
  EXPECT_EQ(ds.value(2, 1), 0.6);
}

TEST(Csv, GapNamesFirstMissingStamp) {
  std::istringstream in(
      "timestamp,a\n2021-01-04T00:00:00,1\n2021-01-04T01:00:00,2\n2021-01-04T03:00:00,3\n");
  const std::string msg = error_of([&] { read_csv_wide(in, Frequency::Hour); });
  EXPECT_NE(msg.find("missing timestamp 2021-01-04T02:00:00"), std::string::npos) << msg;
}

TEST(Csv, NonNumericCellNamesRowAndColumn) {
  std::istringstream in("timestamp,a,b\n2021-01-04,1,2\n2021-01-05,3,oops\n");
  EXPECT_THROW(read_csv_wide(in, Frequency::Day), DataError);
  std::istringstream again("timestamp,a,b\n2021-01-04,1,2\n2021-01-05,3,oops\n");
  const std::string msg = error_of([&] { read_csv_wide(again, Frequency::Day); });
  EXPECT_NE(msg.find("row 2, column 2"), std::string::npos) << msg;
  EXPECT_NE(msg.find("oops"), std::string::npos) << msg;
}

TEST(Csv, RoundTripIsExact) {
  const Dataset ds = hourly(50, 3, 1);
  std::stringstream buf;
  write_csv_wide(buf, ds);
  const Dataset back = read_csv_wide(buf, Frequency::Hour);
  ASSERT_EQ(back.values.size(), ds.values.size());
  for (std::size_t i = 0; i < ds.values.size(); ++i) EXPECT_EQ(back.values[i], ds.values[i]);
  EXPECT_EQ(back.timestamps, ds.timestamps);
}

TEST(JsonLines, ParsesEntities) {
  std::istringstream in(
      "{\"start\": \"2021-01-04 00:00:00\", \"freq\": \"H\", \"values\": [1, 2, 3], \"item_id\": \"x\"}\n"
      "{\"start\": \"2021-01-04 00:00:00\", \"freq\": \"H\", \"values\": [4, 5, 6]}\n");
  const Dataset ds = read_jsonlines(in);
  EXPECT_EQ(ds.frequency, Frequency::Hour);
  EXPECT_EQ(ds.dimension, 2u);
  EXPECT_EQ(ds.length(), 3u);
  EXPECT_EQ(ds.value(2, 1), 6.0);
  EXPECT_EQ(ds.entity_names[0], "x");
}

TEST(JsonLines, RaggedEntitiesRejected) {
  std::istringstream in(
      "{\"start\": \"2021-01-04\", \"freq\": \"D\", \"values\": [1, 2, 3]}\n"
      "{\"start\": \"2021-01-04\", \"freq\": \"D\", \"values\": [4, 5]}\n");
  const std::string msg = error_of([&] { read_jsonlines(in); });
  EXPECT_NE(msg.find("ragged"), std::string::npos) << msg;
}

TEST(Split, ArithmeticAndBoundary) {
  const auto parts = split(hourly(100, 1, 2), 10);
  EXPECT_EQ(parts.train, (Span{0, 80}));
  EXPECT_EQ(parts.validation, (Span{80, 10}));
  EXPECT_EQ(parts.test, (Span{90, 10}));
  EXPECT_NO_THROW(split(hourly(31, 1, 2), 10));
  const std::string msg = error_of([&] { split(hourly(30, 1, 2), 10); });
  EXPECT_NE(msg.find("31"), std::string::npos) << msg;
  EXPECT_THROW(split(hourly(30, 1, 2), 10), ConfigError);

  const auto rolling = split(hourly(200, 1, 2), 10, 4);
  EXPECT_EQ(rolling.test, (Span{160, 40}));
  EXPECT_EQ(rolling.validation, (Span{120, 40}));
  const auto windows = rolling_windows(rolling.test, 10);
  ASSERT_EQ(windows.size(), 4u);
  EXPECT_EQ(windows[0].offset, 150u);
  EXPECT_EQ(windows[3].forecast_start(), 190u);
}

TEST(Windows, DegenerateRegionHasOneOffset) {
  num::RngStream rng(3);
  for (int i = 0; i < 20; ++i) {
    const auto w = sample_window(Span{5, 20}, 10, rng);
    EXPECT_EQ(w.offset, 5u);
    EXPECT_EQ(w.context_length, 10u);
    EXPECT_EQ(w.prediction_length, 10u);
  }
  EXPECT_THROW(sample_window(Span{5, 19}, 10, rng), ConfigError);
}

TEST(Windows, OffsetsAreUniformAndStayInside) {
  num::RngStream rng(4);
  const Span region{30, 2 * 12 + 9};  // 10 valid offsets
  std::vector<double> counts(10, 0.0);
  for (int i = 0; i < 10000; ++i) {
    const auto w = sample_window(region, 12, rng);
    ASSERT_GE(w.offset, region.start);
    ASSERT_LE(w.offset + w.length(), region.end());
    counts[w.offset - region.start] += 1.0;
  }
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - 1000.0) * (c - 1000.0) / 1000.0;
  EXPECT_LT(chi2, 27.88);  // chi-square(9) at p = 0.001
}

TEST(Windows, DeterministicPerStream) {
  num::RngStream a(5), b(5);
  const Span region{0, 500};
  const auto w1 = sample_window(region, 10, a);
  const auto w2 = sample_window(region, 10, a);
  EXPECT_NE(w1.offset, w2.offset);
  EXPECT_EQ(sample_window(region, 10, b).offset, w1.offset);
}

TEST(Scaler, MeanDivisorAndZeroSubstitution) {
  // Two rows of three entities: means 5, 0, -2.
  const std::vector<double> context{4.0, 1.0, -1.0, 6.0, -1.0, -3.0};
  const Scaler s = Scaler::fit(context, 3);
  EXPECT_EQ(s.divisors(), (std::vector<double>{5.0, 1.0, -2.0}));
  const auto scaled = s.scaled(std::vector<double>{10.0, 7.0, 4.0});
  EXPECT_EQ(scaled, (std::vector<double>{2.0, 7.0, -2.0}));
}

TEST(Scaler, ContextScaleEquivariance) {
  num::RngStream rng(6);
  std::vector<double> context(24 * 3);
  for (double& v : context) v = 0.5 + rng.uniform();
  const Scaler base = Scaler::fit(context, 3);
  for (double k : {4.0, 0.25, 1024.0}) {
    std::vector<double> stretched = context;
    for (double& v : stretched) v *= k;
    const Scaler s = Scaler::fit(stretched, 3);
    for (std::size_t d = 0; d < 3; ++d) EXPECT_EQ(s.divisors()[d], k * base.divisors()[d]);
    const auto a = base.scaled(context), b = s.scaled(stretched);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
  }
}

TEST(Scaler, RoundTrip) {
  num::RngStream rng(7);
  std::vector<double> v(3000);
  for (double& x : v) x = 200.0 * (rng.uniform() - 0.5);
  // Power-of-two divisors make division and multiplication exact inverses.
  const Scaler dyadic({0.5, 4.0, 1.0});
  EXPECT_EQ(dyadic.unscaled(dyadic.scaled(v)), v);
  // Arbitrary divisors round twice; the pair stays within one ulp.
  const Scaler general({3.7, 0.3, 12.9});
  const auto back = general.unscaled(general.scaled(v));
  std::uint64_t worst = 0;
  for (std::size_t i = 0; i < v.size(); ++i) worst = std::max(worst, ulp_distance(back[i], v[i]));
  EXPECT_LE(worst, 1u);
}

TEST(Calendar, MondayAndHourEncodings) {
  const Timestamp monday = parse_timestamp("2021-01-04");
  std::vector<double> day(calendar_feature_count(Frequency::Day));
  calendar_features(monday, Frequency::Day, day);
  EXPECT_EQ(day[0], -0.5);  // Monday is bin 0 of 7
  EXPECT_EQ(day[1], encode_bin(3, 31));
  EXPECT_EQ(day[2], encode_bin(3, 366));

  std::vector<double> hour(calendar_feature_count(Frequency::Hour));
  calendar_features(parse_timestamp("2021-01-10T12:00:00"), Frequency::Hour, hour);
  EXPECT_DOUBLE_EQ(hour[0], 12.0 / 23.0 - 0.5);
  EXPECT_EQ(hour[1], 0.5);  // Sunday is bin 6 of 7

  std::vector<double> half(calendar_feature_count(Frequency::HalfHour));
  calendar_features(parse_timestamp("2021-01-05T23:30:00"), Frequency::HalfHour, half);
  EXPECT_EQ(half[0], 0.5);
  EXPECT_EQ(half[1], 0.5);
  EXPECT_DOUBLE_EQ(half[2], 1.0 / 6.0 - 0.5);
}

TEST(Calendar, FeaturesStayInRange) {
  for (Frequency f : {Frequency::Day, Frequency::Hour, Frequency::HalfHour}) {
    std::vector<double> out(calendar_feature_count(f));
    Timestamp ts = parse_timestamp("2020-01-01");
    for (int i = 0; i < 2000; ++i, ts += frequency_step(f)) {
      calendar_features(ts, f, out);
      for (double v : out) {
        ASSERT_GE(v, -0.5);
        ASSERT_LE(v, 0.5);
      }
    }
  }
  EXPECT_THROW(parse_frequency("weekly"), ConfigError);
}

TEST(Lags, PaddingAndDefinition) {
  ScaledHistory history(0, 2, {1.0, 10.0, 2.0, 20.0, 3.0, 30.0});
  EXPECT_EQ(history.lagged(0, 1, 0), 0.0);
  EXPECT_EQ(history.lagged(2, 1, 1), 20.0);
  EXPECT_EQ(history.lagged(2, 2, 0), 1.0);
  EXPECT_EQ(history.lagged(1, 7, 0), 0.0);
  EXPECT_THROW(history.lagged(2, 0, 0), ContractError);
  EXPECT_THROW(history.lagged(5, 1, 0), ContractError);

  const Dataset ds = hourly(3, 2, 8);
  const CovariateOptions opts{.calendar = false, .lags = {1}};
  const auto cov = build_covariates(ds.timestamps, 0, Frequency::Hour, opts, history);
  ASSERT_EQ(cov.width, 2u);
  EXPECT_EQ(cov.row(0)[0], 0.0);
  EXPECT_EQ(cov.row(1)[0], 1.0);
  EXPECT_EQ(cov.row(2)[1], 20.0);
}

TEST(Lags, LayoutIsCalendarThenLagMajor) {
  EXPECT_EQ(default_lags(Frequency::Day), (std::vector<std::size_t>{1, 7}));
  EXPECT_EQ(default_lags(Frequency::Hour), (std::vector<std::size_t>{1, 24}));
  EXPECT_EQ(default_lags(Frequency::HalfHour), (std::vector<std::size_t>{1, 48}));
  const CovariateOptions opts{.calendar = true, .lags = {1, 24}};
  EXPECT_EQ(covariate_width(Frequency::Hour, opts, 3), 2u + 6u);
  std::vector<double> values;
  for (int t = 0; t < 30; ++t)
    for (int d = 0; d < 3; ++d) values.push_back(100.0 * t + d);
  const ScaledHistory history(0, 3, values);
  const Dataset ds = hourly(30, 3, 9);
  std::vector<double> row(8);
  covariate_row(ds.timestamps[25], 25, Frequency::Hour, opts, history, row);
  EXPECT_EQ(row[2], 2400.0);
  EXPECT_EQ(row[4], 2402.0);
  EXPECT_EQ(row[5], 100.0);
  EXPECT_EQ(row[7], 102.0);
}

TEST(Covariates, NoLeakFromCurrentOrLaterTargets) {
  // Rows 0..39 of history; covariates for rows 20..39. Perturbing the targets
  // from row k on must leave the covariates of rows <= k unchanged.
  num::RngStream rng(10);
  std::vector<double> values(40 * 2);
  for (double& v : values) v = rng.uniform();
  const Dataset ds = hourly(40, 2, 11);
  const CovariateOptions opts{.calendar = true, .lags = {1, 24}};
  const std::span<const Timestamp> stamps = std::span(ds.timestamps).subspan(20);
  const auto base = build_covariates(stamps, 20, Frequency::Hour, opts, ScaledHistory(0, 2, values));
  for (std::size_t k = 20; k < 40; ++k) {
    std::vector<double> perturbed = values;
    for (std::size_t i = k * 2; i < perturbed.size(); ++i) perturbed[i] += 1000.0;
    const auto cov = build_covariates(stamps, 20, Frequency::Hour, opts, ScaledHistory(0, 2, perturbed));
    for (std::size_t r = 0; r + 20 <= k; ++r) {
      for (std::size_t c = 0; c < cov.width; ++c) ASSERT_EQ(cov.row(r)[c], base.row(r)[c]) << "k=" << k;
    }
  }
}
