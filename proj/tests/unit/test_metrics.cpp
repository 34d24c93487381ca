// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include <json.hpp>

#include "timegrad/error.hpp"
#include "timegrad/metrics/crps.hpp"
#include "timegrad/num/rng.hpp"

using namespace timegrad;
using metrics::SampleCube;

namespace {

/// Integral of (F(z) - 1{x <= z})^2 over a grid holding every breakpoint, so
/// the piecewise-constant integrand is evaluated exactly on each cell.
double crps_by_integration(std::vector<double> samples, double x) {
  std::vector<double> grid = samples;
  grid.push_back(x);
  std::sort(grid.begin(), grid.end());
  const double s = static_cast<double>(samples.size());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double mid = 0.5 * (grid[i] + grid[i + 1]);
    double below = 0.0;
    for (double v : samples) below += v <= mid ? 1.0 : 0.0;
    const double gap = below / s - (x <= mid ? 1.0 : 0.0);
    total += gap * gap * (grid[i + 1] - grid[i]);
  }
  return total;
}

std::vector<double> normals(num::RngStream& rng, std::size_t n, double mean = 0.0, double sd = 1.0) {
  std::vector<double> v(n);
  rng.fill_normal(v);
  for (double& x : v) x = mean + sd * x;
  return v;
}

}  // namespace

TEST(Crps, KnownValues) {
  const std::vector<double> two{0.0, 1.0};
  EXPECT_DOUBLE_EQ(metrics::crps_empirical(two, 0.0), 0.25);
  const std::vector<double> one{2.5};
  EXPECT_EQ(metrics::crps_empirical(one, -1.0), 3.5);
  const std::vector<double> same(7, 4.0);
  EXPECT_EQ(metrics::crps_empirical(same, 4.0), 0.0);
  EXPECT_THROW(metrics::crps_empirical(std::vector<double>{}, 0.0), ContractError);
}

TEST(Crps, UniformGridMidpointRule) {
  // Breakpoints at 0 and 1 sit on grid nodes, so the midpoint rule is exact.
  const double h = 1e-4;
  double total = 0.0;
  for (double z = -2.0 + 0.5 * h; z < 3.0; z += h) {
    const double f = (z >= 0.0 ? 0.5 : 0.0) + (z >= 1.0 ? 0.5 : 0.0);
    const double gap = f - (z >= 0.0 ? 1.0 : 0.0);
    total += gap * gap * h;
  }
  EXPECT_NEAR(total, 0.25, 1e-6);
}

TEST(Crps, EnergyFormMatchesIntegration) {
  num::RngStream rng(1);
  for (int instance = 0; instance < 100; ++instance) {
    const std::size_t s = 1 + rng.uniform_index(60);
    const auto samples = normals(rng, s, 0.0, 1.0 + 3.0 * rng.uniform());
    const double x = 4.0 * (rng.uniform() - 0.5);
    EXPECT_NEAR(metrics::crps_empirical(samples, x), crps_by_integration(samples, x), 1e-6)
        << "instance " << instance;
  }
}

TEST(Crps, TranslationAndScaleInvariants) {
  num::RngStream rng(2);
  // Multiples of 1/8 in a small range: shifts by integers and scaling by
  // powers of two are exact, so the identities hold bit for bit.
  std::vector<double> samples(25);
  for (double& v : samples) v = static_cast<double>(rng.uniform_index(64)) / 8.0;
  const double x = 3.125, base = metrics::crps_empirical(samples, x);
  for (double c : {-7.0, 3.0, 1024.0}) {
    std::vector<double> shifted = samples;
    for (double& v : shifted) v += c;
    EXPECT_EQ(metrics::crps_empirical(shifted, x + c), base);
  }
  for (double k : {0.25, 2.0, 64.0}) {
    std::vector<double> scaled = samples;
    for (double& v : scaled) v *= k;
    EXPECT_EQ(metrics::crps_empirical(scaled, k * x), k * base);
  }
  // Arbitrary reals: the same identities up to rounding.
  const auto real = normals(rng, 40);
  const double ref = metrics::crps_empirical(real, 0.3);
  std::vector<double> moved = real, stretched = real;
  for (double& v : moved) v += 1.7;
  for (double& v : stretched) v *= 3.3;
  EXPECT_NEAR(metrics::crps_empirical(moved, 2.0), ref, 1e-12);
  EXPECT_NEAR(metrics::crps_empirical(stretched, 0.99), 3.3 * ref, 1e-12);
}

TEST(Crps, PermutationInvariant) {
  num::RngStream rng(3);
  auto samples = normals(rng, 31);
  const double base = metrics::crps_empirical(samples, 0.1);
  std::reverse(samples.begin(), samples.end());
  EXPECT_EQ(metrics::crps_empirical(samples, 0.1), base);
  std::rotate(samples.begin(), samples.begin() + 11, samples.end());
  EXPECT_EQ(metrics::crps_empirical(samples, 0.1), base);
}

TEST(Crps, ProperScoreFavoursTheTrueDistribution) {
  num::RngStream rng(4);
  double matched = 0.0, shifted = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double x = rng.normal();
    matched += metrics::crps_empirical(normals(rng, 50), x);
    shifted += metrics::crps_empirical(normals(rng, 50, 1.0), x);
  }
  EXPECT_LT(matched, shifted);
}

TEST(CrpsSum, MatchesBruteForce) {
  num::RngStream rng(5);
  SampleCube cube(3, 2, 2);
  for (double& v : cube.values) v = rng.normal();
  const std::vector<double> truth{0.3, -0.4, 1.2, 0.1};
  double expected = 0.0;
  for (std::size_t t = 0; t < 2; ++t) {
    std::vector<double> sums;
    for (std::size_t s = 0; s < 3; ++s) sums.push_back(cube.at(s, t, 0) + cube.at(s, t, 1));
    expected += crps_by_integration(sums, truth[t * 2] + truth[t * 2 + 1]);
  }
  EXPECT_NEAR(metrics::crps_sum(cube, truth), expected / 2.0, 1e-6);
}

TEST(CrpsSum, SingleEntityAndPerfectForecast) {
  num::RngStream rng(6);
  SampleCube cube(8, 4, 1);
  for (double& v : cube.values) v = rng.normal();
  const std::vector<double> truth{0.0, 1.0, -1.0, 0.5};
  double mean = 0.0;
  for (std::size_t t = 0; t < 4; ++t) {
    std::vector<double> col;
    for (std::size_t s = 0; s < 8; ++s) col.push_back(cube.at(s, t, 0));
    mean += metrics::crps_empirical(col, truth[t]) / 4.0;
  }
  EXPECT_NEAR(metrics::crps_sum(cube, truth), mean, 1e-15);
  EXPECT_NEAR(metrics::crps_per_entity(cube, truth)[0], mean, 1e-15);

  SampleCube perfect(5, 4, 1);
  for (std::size_t s = 0; s < 5; ++s)
    for (std::size_t t = 0; t < 4; ++t) perfect.at(s, t, 0) = truth[t];
  EXPECT_EQ(metrics::crps_sum(perfect, truth), 0.0);
  EXPECT_THROW(metrics::crps_sum(cube, std::vector<double>{1.0, 2.0}), DimensionError);
}

TEST(Persistence, RepeatsLastContextRow) {
  const std::vector<double> context{1.0, 2.0, 3.0, 4.0};  // two rows, D = 2
  const SampleCube p = metrics::persistence_baseline(context, 2, 5, 3);
  for (std::size_t s = 0; s < 3; ++s)
    for (std::size_t t = 0; t < 5; ++t) {
      EXPECT_EQ(p.at(s, t, 0), 3.0);
      EXPECT_EQ(p.at(s, t, 1), 4.0);
    }
  const std::vector<double> constant(10, 3.0), drift{7.0, 8.0, 9.0, 10.0, 11.0};
  const std::vector<double> flat{3.0, 3.0, 3.0, 3.0, 3.0};
  EXPECT_EQ(metrics::crps_sum(metrics::persistence_baseline(constant, 1, 5, 4), flat), 0.0);
  const std::vector<double> ramp{2.0, 4.0, 6.0};
  EXPECT_GT(metrics::crps_sum(metrics::persistence_baseline(ramp, 1, 5, 4), drift), 0.0);
}

TEST(Report, AveragesAndSerialises) {
  metrics::CrpsReport a{1.0, {0.5, 1.5}, 10, 1}, b{3.0, {1.5, 0.5}, 10, 1};
  const std::vector<metrics::CrpsReport> both{a, b};
  const auto avg = metrics::average_reports(both);
  EXPECT_EQ(avg.crps_sum, 2.0);
  EXPECT_EQ(avg.crps_per_entity, (std::vector<double>{1.0, 1.0}));
  EXPECT_EQ(avg.windows, 2u);
  EXPECT_EQ(avg.samples, 10u);
  const auto json = nlohmann::ordered_json::parse(metrics::report_json(avg));
  EXPECT_EQ(json.dump(), R"({"crps_sum":2.0,"crps_per_entity":[1.0,1.0],"S":10,"windows":2})");
}
