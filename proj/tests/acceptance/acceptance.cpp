// SPDX-License-Identifier: Apache-2.0
// Acceptance suite: one PASS/FAIL line per criterion. Exit status is non-zero
// when any blocking criterion fails. Criterion 8 runs only when
// TIMEGRAD_EXCHANGE_CSV names a wide CSV of daily exchange rates.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "support/gradcheck.hpp"
#include "timegrad/cli/commands.hpp"
#include "timegrad/data/dataset.hpp"
#include "timegrad/diffusion/process.hpp"
#include "timegrad/diffusion/schedule.hpp"
#include "timegrad/engine/checkpoint.hpp"
#include "timegrad/engine/forecast.hpp"
#include "timegrad/engine/synthetic.hpp"
#include "timegrad/engine/train.hpp"
#include "timegrad/metrics/crps.hpp"
#include "timegrad/model/denoiser.hpp"
#include "timegrad/model/encoder.hpp"
#include "timegrad/num/params.hpp"

using namespace timegrad;
using num::Tensor;

namespace {

// Tolerances.
constexpr double kPrimitiveGradTol = 1e-5;
constexpr double kNetworkGradTol = 1e-4;
constexpr double kStandardErrors = 4.0;
constexpr std::size_t kChainSamples = 100000;
constexpr double kPosteriorTol = 1e-10;
constexpr double kCrpsIntegrationTol = 1e-6;
constexpr double kStaticStdRelTol = 0.10;
constexpr double kOracleRatio = 1.5;
constexpr double kAblationRelTol = 0.20;

// Runtime budgets in seconds.
constexpr double kGradientBudget = 60.0;
constexpr double kDiffusionBudget = 60.0;
constexpr double kCrpsBudget = 30.0;
constexpr double kStaticBudget = 600.0;
constexpr double kForecastBudget = 1800.0;
constexpr double kAblationBudget = 3600.0;

// Synthetic forecasting fixture.
constexpr std::size_t kTrainSteps = 2000;
constexpr std::size_t kHorizon = 24;
constexpr std::size_t kWindows = 4;
constexpr std::size_t kSamples = 100;
constexpr std::array<std::uint64_t, 3> kSeeds{0, 1, 2};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, const Outcome& o, bool blocking = true) {
  std::printf("[%s] %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass && blocking) ++failures;
}

template <typename... Args>
std::string format(const char* fmt, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Gradients

double primitive_gradients() {
  using check::gradient_rel_error;
  using check::project;
  using check::random_parameter;
  const Tensor a = random_parameter({3, 4}, 50), b = random_parameter({3, 4}, 51);
  const Tensor v = random_parameter({4}, 52), c = random_parameter({3}, 53);
  const Tensor wide = random_parameter({3, 4}, 54, 2.0);
  const Tensor m = random_parameter({4, 3}, 55), n = random_parameter({3, 5}, 56);
  const std::vector<Tensor> rows{a, b};
  const std::vector<std::size_t> idx{2, 0, 2, 1};
  std::vector<std::pair<std::function<Tensor()>, std::vector<Tensor>>> cases = {
      {[&] { return project(num::add(a, b)); }, {a, b}},
      {[&] { return project(num::sub(a, b)); }, {a, b}},
      {[&] { return project(num::mul(a, b)); }, {a, b}},
      {[&] { return project(num::scale(a, -1.7)); }, {a}},
      {[&] { return project(num::add_rowwise(a, v)); }, {a, v}},
      {[&] { return project(num::broadcast_rows(v, 5)); }, {v}},
      {[&] { return project(num::broadcast_spatial(c, 4)); }, {c}},
      {[&] { return project(num::reshape(a, {2, 6})); }, {a}},
      {[&] { return project(num::slice(a, 1, 1, 2)); }, {a}},
      {[&] { return project(num::concat(rows, 1)); }, {a, b}},
      {[&] { return project(num::gather_rows(a, idx)); }, {a}},
      {[&] { return project(num::sigmoid(wide)); }, {wide}},
      {[&] { return project(num::tanh(wide)); }, {wide}},
      {[&] { return project(num::softplus(wide)); }, {wide}},
      {[&] { return num::mean(a); }, {a}},
      {[&] { return num::sum_squares(a); }, {a}},
      {[&] { return project(num::matmul(m, n)); }, {m, n}},
  };
  const Tensor x = random_parameter({2, 3, 5}, 57), w = random_parameter({4, 3, 3}, 58);
  const Tensor bias = random_parameter({4}, 59);
  for (std::size_t dil : {1u, 2u}) {
    cases.push_back({[&, dil] { return project(num::conv1d_circular(x, w, bias, dil)); }, {x, w, bias}});
  }
  double worst = 0.0;
  for (auto& [f, leaves] : cases) worst = std::max(worst, gradient_rel_error(f, leaves));
  return worst;
}

double residual_block_gradients() {
  using check::random_parameter;
  const std::size_t ch = 4, h = 3, e = 4, width = 5, batch = 2;
  double worst = 0.0;
  for (std::size_t dil : {1u, 2u}) {
    const std::uint64_t s = 300 + 20 * dil;
    model::ResidualBlockParams p;
    p.dilation = dil;
    p.dilated_weight = random_parameter({2 * ch, ch, 3}, s + 1, 0.5);
    p.dilated_bias = random_parameter({2 * ch}, s + 2, 0.5);
    p.cond_weight = random_parameter({h, 2 * ch}, s + 3, 0.5);
    p.cond_bias = random_parameter({2 * ch}, s + 4, 0.5);
    p.noise_weight = random_parameter({e, 2 * ch}, s + 5, 0.5);
    p.spatial_weight = random_parameter({2 * ch, 1, 1}, s + 6, 0.5);
    p.out_weight = random_parameter({2 * ch, ch, 1}, s + 7, 0.5);
    p.out_bias = random_parameter({2 * ch}, s + 8, 0.5);
    model::BlockConditioning bc;
    bc.cond = random_parameter({batch, h}, s + 9);
    bc.noise_table = random_parameter({2, e}, s + 10).detach();
    bc.noise_rows = {0, 1};
    bc.spatial = random_parameter({batch, 1, width}, s + 11);
    const Tensor x = random_parameter({batch, ch, width}, s + 12);
    const std::vector<Tensor> leaves{x,           bc.cond,      bc.spatial,     p.dilated_weight,
                                     p.dilated_bias, p.cond_weight, p.cond_bias,  p.noise_weight,
                                     p.spatial_weight, p.out_weight, p.out_bias};
    worst = std::max(worst, check::gradient_rel_error(
                                [&] {
                                  const auto out = model::residual_block_forward(x, bc, p);
                                  return num::add(check::project(out.residual, 1), check::project(out.skip, 2));
                                },
                                leaves));
  }
  return worst;
}

void randomise(num::ParameterSet& params, std::uint64_t seed, double scale) {
  num::RngStream rng(seed);
  for (auto& e : params.entries()) {
    auto v = e.value.mutable_data();
    rng.fill_normal(v);
    for (double& x : v) x *= scale;
  }
}

double network_gradient() {
  num::ParameterSet params;
  const model::Denoiser net(model::DenoiserConfig{.dimension = 4}, params, num::RngStream(3));
  randomise(params, 33, 0.3);
  const Tensor xn = check::random_parameter({2, 4}, 34);
  const Tensor cond = check::random_parameter({2, 40}, 35);
  const std::vector<diffusion::NoiseLevel> levels{diffusion::NoiseLevel{2}, diffusion::NoiseLevel{77}};
  std::vector<Tensor> leaves{xn, cond};
  for (const auto& e : params.entries()) leaves.push_back(e.value);
  return check::gradient_rel_error([&] { return check::project(net.predict(xn, cond, levels)); }, leaves);
}

double encoder_gradient() {
  num::ParameterSet params;
  const model::Encoder enc(model::EncoderConfig{.hidden = 6, .input_size = 3}, params, num::RngStream(7));
  randomise(params, 70, 0.5);
  std::vector<Tensor> inputs;
  for (std::size_t t = 0; t < 5; ++t) inputs.push_back(check::random_parameter({2, 3}, 80 + t));
  std::vector<Tensor> leaves = inputs;
  for (const auto& e : params.entries()) leaves.push_back(e.value);
  return check::gradient_rel_error(
      [&] { return check::project(enc.unroll(inputs, enc.zero_state(2)).back().conditioning()); }, leaves);
}

Outcome criterion_gradients() {
  const auto start = Clock::now();
  const double prim = primitive_gradients(), block = residual_block_gradients();
  const double enc = encoder_gradient(), net = network_gradient();
  const double elapsed = seconds_since(start);
  Outcome o;
  o.pass = prim <= kPrimitiveGradTol && block <= kPrimitiveGradTol && enc <= kPrimitiveGradTol &&
           net <= kNetworkGradTol && elapsed < kGradientBudget;
  o.detail = format("primitives %.2e, blocks %.2e, encoder %.2e (tol %.0e); network %.2e (tol %.0e); %.1fs", prim,
                    block, enc, kPrimitiveGradTol, net, kNetworkGradTol, elapsed);
  return o;
}

// ---------------------------------------------------------------------------
// 2. Diffusion oracles

diffusion::DiffusionSchedule random_schedule(std::size_t levels, std::uint64_t seed) {
  num::RngStream rng(seed);
  std::vector<double> betas(levels);
  for (double& b : betas) b = 0.01 + 0.4 * rng.uniform();
  return diffusion::DiffusionSchedule::from_betas(betas);
}

Outcome criterion_diffusion() {
  const auto start = Clock::now();
  const auto sched = random_schedule(10, 17);

  // Iterated forward steps against the closed-form marginal, every level.
  const double x0 = -0.7;
  num::RngStream rng(12);
  Tensor x = Tensor::full({kChainSamples}, x0);
  double worst_z = 0.0;
  const double count = static_cast<double>(kChainSamples);
  for (std::size_t k = 1; k <= sched.levels(); ++k) {
    const diffusion::NoiseLevel n{k};
    x = diffusion::forward_step(x, n, rng, sched);
    double mean = 0.0;
    for (double v : x.data()) mean += v;
    mean /= count;
    double var = 0.0;
    for (double v : x.data()) var += (v - mean) * (v - mean);
    var /= count - 1.0;
    const double want_mean = std::sqrt(sched.alpha_bar(n)) * x0, want_var = 1.0 - sched.alpha_bar(n);
    worst_z = std::max(worst_z, std::abs(mean - want_mean) / std::sqrt(want_var / count));
    worst_z = std::max(worst_z, std::abs(var - want_var) / (want_var * std::sqrt(2.0 / (count - 1.0))));
  }

  // Posterior against conditioning the joint Gaussian of (x^{n-1}, x^n) given x^0.
  double worst_post = 0.0;
  const double clean = 0.8, noisy = -1.3;
  for (std::size_t k = 1; k <= sched.levels(); ++k) {
    const diffusion::NoiseLevel n{k};
    const double m = std::sqrt(sched.alpha_bar(k - 1)) * clean, v = 1.0 - sched.alpha_bar(k - 1);
    const double cov = std::sqrt(sched.alpha(n)) * v, var_n = sched.alpha(n) * v + sched.beta(n);
    const double cond_mean = m + cov / var_n * (noisy - std::sqrt(sched.alpha(n)) * m);
    const double cond_var = v - cov * cov / var_n;
    const double mu =
        diffusion::posterior_mean(Tensor::from({1}, {noisy}), Tensor::from({1}, {clean}), n, sched).item();
    worst_post = std::max({worst_post, std::abs(mu - cond_mean), std::abs(sched.tilde_beta(n) - cond_var)});
  }
  const double elapsed = seconds_since(start);
  Outcome o;
  o.pass = worst_z <= kStandardErrors && worst_post <= kPosteriorTol && elapsed < kDiffusionBudget;
  o.detail = format("chain vs marginal max %.2f SE (tol %.0f, %zu samples); posterior max error %.2e (tol %.0e); %.1fs",
                    worst_z, kStandardErrors, kChainSamples, worst_post, kPosteriorTol, elapsed);
  return o;
}

// ---------------------------------------------------------------------------
// 3. CRPS oracles

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

Outcome criterion_crps() {
  const auto start = Clock::now();
  num::RngStream rng(1);
  double worst = 0.0;
  for (int instance = 0; instance < 100; ++instance) {
    std::vector<double> samples(1 + rng.uniform_index(60));
    rng.fill_normal(samples);
    const double spread = 1.0 + 3.0 * rng.uniform();
    for (double& v : samples) v *= spread;
    const double x = 4.0 * (rng.uniform() - 0.5);
    worst = std::max(worst, std::abs(metrics::crps_empirical(samples, x) - crps_by_integration(samples, x)));
  }
  const bool two_point = metrics::crps_empirical(std::vector<double>{0.0, 1.0}, 0.0) == 0.25;
  const bool single = metrics::crps_empirical(std::vector<double>{2.5}, -1.0) == 3.5;

  // Dyadic values keep shifts and power-of-two scalings exact.
  std::vector<double> dyadic(25);
  for (double& v : dyadic) v = static_cast<double>(rng.uniform_index(64)) / 8.0;
  const double x = 3.125, base = metrics::crps_empirical(dyadic, x);
  bool invariants = true;
  for (double c : {-7.0, 3.0, 1024.0}) {
    auto shifted = dyadic;
    for (double& v : shifted) v += c;
    invariants = invariants && metrics::crps_empirical(shifted, x + c) == base;
  }
  for (double k : {0.25, 2.0, 64.0}) {
    auto scaled = dyadic;
    for (double& v : scaled) v *= k;
    invariants = invariants && metrics::crps_empirical(scaled, k * x) == k * base;
  }
  const double elapsed = seconds_since(start);
  Outcome o;
  o.pass = worst <= kCrpsIntegrationTol && two_point && single && invariants && elapsed < kCrpsBudget;
  o.detail = format("energy vs integration max %.2e (tol %.0e); {0,1} vs 0 %s; single sample %s; invariants %s; %.1fs",
                    worst, kCrpsIntegrationTol, two_point ? "0.25" : "wrong", single ? "ok" : "wrong",
                    invariants ? "exact" : "broken", elapsed);
  return o;
}

// ---------------------------------------------------------------------------
// 4. Static distribution

Outcome criterion_static() {
  const auto start = Clock::now();
  const double mean = 3.0, sd = 0.5;
  const std::size_t horizon = 8, trajectories = 1250;  // 10^4 values
  const auto ds = engine::generate_static(mean, sd, 3000, 21);
  engine::ModelConfig mc;
  mc.dimension = 1;
  mc.frequency = data::Frequency::Hour;
  mc.prediction_length = horizon;
  mc.covariates = {.calendar = false, .lags = {1}};
  mc.diffusion_levels = 20;
  engine::TrainConfig tc;
  tc.max_epochs = 20;
  tc.batches_per_epoch = 50;
  tc.patience = 1000;
  tc.seed = 22;
  const auto trained = engine::train(ds, mc, tc);
  const data::WindowSample window{ds.length() - 2 * horizon, horizon, horizon};
  const auto f = engine::forecast_window(trained.model, ds, window, trajectories, num::RngStream(23));
  const auto& values = f.samples.values;
  const double count = static_cast<double>(values.size());
  double m = 0.0;
  for (double v : values) m += v;
  m /= count;
  double var = 0.0;
  for (double v : values) var += (v - m) * (v - m);
  const double s = std::sqrt(var / (count - 1.0));
  const double mean_tol = 3.0 * sd / std::sqrt(1e4) * 3.0;
  const double elapsed = seconds_since(start);
  Outcome o;
  o.pass = std::abs(m - mean) <= mean_tol && std::abs(s - sd) <= kStaticStdRelTol * sd && elapsed < kStaticBudget;
  o.detail = format("N=20, %zu values: mean %.4f (want 3 +- %.3f), std %.4f (want 0.5 +- %.0f%%); %.0fs",
                    values.size(), m, mean_tol, s, 100.0 * kStaticStdRelTol, elapsed);
  return o;
}

// ---------------------------------------------------------------------------
// 5 and 6. VAR(1) fixture

struct FixtureScore {
  double model = 0.0;
  double persistence = 0.0;
  double oracle = 0.0;
  double seconds = 0.0;
};

FixtureScore run_fixture(std::size_t levels, std::uint64_t seed) {
  const auto start = Clock::now();
  const engine::VarProcess process;
  const auto ds = engine::generate_var(process, kTrainSteps + 2 * kWindows * kHorizon, 1000 + seed);
  engine::ModelConfig mc;
  mc.dimension = 2;
  mc.frequency = data::Frequency::Hour;
  mc.prediction_length = kHorizon;
  mc.covariates.lags = data::default_lags(mc.frequency);
  mc.diffusion_levels = levels;
  engine::TrainConfig tc;
  tc.max_epochs = 10;
  tc.batches_per_epoch = 50;
  tc.patience = 1000;
  tc.seed = seed;
  tc.test_windows = kWindows;
  const auto trained = engine::train(ds, mc, tc);
  const auto forecasts = engine::forecast_rolling(trained.model, ds, kWindows, kSamples, num::RngStream(seed + 77));
  FixtureScore score;
  const num::RngStream oracle_rng(seed + 99);
  for (std::size_t w = 0; w < forecasts.size(); ++w) {
    const auto& f = forecasts[w];
    const auto context = data::window_values(ds, f.window.offset, f.window.context_length);
    const std::array<double, 2> last{context[context.size() - 2], context[context.size() - 1]};
    score.model += metrics::crps_sum(f.samples, f.truth);
    score.persistence += metrics::crps_sum(metrics::persistence_baseline(context, 2, kHorizon, kSamples), f.truth);
    score.oracle += metrics::crps_sum(
        engine::var_oracle_forecast(process, last, kHorizon, kSamples, oracle_rng.split(w)), f.truth);
  }
  const double windows = static_cast<double>(forecasts.size());
  score.model /= windows;
  score.persistence /= windows;
  score.oracle /= windows;
  score.seconds = seconds_since(start);
  std::fprintf(stderr, "  N=%zu seed %llu: model %.4f persistence %.4f oracle %.4f (%.0fs)\n", levels,
               static_cast<unsigned long long>(seed), score.model, score.persistence, score.oracle, score.seconds);
  return score;
}

FixtureScore seed_average(std::size_t levels) {
  FixtureScore avg;
  for (std::uint64_t seed : kSeeds) {
    const auto s = run_fixture(levels, seed);
    avg.model += s.model / kSeeds.size();
    avg.persistence += s.persistence / kSeeds.size();
    avg.oracle += s.oracle / kSeeds.size();
    avg.seconds += s.seconds;
  }
  return avg;
}

Outcome criterion_forecasting(const FixtureScore& s) {
  Outcome o;
  o.pass = s.model < s.persistence && s.model <= kOracleRatio * s.oracle && s.seconds < kForecastBudget;
  o.detail = format("CRPS_sum over %zu seeds: model %.4f, persistence %.4f, oracle %.4f, model/oracle %.3f (tol %.1f); %.0fs",
                    kSeeds.size(), s.model, s.persistence, s.oracle, s.model / s.oracle, kOracleRatio, s.seconds);
  return o;
}

Outcome criterion_ablation(const FixtureScore& n100, const FixtureScore& n10, const FixtureScore& n2) {
  const double rel = std::abs(n10.model - n100.model) / n100.model;
  const double elapsed = n100.seconds + n10.seconds + n2.seconds;
  Outcome o;
  o.pass = rel <= kAblationRelTol && n2.model > n100.model && elapsed < kAblationBudget;
  o.detail = format("CRPS_sum N=100 %.4f, N=10 %.4f (%.1f%% off, tol %.0f%%), N=2 %.4f (must exceed N=100); %.0fs",
                    n100.model, n10.model, 100.0 * rel, 100.0 * kAblationRelTol, n2.model, elapsed);
  return o;
}

// ---------------------------------------------------------------------------
// 7. Reproducibility

Outcome criterion_reproducibility() {
  const auto ds = engine::generate_var(engine::VarProcess{}, 400, 31);
  engine::ModelConfig mc;
  mc.dimension = 2;
  mc.prediction_length = 12;
  mc.covariates.lags = {1, 24};
  mc.rnn_hidden = 16;
  mc.residual_layers = 4;
  mc.diffusion_levels = 20;
  engine::TrainConfig tc;
  tc.batch_size = 16;
  tc.max_epochs = 2;
  tc.batches_per_epoch = 5;
  tc.test_windows = 2;
  tc.seed = 32;

  std::vector<std::string> checkpoints, csvs;
  for (int run = 0; run < 2; ++run) {
    const auto trained = engine::train(ds, mc, tc);
    checkpoints.push_back(engine::encode_checkpoint(trained.model, trained.best_validation_loss, tc.seed));
    const auto f = engine::forecast_rolling(trained.model, ds, 2, 10, num::RngStream(33));
    std::ostringstream out;
    cli::write_samples_csv(out, f);
    csvs.push_back(out.str());
  }
  const auto restored = engine::decode_checkpoint(checkpoints[0]);
  const auto f = engine::forecast_rolling(restored.model, ds, 2, 10, num::RngStream(33));
  std::ostringstream out;
  cli::write_samples_csv(out, f);

  const bool same_ckpt = checkpoints[0] == checkpoints[1];
  const bool same_csv = csvs[0] == csvs[1];
  const bool restored_same = out.str() == csvs[0];
  Outcome o;
  o.pass = same_ckpt && same_csv && restored_same;
  o.detail = format("checkpoints %s, forecast CSVs %s, save/load/forecast %s", same_ckpt ? "identical" : "differ",
                    same_csv ? "identical" : "differ", restored_same ? "identical" : "differs");
  return o;
}

// ---------------------------------------------------------------------------
// 8. Exchange-shaped real data (informative)

void criterion_exchange() {
  const char* path = std::getenv("TIMEGRAD_EXCHANGE_CSV");
  if (path == nullptr || *path == '\0') {
    std::printf("[SKIP] 8 exchange-rate stretch run: TIMEGRAD_EXCHANGE_CSV not set (informative, non-blocking)\n");
    return;
  }
  const std::size_t horizon = 30, windows = 5;
  const auto ds = data::load_dataset(path, data::DataFormat::CsvWide, data::Frequency::Day);
  engine::ModelConfig mc;
  mc.dimension = ds.dimension;
  mc.frequency = data::Frequency::Day;
  mc.prediction_length = horizon;
  mc.covariates.lags = data::default_lags(mc.frequency);
  engine::TrainConfig tc;
  tc.test_windows = windows;
  const auto trained = engine::train(ds, mc, tc);
  const auto forecasts = engine::forecast_rolling(trained.model, ds, windows, kSamples, num::RngStream(41));
  double model = 0.0, persistence = 0.0;
  for (const auto& f : forecasts) {
    const auto context = data::window_values(ds, f.window.offset, f.window.context_length);
    model += metrics::crps_sum(f.samples, f.truth);
    persistence += metrics::crps_sum(metrics::persistence_baseline(context, ds.dimension, horizon, kSamples), f.truth);
  }
  // Normalised by the summed absolute target, the usual reporting convention.
  double scale = 0.0;
  for (const auto& f : forecasts)
    for (double v : f.truth) scale += std::abs(v);
  scale /= static_cast<double>(forecasts.size() * horizon);
  Outcome o;
  o.pass = model < persistence;
  o.detail = format("D=%zu daily, horizon 30, %zu windows: CRPS_sum model %.5f, persistence %.5f (normalised %.4f vs %.4f)",
                    ds.dimension, windows, model / windows, persistence / windows, model / windows / scale,
                    persistence / windows / scale);
  report(8, "exchange-rate stretch run (informative)", o, false);
}

}  // namespace

int main() {
  num::set_warning_handler([](const std::string&) {});
  report(1, "gradient suite", criterion_gradients());
  report(2, "diffusion oracles", criterion_diffusion());
  report(3, "CRPS oracles", criterion_crps());
  report(4, "static distribution recovery", criterion_static());

  const auto n100 = seed_average(100);
  report(5, "VAR(1) forecasting vs persistence and oracle", criterion_forecasting(n100));
  const auto n10 = seed_average(10);
  const auto n2 = seed_average(2);
  report(6, "diffusion length ablation", criterion_ablation(n100, n10, n2));

  report(7, "reproducibility and persistence", criterion_reproducibility());
  criterion_exchange();

  std::printf("%d blocking criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
