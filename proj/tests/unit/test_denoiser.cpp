// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

#include "support/gradcheck.hpp"
#include "timegrad/error.hpp"
#include "timegrad/model/denoiser.hpp"
#include "timegrad/num/params.hpp"

using namespace timegrad;
using diffusion::NoiseLevel;
using model::BlockConditioning;
using model::ResidualBlockParams;
using num::Tensor;

namespace {

struct QuietWarnings {
  QuietWarnings() { num::set_warning_handler([](const std::string&) {}); }
  ~QuietWarnings() { num::set_warning_handler({}); }
};

ResidualBlockParams random_block(std::size_t c, std::size_t h, std::size_t e, std::size_t dilation,
                                 bool spatial, std::uint64_t seed) {
  ResidualBlockParams p;
  p.index = 3;
  p.dilation = dilation;
  p.dilated_weight = check::random_parameter({2 * c, c, 3}, seed + 1, 0.5);
  p.dilated_bias = check::random_parameter({2 * c}, seed + 2, 0.5);
  p.cond_weight = check::random_parameter({h, 2 * c}, seed + 3, 0.5);
  p.cond_bias = check::random_parameter({2 * c}, seed + 4, 0.5);
  p.noise_weight = check::random_parameter({e, 2 * c}, seed + 5, 0.5);
  if (spatial) p.spatial_weight = check::random_parameter({2 * c, 1, 1}, seed + 6, 0.5);
  p.out_weight = check::random_parameter({2 * c, c, 1}, seed + 7, 0.5);
  p.out_bias = check::random_parameter({2 * c}, seed + 8, 0.5);
  return p;
}

BlockConditioning random_conditioning(std::size_t batch, std::size_t h, std::size_t e, std::size_t width,
                                      bool spatial, std::uint64_t seed) {
  BlockConditioning bc;
  bc.cond = check::random_parameter({batch, h}, seed + 20);
  bc.noise_table = check::random_parameter({2, e}, seed + 21).detach();
  for (std::size_t b = 0; b < batch; ++b) bc.noise_rows.push_back(b % 2);
  if (spatial) bc.spatial = check::random_parameter({batch, 1, width}, seed + 22);
  return bc;
}

Tensor shift_last_axis(const Tensor& t, std::size_t by) {
  const std::size_t width = t.dim(t.rank() - 1);
  std::vector<double> out(t.numel());
  for (std::size_t i = 0; i < t.numel(); ++i) {
    const std::size_t row = i / width, col = i % width;
    out[row * width + (col + by) % width] = t.at(i);
  }
  return Tensor::from(t.shape(), out);
}

void randomise(num::ParameterSet& params, std::uint64_t seed, double scale) {
  num::RngStream rng(seed);
  for (auto& e : params.entries()) {
    auto v = e.value.mutable_data();
    rng.fill_normal(v);
    for (double& x : v) x *= scale;
  }
}

}  // namespace

TEST(NoiseEmbedding, ShapeRangeAndValues) {
  const model::NoiseEmbeddingTable table;
  EXPECT_EQ(table.dim(), 32u);
  for (std::size_t n = 1; n <= 500; ++n) {
    const auto e = table.embed(n);
    ASSERT_EQ(e.size(), 32u);
    for (double v : e) {
      ASSERT_GE(v, -1.0);
      ASSERT_LE(v, 1.0);
    }
  }
  EXPECT_NEAR(table.embed(2)[0] - table.embed(1)[0], std::sin(2.0) - std::sin(1.0), 1e-15);
  EXPECT_NEAR(table.embed(1)[3], std::cos(1.0 / std::pow(500.0, 2.0 / 32.0)), 1e-15);
  EXPECT_THROW(table.embed(0), ContractError);
  EXPECT_THROW(table.embed(501), ContractError);
}

TEST(NoiseEmbedding, InjectiveOnRange) {
  const model::NoiseEmbeddingTable table;
  std::vector<std::vector<double>> all;
  for (std::size_t n = 1; n <= 500; ++n) all.push_back(table.embed(n));
  for (std::size_t a = 0; a < all.size(); ++a) {
    for (std::size_t b = a + 1; b < all.size(); ++b) {
      double dist = 0.0;
      for (std::size_t k = 0; k < 32; ++k) dist += std::abs(all[a][k] - all[b][k]);
      ASSERT_GT(dist, 1e-6) << a + 1 << " vs " << b + 1;
    }
  }
}

TEST(ResidualBlock, ZeroInputGivesZeroOutput) {
  auto p = random_block(8, 5, 4, 1, true, 100);
  p.dilated_bias = Tensor::zeros({16});
  p.cond_bias = Tensor::zeros({16});
  p.out_bias = Tensor::zeros({16});
  BlockConditioning bc;
  bc.cond = Tensor::zeros({2, 5});
  bc.noise_table = Tensor::zeros({1, 4});
  bc.noise_rows = {0, 0};
  bc.spatial = Tensor::zeros({2, 1, 6});
  const auto out = model::residual_block_forward(Tensor::zeros({2, 8, 6}), bc, p);
  for (double v : out.residual.data()) EXPECT_EQ(v, 0.0);
  for (double v : out.skip.data()) EXPECT_EQ(v, 0.0);
}

TEST(ResidualBlock, CyclicShiftEquivariance) {
  for (std::size_t dil : {1u, 2u}) {
    const auto p = random_block(4, 3, 4, dil, true, 200);
    auto bc = random_conditioning(2, 3, 4, 7, true, 210);
    const Tensor x = check::random_parameter({2, 4, 7}, 220);
    const auto base = model::residual_block_forward(x, bc, p);
    bc.spatial = shift_last_axis(bc.spatial, 2);
    const auto shifted = model::residual_block_forward(shift_last_axis(x, 2), bc, p);
    const Tensor want_r = shift_last_axis(base.residual, 2), want_s = shift_last_axis(base.skip, 2);
    for (std::size_t i = 0; i < want_r.numel(); ++i) {
      EXPECT_NEAR(shifted.residual.at(i), want_r.at(i), 1e-14);
      EXPECT_NEAR(shifted.skip.at(i), want_s.at(i), 1e-14);
    }
  }
}

TEST(ResidualBlock, GradientMatchesFiniteDifferences) {
  for (std::size_t dil : {1u, 2u}) {
    const auto p = random_block(4, 3, 4, dil, true, 300);
    const auto bc = random_conditioning(2, 3, 4, 5, true, 310);
    const Tensor x = check::random_parameter({2, 4, 5}, 320);
    const std::vector<Tensor> leaves{x,          bc.cond,       bc.spatial,      p.dilated_weight, p.dilated_bias,
                                     p.cond_weight, p.cond_bias, p.noise_weight, p.spatial_weight,
                                     p.out_weight, p.out_bias};
    const double err = check::gradient_rel_error(
        [&] {
          const auto out = model::residual_block_forward(x, bc, p);
          return num::add(check::project(out.residual, 1), check::project(out.skip, 2));
        },
        leaves);
    EXPECT_LT(err, 1e-5) << "dilation " << dil;
  }
}

TEST(ResidualBlock, ShapeErrorNamesBlock) {
  const auto p = random_block(4, 3, 4, 1, false, 400);
  const auto bc = random_conditioning(2, 3, 4, 5, false, 410);
  try {
    model::residual_block_forward(Tensor::zeros({2, 3, 5}), bc, p);
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    EXPECT_NE(std::string(e.what()).find("residual block 3"), std::string::npos) << e.what();
  }
}

TEST(Denoiser, DilationPatternAlternates) {
  num::ParameterSet params;
  const model::Denoiser net(model::DenoiserConfig{.dimension = 4}, params, num::RngStream(1));
  ASSERT_EQ(net.blocks().size(), 8u);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(net.blocks()[i].dilation, i % 2 == 0 ? 1u : 2u);
}

TEST(Denoiser, UntrainedOutputIsZeroForAnyWidth) {
  QuietWarnings quiet;
  num::RngStream pick(5);
  std::vector<std::size_t> widths{1, 2, 8, 963};
  for (int i = 0; i < 4; ++i) widths.push_back(1 + pick.uniform_index(64));
  for (std::size_t d : widths) {
    num::ParameterSet params;
    const model::Denoiser net(model::DenoiserConfig{.dimension = d}, params, num::RngStream(2));
    const Tensor xn = check::random_parameter({2, d}, d).detach();
    const Tensor cond = check::random_parameter({2, 40}, 7).detach();
    const std::vector<NoiseLevel> levels{NoiseLevel{1}, NoiseLevel{40}};
    const Tensor out = net.predict(xn, cond, levels);
    ASSERT_EQ(out.shape(), (num::Shape{2, d}));
    for (double v : out.data()) ASSERT_EQ(v, 0.0);
  }
}

TEST(Denoiser, WidthMismatchIsDimensionError) {
  num::ParameterSet params;
  const model::Denoiser net(model::DenoiserConfig{.dimension = 4}, params, num::RngStream(2));
  const std::vector<NoiseLevel> levels{NoiseLevel{1}};
  EXPECT_THROW(net.predict(Tensor::zeros({1, 5}), Tensor::zeros({1, 40}), levels), DimensionError);
  EXPECT_THROW(net.predict(Tensor::zeros({1, 4}), Tensor::zeros({1, 39}), levels), DimensionError);
}

TEST(Denoiser, FullNetworkGradient) {
  num::ParameterSet params;
  const model::Denoiser net(model::DenoiserConfig{.dimension = 4}, params, num::RngStream(3));
  randomise(params, 33, 0.3);
  const Tensor xn = check::random_parameter({2, 4}, 34);
  const Tensor cond = check::random_parameter({2, 40}, 35);
  const std::vector<NoiseLevel> levels{NoiseLevel{2}, NoiseLevel{77}};
  std::vector<Tensor> leaves{xn, cond};
  for (const auto& e : params.entries()) leaves.push_back(e.value);
  const double err = check::gradient_rel_error([&] { return check::project(net.predict(xn, cond, levels)); }, leaves);
  EXPECT_LT(err, 1e-4);
}

TEST(Denoiser, EveryBlockFeedsTheOutput) {
  num::ParameterSet params;
  model::Denoiser net(model::DenoiserConfig{.dimension = 4}, params, num::RngStream(3));
  randomise(params, 44, 0.3);
  const Tensor xn = check::random_parameter({1, 4}, 45).detach();
  const Tensor cond = check::random_parameter({1, 40}, 46).detach();
  const std::vector<NoiseLevel> levels{NoiseLevel{10}};
  const Tensor base = net.predict(xn, cond, levels);
  for (const auto& block : net.blocks()) {
    Tensor w = block.out_weight;
    auto values = w.mutable_data();
    const std::vector<double> keep(values.begin(), values.end());
    const std::size_t c = w.dim(1);
    // Skip rows are the second half of the output 1x1 conv.
    std::fill(values.begin() + static_cast<std::ptrdiff_t>(c * c), values.end(), 0.0);
    const Tensor changed = net.predict(xn, cond, levels);
    std::copy(keep.begin(), keep.end(), values.begin());
    double diff = 0.0;
    for (std::size_t i = 0; i < base.numel(); ++i) diff += std::abs(base.at(i) - changed.at(i));
    EXPECT_GT(diff, 1e-9) << "block " << block.index;
  }
}

TEST(Denoiser, DeterministicOutput) {
  num::ParameterSet pa, pb;
  const model::Denoiser a(model::DenoiserConfig{.dimension = 3}, pa, num::RngStream(9));
  const model::Denoiser b(model::DenoiserConfig{.dimension = 3}, pb, num::RngStream(9));
  randomise(pa, 1, 0.3);
  randomise(pb, 1, 0.3);
  const Tensor xn = check::random_parameter({2, 3}, 1).detach();
  const Tensor cond = check::random_parameter({2, 40}, 2).detach();
  const std::vector<NoiseLevel> levels{NoiseLevel{5}, NoiseLevel{6}};
  const Tensor ya = a.predict(xn, cond, levels), yb = b.predict(xn, cond, levels);
  for (std::size_t i = 0; i < ya.numel(); ++i) EXPECT_EQ(ya.at(i), yb.at(i));
}

TEST(Denoiser, RowsAreIndependentOfBatchMates) {
  num::ParameterSet params;
  const model::Denoiser net(model::DenoiserConfig{.dimension = 3}, params, num::RngStream(9));
  randomise(params, 2, 0.3);
  const Tensor xn = check::random_parameter({2, 3}, 3).detach();
  const Tensor cond = check::random_parameter({2, 40}, 4).detach();
  const std::vector<NoiseLevel> both{NoiseLevel{5}, NoiseLevel{60}};
  const std::vector<NoiseLevel> second{NoiseLevel{60}};
  const Tensor full = net.predict(xn, cond, both);
  const Tensor row = net.predict(num::slice(xn, 0, 1, 1), num::slice(cond, 0, 1, 1), second);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(full.at(3 + i), row.at(i));
}
