// SPDX-License-Identifier: Apache-2.0
#include "timegrad/num/rng.hpp"

#include <cmath>
#include <numbers>

#include "timegrad/error.hpp"

namespace timegrad::num {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return ctr;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline double to_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return static_cast<double>(bits) * 0x1.0p-53;
}

}  // namespace

RngStream RngStream::split(std::uint64_t child) const noexcept {
  return RngStream(seed_, splitmix64(splitmix64(stream_) ^ splitmix64(child + 1)));
}

std::array<std::uint32_t, 4> RngStream::next_block() {
  const std::uint64_t c = counter_++;
  return philox4x32_10(
      {static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32),
       static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
      {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
}

double RngStream::uniform() {
  const auto b = next_block();
  return to_unit(b[0], b[1]);
}

std::uint64_t RngStream::uniform_index(std::uint64_t bound) {
  if (bound == 0) throw ContractError("uniform_index: bound must be positive");
  // Rejection sampling keeps the result exactly uniform.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  for (;;) {
    const auto b = next_block();
    const std::uint64_t v = (static_cast<std::uint64_t>(b[0]) << 32) | b[1];
    if (v < limit) return v % bound;
  }
}

double RngStream::normal() {
  double v;
  fill_normal({&v, 1});
  return v;
}

// Box-Muller: each block yields two uniforms and therefore two normals.
void RngStream::fill_normal(std::span<double> out) {
  std::size_t i = 0;
  while (i < out.size()) {
    const auto b = next_block();
    const double u1 = 1.0 - to_unit(b[0], b[1]);  // (0, 1]
    const double u2 = to_unit(b[2], b[3]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    out[i++] = r * std::cos(theta);
    if (i < out.size()) out[i++] = r * std::sin(theta);
  }
}

Tensor gaussian_draw(RngStream& rng, const Shape& shape) {
  std::vector<double> values(shape_numel(shape));
  rng.fill_normal(values);
  return Tensor::from(shape, std::move(values));
}

}  // namespace timegrad::num
