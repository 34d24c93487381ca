// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "timegrad/num/tensor.hpp"

namespace timegrad::num {

/// Counter-based random stream (Philox4x32-10).
///
/// A draw is a pure function of (seed, stream id, block counter): the seed
/// is the Philox key, the 128-bit counter is [block counter | stream id].
/// split() derives child stream ids by hashing (parent id, child index), so
/// children address disjoint counter ranges and reproduce independently of
/// how much the parent or their siblings have consumed.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0) noexcept
      : seed_(seed), stream_(stream) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_; }
  std::uint64_t counter() const noexcept { return counter_; }

  RngStream split(std::uint64_t child) const noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer on [0, bound). bound must be positive.
  std::uint64_t uniform_index(std::uint64_t bound);
  double normal();
  void fill_normal(std::span<double> out);

 private:
  std::array<std::uint32_t, 4> next_block();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

/// Tensor of i.i.d. standard normal draws.
Tensor gaussian_draw(RngStream& rng, const Shape& shape);

}  // namespace timegrad::num
