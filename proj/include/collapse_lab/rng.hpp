// Copyright 2026 The collapse-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef COLLAPSE_LAB_RNG_HPP
#define COLLAPSE_LAB_RNG_HPP

#include <array>
#include <cstdint>
#include <limits>

namespace collapse {

/// Philox4x32-10 block function (Salmon et al., SC'11). Maps a 128-bit
/// counter and a 64-bit key to 128 pseudo-random bits.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Counter-based random engine. A stream is fully determined by
/// (seed, stream, substream), so the i-th trajectory of an ensemble always
/// sees the same numbers no matter which worker runs it or in what order.
///
/// Counter layout: word 0 is the block index, word 1 the substream, words
/// 2-3 the 64-bit stream id. The seed is the key.
///
/// Satisfies UniformRandomBitGenerator, so <random> distributions work.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint32_t substream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform double in (0, 1].
  double uniform_pos();
  /// Standard normal variate (Box-Muller; no cached state across calls).
  double normal();

  std::uint64_t stream() const { return stream_; }
  std::uint32_t substream() const { return substream_; }

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint32_t substream_;
  std::uint32_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
};

}  // namespace collapse

#endif  // COLLAPSE_LAB_RNG_HPP
