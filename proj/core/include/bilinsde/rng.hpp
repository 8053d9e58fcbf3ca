/*
   Copyright 2026 The bilinsde Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <array>
#include <cstdint>

namespace bilinsde {

// Philox-4x32 with 10 rounds (Salmon et al., SC 2011).
//
// A pure function of (counter, key): there is no hidden state, so any draw can
// be regenerated in isolation and parallel workers never share a generator.
class Philox4x32 {
public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter counter, Key key);
};

// Standard normal variates addressed by (seed, stream, step, index).
//
// Counter layout: word 0 holds index / 2 (one Philox block yields two normals
// via Box-Muller), word 1 the step, words 2-3 the stream id. The 64-bit seed
// is the key. Draws are therefore independent of evaluation order.
class GaussianStream {
public:
  GaussianStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  // Writes `count` normals for `step` into out[0..count).
  void fill(std::uint64_t step, int count, double* out) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

private:
  std::uint64_t seed_;
  std::uint64_t stream_;
};

// Uniform double in (0, 1] from 64 random bits.
inline double uniform_open_closed(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

}  // namespace bilinsde
