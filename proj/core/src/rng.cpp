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

#include "bilinsde/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bilinsde {

namespace {

constexpr std::uint32_t kW32A = 0x9E3779B9;
constexpr std::uint32_t kW32B = 0xBB67AE85;
constexpr std::uint32_t kM4x32A = 0xD2511F53;
constexpr std::uint32_t kM4x32B = 0xCD9E8D57;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  lo = static_cast<std::uint32_t>(p);
  hi = static_cast<std::uint32_t>(p >> 32);
}

inline void round(Philox4x32::Counter& c, const Philox4x32::Key& k) {
  std::uint32_t lo0, hi0, lo1, hi1;
  mulhilo(kM4x32A, c[0], lo0, hi0);
  mulhilo(kM4x32B, c[2], lo1, hi1);
  c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

}  // namespace

Philox4x32::Counter Philox4x32::generate(Counter counter, Key key) {
  for (int r = 0; r < 10; ++r) {
    if (r > 0) {
      key[0] += kW32A;
      key[1] += kW32B;
    }
    round(counter, key);
  }
  return counter;
}

void GaussianStream::fill(std::uint64_t step, int count, double* out) const {
  if (step > 0xFFFFFFFFull) throw std::out_of_range("GaussianStream supports at most 2^32 steps");
  const Philox4x32::Key key = {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)};
  for (int block = 0; 2 * block < count; ++block) {
    const Philox4x32::Counter ctr = {static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(step),
                                     static_cast<std::uint32_t>(stream_),
                                     static_cast<std::uint32_t>(stream_ >> 32)};
    const auto r = Philox4x32::generate(ctr, key);
    const std::uint64_t a = (static_cast<std::uint64_t>(r[1]) << 32) | r[0];
    const std::uint64_t b = (static_cast<std::uint64_t>(r[3]) << 32) | r[2];
    const double radius = std::sqrt(-2.0 * std::log(uniform_open_closed(a)));
    const double angle = 2.0 * std::numbers::pi * uniform_open_closed(b);
    out[2 * block] = radius * std::cos(angle);
    if (2 * block + 1 < count) out[2 * block + 1] = radius * std::sin(angle);
  }
}

}  // namespace bilinsde
