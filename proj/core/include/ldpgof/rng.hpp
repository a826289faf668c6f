// Copyright 2026 The ldpgof Authors
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

#ifndef LDPGOF_CORE_RNG_HPP_
#define LDPGOF_CORE_RNG_HPP_

#include <cmath>
#include <cstdint>

namespace ldpgof {

// SplitMix64 step. Used both as a state scrambler and as the seed-derivation
// hash so that (master_seed, stream, index) triples map to well-separated
// xoshiro states.
inline uint64_t splitmix64(uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// xoshiro256++ with a deterministic, platform-independent mapping to doubles.
// All randomness in the library flows through this engine; the standard
// library distributions are avoided because their output sequences are not
// pinned by the standard.
class Rng {
 public:
  explicit Rng(uint64_t seed) {
    uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
  }

  // Derives an independent stream from (master, stream, index). Streams with
  // distinct tags never share state: each coordinate is absorbed through the
  // SplitMix64 avalanche before seeding.
  static Rng derive(uint64_t master, uint64_t stream, uint64_t index) {
    uint64_t sm = master;
    uint64_t a = splitmix64(sm);
    sm ^= stream * 0xda942042e4dd58b5ULL;
    uint64_t b = splitmix64(sm);
    sm ^= index * 0x9e3779b97f4a7c15ULL;
    uint64_t c = splitmix64(sm);
    return Rng(a ^ (b << 1) ^ (c << 2) ^ splitmix64(sm));
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on the open interval (0,1): 53-bit mantissa offset by half an ulp,
  // so downstream inverse-CDF transforms never see 0 or 1 exactly.
  double next_double() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard Laplace(1) via inverse CDF.
  double next_laplace() {
    const double u = next_double();
    return u < 0.5 ? std::log(2.0 * u) : -std::log(2.0 * (1.0 - u));
  }

  bool next_bernoulli(double p) { return next_double() < p; }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  uint64_t state_[4];
};

// Stream tags for seed derivation. Keeping the tags centralized makes the
// "no raw variate is shared across arms" guarantee auditable.
namespace streams {
inline constexpr uint64_t kNullArm = 0x6e756c6c2d61726dULL;
inline constexpr uint64_t kAltArm = 0x616c742d61726d21ULL;
inline constexpr uint64_t kCalibration = 0x63616c6962726174ULL;
inline constexpr uint64_t kSigns = 0x7369676e2d647277ULL;
inline constexpr uint64_t kReplay = 0x7265706c61792121ULL;
inline constexpr uint64_t kMoments = 0x6d6f6d656e747321ULL;
}  // namespace streams

}  // namespace ldpgof

#endif  // LDPGOF_CORE_RNG_HPP_
