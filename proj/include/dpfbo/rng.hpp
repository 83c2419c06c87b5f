// Copyright 2026 The dpfbo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPFBO_RNG_HPP
#define DPFBO_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

// Self-contained counter-derived random streams. std:: distributions are not
// bit-identical across standard library implementations, and simulation
// results must not depend on how agents are scheduled onto worker threads,
// so every consumer derives its own stream from (master seed, tag path) and
// all variate transforms are implemented here.

namespace dpfbo::rng {

inline constexpr std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t x = state;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// xoshiro256++ engine seeded through splitmix64.
class Engine {
 public:
  using result_type = std::uint64_t;

  explicit constexpr Engine(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
  }

  constexpr std::uint64_t operator()() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  static constexpr std::uint64_t min() { return 0; }
  static constexpr std::uint64_t max() { return ~0ULL; }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::array<std::uint64_t, 4> state_{};
};

/// Stream purposes; part of the derivation path so streams never collide.
enum class Stream : std::uint64_t {
  kObjective = 1,
  kAssignment = 2,
  kInit = 3,
  kAgentRound = 4,
  kSubsample = 5,
  kNoise = 6,
  kTest = 7,
  kRff = 8,
};

/// Derives an independent engine from a master seed and a tag path,
/// e.g. derive(seed, {Stream::kAgentRound, agent, round}).
inline Engine derive(std::uint64_t master,
                     std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = master;
  std::uint64_t h = splitmix64(s);
  for (std::uint64_t v : path) {
    s = h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
    h = splitmix64(s);
  }
  return Engine(h);
}

inline Engine derive(std::uint64_t master, Stream tag,
                     std::initializer_list<std::uint64_t> rest = {}) {
  std::uint64_t s = master;
  std::uint64_t h = splitmix64(s);
  auto absorb = [&](std::uint64_t v) {
    s = h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
    h = splitmix64(s);
  };
  absorb(static_cast<std::uint64_t>(tag));
  for (std::uint64_t v : rest) absorb(v);
  return Engine(h);
}

/// Uniform double in the open interval (0,1).
inline double u01(Engine& eng) {
  return (static_cast<double>(eng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal via Box-Muller; consumes two words, keeps no spare.
inline double normal(Engine& eng) {
  const double u1 = u01(eng);
  const double u2 = u01(eng);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

/// Unbiased uniform integer in [0, n) by rejection.
inline std::uint64_t uniform_int(Engine& eng, std::uint64_t n) {
  if (n == 0) return 0;
  const std::uint64_t limit = ~0ULL - ~0ULL % n;
  std::uint64_t x;
  do {
    x = eng();
  } while (x >= limit);
  return x % n;
}

/// Fisher-Yates shuffle.
template <typename Container>
void shuffle(Container& items, Engine& eng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = uniform_int(eng, i);
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace dpfbo::rng

#endif  // DPFBO_RNG_HPP
