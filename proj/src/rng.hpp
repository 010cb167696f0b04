// Copyright 2026 The covprice Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>

namespace covprice {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive decorrelated seeds from one master.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent random streams of one episode. Each consumer owns its stream,
// so swapping the policy never perturbs the environment draws.
enum class Stream : std::uint64_t {
  kCovariates = 1,
  kShocks = 2,
  kPolicy = 3,
  kSyntheticCovariates = 4,
  kPermutation = 5,
};

constexpr std::uint64_t stream_seed(std::uint64_t episode_seed, Stream s) noexcept {
  return splitmix64(splitmix64(episode_seed) ^ splitmix64(static_cast<std::uint64_t>(s) * 0x632be59bd9b4e019ULL));
}

inline Rng make_rng(std::uint64_t episode_seed, Stream s) {
  return Rng{stream_seed(episode_seed, s)};
}

}  // namespace covprice
