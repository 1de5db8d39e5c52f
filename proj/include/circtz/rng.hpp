#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace circtz {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// FNV-1a over the bytes of `text`, folded into `seed` with mix64. Stable across platforms.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view text);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t value);

/// Uniform index in [0, n) without libstdc++-specific distribution behavior.
std::size_t uniform_index(Rng& rng, std::size_t n);
double uniform01(Rng& rng);

}  // namespace circtz
