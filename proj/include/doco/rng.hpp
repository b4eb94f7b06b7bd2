#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace doco {

// mt19937_64 has a standardized output sequence; the distributions below are
// written out so that draws do not depend on the standard library vendor.
using Engine = std::mt19937_64;

inline constexpr std::string_view kGeneratorName =
    "mt19937_64 (splitmix64 seed derivation, 53-bit uniform, polar normal)";

/// Derives an independent stream seed from (seed, stream) with splitmix64.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Uniform on [0, 1).
double uniform01(Engine& rng);

/// Uniform on [lo, hi).
double uniform(Engine& rng, double lo, double hi);

double standard_normal(Engine& rng);

}  // namespace doco
