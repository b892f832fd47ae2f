#pragma once

#include <cstdint>
#include <random>

namespace spectral_econ {

using Rng = std::mt19937_64;

/// Generator for replicate `index` of an experiment seeded with `seed`.
/// Streams depend only on (seed, index), never on scheduling.
Rng replicate_rng(std::uint64_t seed, std::uint64_t index);

}  // namespace spectral_econ
