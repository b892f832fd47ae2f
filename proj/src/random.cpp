#include "spectral_econ/random.hpp"

namespace spectral_econ {

Rng replicate_rng(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq sequence{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                           static_cast<std::uint32_t>(index),
                           static_cast<std::uint32_t>(index >> 32), 0x5eedu};
    return Rng(sequence);
}

}  // namespace spectral_econ
