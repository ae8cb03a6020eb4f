#pragma once

#include <cstdint>

#include "hawkes_stein/philox.hpp"

namespace hawkes_stein {

// Poisson(mean) draw consuming uniforms from `stream`: sequential inversion
// below mean 10, Hormann's PTRS transformed rejection at and above it.
std::uint64_t sample_poisson(double mean, CounterStream& stream);

}  // namespace hawkes_stein
