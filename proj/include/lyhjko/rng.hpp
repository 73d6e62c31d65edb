#pragma once

// Deterministic sampling shared by the checkers and the CLI; the explicit
// 53-bit ladder keeps streams identical across standard library versions.

#include <cstdint>
#include <random>

namespace lyhjko {

inline double uniform53(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace lyhjko
