#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "soco/numerics/tensor.hpp"

namespace soco::numerics {

// 64-bit FNV-1a over raw bytes.
std::uint64_t fnv1a64(std::span<const unsigned char> bytes,
                      std::uint64_t seed = 0xcbf29ce484222325ULL);

// Content hash of a parameter set: FNV-1a over shapes and the little-endian
// bytes of every value, rendered as 16 lowercase hex digits.
std::string param_hash(const ParamSet& params);

}  // namespace soco::numerics
