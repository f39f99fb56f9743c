#include "soco/numerics/hash.hpp"

#include <bit>
#include <cstring>
#include <cstdio>

namespace soco::numerics {
namespace {

std::uint64_t mix_u64(std::uint64_t h, std::uint64_t value) {
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(value >> (8 * i));
  return fnv1a64(bytes, h);
}

}  // namespace

std::uint64_t fnv1a64(std::span<const unsigned char> bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string param_hash(const ParamSet& params) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& p : params) {
    h = mix_u64(h, p.rank());
    for (std::size_t d : p.shape()) h = mix_u64(h, d);
    for (double v : p.data()) h = mix_u64(h, std::bit_cast<std::uint64_t>(v));
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace soco::numerics
