#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace lmdc {

inline constexpr std::uint64_t kFnvOffsetBasis = 14695981039346656037ULL;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

// FNV-1a over a byte range; chainable through the state argument.
inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t state = kFnvOffsetBasis) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    state ^= p[i];
    state *= kFnvPrime;
  }
  return state;
}

inline std::uint64_t fnv1a64(double v, std::uint64_t state) {
  return fnv1a64(&v, sizeof(v), state);
}

std::string to_hex(std::uint64_t v);
std::uint64_t from_hex(const std::string& s);

}  // namespace lmdc
