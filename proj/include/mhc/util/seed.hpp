#pragma once

#include <cstdint>
#include <cstdlib>
#include <optional>
#include <string>

namespace mhc {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Independent stream seed for (base, stream).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return splitmix64(splitmix64(base) ^ splitmix64(stream + 0x51ed270b7a1f2c3dull));
}

/// MHC_SEED from the environment, if set to an unsigned integer.
inline std::optional<std::uint64_t> seed_override() {
  const char* s = std::getenv("MHC_SEED");
  if (!s || !*s) return std::nullopt;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used);
    if (used != std::string(s).size()) return std::nullopt;
    return v;
  } catch (...) {
    return std::nullopt;
  }
}

}  // namespace mhc
