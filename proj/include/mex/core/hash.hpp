#pragma once

#include <cstdint>
#include <string_view>

namespace mex {

// FNV-1a. The 32-bit variant maps subword n-grams to buckets and is part of
// the embedding file contract; the 64-bit variant checksums binary payloads.
constexpr std::uint32_t fnv1a32(std::string_view bytes) {
  std::uint32_t h = 2166136261u;
  for (char c : bytes) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 16777619u;
  }
  return h;
}

constexpr std::uint64_t kFnv64Offset = 14695981039346656037ull;

constexpr std::uint64_t fnv1a64(std::string_view bytes,
                                std::uint64_t h = kFnv64Offset) {
  for (char c : bytes) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace mex
