#pragma once

#include <cstddef>
#include <cstdint>

namespace mpcmm {

constexpr std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

/// floor(sqrt(x)), exact for all 64-bit inputs.
constexpr std::uint64_t isqrt(std::uint64_t x) {
  std::uint64_t lo = 0;
  std::uint64_t hi = x < 2 ? x : (x < (1ull << 32) ? x / 2 + 1 : (1ull << 32));
  while (lo < hi) {
    const std::uint64_t mid = lo + (hi - lo + 1) / 2;
    if (mid <= x / mid) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  return lo;
}

/// ceil(sqrt(x)).
constexpr std::uint64_t ceil_sqrt(std::uint64_t x) {
  const std::uint64_t r = isqrt(x);
  return r * r == x ? r : r + 1;
}

}  // namespace mpcmm
