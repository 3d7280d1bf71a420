#pragma once

// ULP stepping on binary32 values.
//
// Every interval trick used by the traversal kernels reduces to one fact:
// between f and justAbove(f) there is no representable float. These helpers
// step through the ordered bit pattern directly so the result does not depend
// on the platform's nextafter implementation or rounding mode.

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace ftb {

inline std::uint32_t floatBits(float f) { return std::bit_cast<std::uint32_t>(f); }
inline float bitsToFloat(std::uint32_t u) { return std::bit_cast<float>(u); }

/// Smallest binary32 value strictly greater than `f`.
///
/// Both zeros map to the smallest positive subnormal. Throws std::domain_error
/// for NaN, +INF and +FLT_MAX, which have no representable successor.
inline float justAbove(float f) {
  if (std::isnan(f) || f == std::numeric_limits<float>::infinity() ||
      f == std::numeric_limits<float>::max())
    throw std::domain_error("justAbove: no representable successor");
  if (f == 0.0f) return std::numeric_limits<float>::denorm_min();
  const std::uint32_t u = floatBits(f);
  return bitsToFloat(f > 0.0f ? u + 1u : u - 1u);
}

/// Largest binary32 value strictly less than `f`. Mirror image of justAbove.
inline float justBelow(float f) {
  if (std::isnan(f) || f == -std::numeric_limits<float>::infinity() ||
      f == std::numeric_limits<float>::lowest())
    throw std::domain_error("justBelow: no representable predecessor");
  if (f == 0.0f) return -std::numeric_limits<float>::denorm_min();
  const std::uint32_t u = floatBits(f);
  return bitsToFloat(f > 0.0f ? u - 1u : u + 1u);
}

}  // namespace ftb
