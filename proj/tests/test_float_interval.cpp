#include <cmath>
#include <cstdint>
#include <limits>

#include "doctest.h"
#include "ftb/float_interval.hpp"
#include "support.hpp"

using namespace ftb;

namespace {

// Sign-magnitude bits mapped onto a monotone unsigned line: consecutive keys are
// adjacent floats. -0 and +0 get distinct keys, so callers avoid zero.
std::uint32_t orderedKey(float f) {
  const std::uint32_t u = floatBits(f);
  return (u & 0x80000000u) ? ~u : (u | 0x80000000u);
}

float fromOrderedKey(std::uint32_t k) { return bitsToFloat((k & 0x80000000u) ? (k & 0x7fffffffu) : ~k); }

float randomNormal(test::Rng& rng) {
  for (;;) {
    const float f = bitsToFloat(static_cast<std::uint32_t>(rng.next()));
    if (std::isnormal(f) && std::fabs(f) != std::numeric_limits<float>::max()) return f;
  }
}

constexpr int kSamples = 1'000'000;

}  // namespace

TEST_SUITE("float-interval") {
  TEST_CASE("neighbors of one") {
    CHECK(justAbove(1.0f) == 1.0f + 0x1p-23f);
    CHECK(justBelow(1.0f) == 1.0f - 0x1p-24f);
  }

  TEST_CASE("zeros step to the smallest subnormals") {
    const float tiny = std::numeric_limits<float>::denorm_min();
    CHECK(justAbove(0.0f) == tiny);
    CHECK(justAbove(-0.0f) == tiny);
    CHECK(justBelow(0.0f) == -tiny);
    CHECK(justBelow(-0.0f) == -tiny);
    CHECK(justBelow(tiny) == 0.0f);
    CHECK(justAbove(-tiny) == 0.0f);
  }

  TEST_CASE("subnormal boundary") {
    const float smallestNormal = std::numeric_limits<float>::min();
    CHECK(floatBits(justBelow(smallestNormal)) == 0x007fffffu);
    CHECK(std::fpclassify(justBelow(smallestNormal)) == FP_SUBNORMAL);
    CHECK(justAbove(justBelow(smallestNormal)) == smallestNormal);
  }

  TEST_CASE("unrepresentable neighbors throw") {
    const float inf = std::numeric_limits<float>::infinity();
    const float nan = std::numeric_limits<float>::quiet_NaN();
    CHECK_THROWS_AS(justAbove(nan), std::domain_error);
    CHECK_THROWS_AS(justBelow(nan), std::domain_error);
    CHECK_THROWS_AS(justAbove(inf), std::domain_error);
    CHECK_THROWS_AS(justBelow(-inf), std::domain_error);
    CHECK_THROWS_AS(justAbove(std::numeric_limits<float>::max()), std::domain_error);
    CHECK_THROWS_AS(justBelow(std::numeric_limits<float>::lowest()), std::domain_error);
    CHECK(justBelow(std::numeric_limits<float>::max()) < std::numeric_limits<float>::max());
    CHECK(justAbove(std::numeric_limits<float>::lowest()) > std::numeric_limits<float>::lowest());
  }

  TEST_CASE("round trip, emptiness and monotonicity on random normals") {
    test::Rng rng(42);
    int failures = 0;
    for (int i = 0; i < kSamples; ++i) {
      const float f = randomNormal(rng);
      const float up = justAbove(f), down = justBelow(f);
      const std::uint32_t k = orderedKey(f);
      bool ok = floatBits(justBelow(up)) == floatBits(f) && floatBits(justAbove(down)) == floatBits(f);
      ok = ok && down < f && f < up;
      ok = ok && floatBits(up) == floatBits(fromOrderedKey(k + 1)) && floatBits(down) == floatBits(fromOrderedKey(k - 1));
      ok = ok && up == std::nextafter(f, std::numeric_limits<float>::infinity());
      ok = ok && down == std::nextafter(f, -std::numeric_limits<float>::infinity());
      if (!ok) ++failures;
    }
    CHECK(failures == 0);
  }

  TEST_CASE("singular interval contains exactly one float") {
    test::Rng rng(7);
    int failures = 0;
    for (int i = 0; i < 100000; ++i) {
      const float t = std::fabs(randomNormal(rng));
      const float lo = justBelow(t), hi = justAbove(t);
      // Keys strictly between lo and hi: exactly one, and it is t.
      if (orderedKey(hi) - orderedKey(lo) != 2 || fromOrderedKey(orderedKey(lo) + 1) != t) ++failures;
      if (!(lo < t && t < hi)) ++failures;
    }
    CHECK(failures == 0);
  }
}
