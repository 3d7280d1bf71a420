#pragma once

#include <span>
#include <vector>

namespace ftb {

/// Uniquely identifies one intersection along a ray. `geom` is the geometry's SBT
/// offset and `inst` the instance index. prim < 0 marks "no hit".
struct HitDesc {
  float t = 0.0f;
  int prim = -1, geom = -1, inst = -1;

  HitDesc() = default;
  /// Throws std::domain_error on NaN t, so the ordering below is a strict total order.
  HitDesc(float t, int prim, int geom, int inst);

  static HitDesc none(float t) { return HitDesc(t, -1, -1, -1); }
  bool isHit() const { return prim >= 0; }

  friend bool operator==(const HitDesc&, const HitDesc&) = default;
};

/// Lexicographic on (t, inst, geom, prim).
inline bool less(const HitDesc& a, const HitDesc& b) {
  if (a.t != b.t) return a.t < b.t;
  if (a.inst != b.inst) return a.inst < b.inst;
  if (a.geom != b.geom) return a.geom < b.geom;
  if (a.prim != b.prim) return a.prim < b.prim;
  return false;
}

inline bool operator<(const HitDesc& a, const HitDesc& b) { return less(a, b); }

/// Stable ascending sort under `less`.
std::vector<HitDesc> sortHits(std::span<const HitDesc> hits);

}  // namespace ftb
