#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "ftb/geometry.hpp"
#include "ftb/render.hpp"
#include "ftb/scene.hpp"

namespace ftb::test {

/// Counter-based generator; identical sequences on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(mix64(seed)) {}
  std::uint64_t next() { return hashCombine(key_, counter_++); }
  /// Uniform in [0, 1) with 24 random bits.
  float unit() { return static_cast<float>(next() >> 40) * 0x1p-24f; }
  float range(float lo, float hi) { return lo + (hi - lo) * unit(); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

inline Aabb worldBounds(const Scene& scene) {
  Aabb box;
  for (const auto& inst : scene.instances()) {
    for (auto g : inst.geometries) {
      const Mesh& mesh = scene.meshOf(scene.geometries()[g]);
      Aabb local;
      for (const auto& v : mesh.vertices) local.extend(v);
      box.extend(transformBounds(inst.objectToWorld, local));
    }
  }
  return box;
}

/// Deterministic ray set: every 8th ray is axis-aligned through a dyadic grid point
/// (hits shared edges and diagonals exactly), the rest aim from outside the bounds at
/// random interior points.
inline std::vector<Ray> sceneRays(const Scene& scene, std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  const Aabb b = worldBounds(scene);
  const Vec3 center = (b.lo + b.hi) * 0.5f;
  const Vec3 ext = b.extent();
  const float radius = std::max({ext.x, ext.y, ext.z, 1.0f}) * 2.0f;
  std::vector<Ray> rays;
  rays.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Ray r;
    r.tMin = 0.0f;
    r.tMax = 1e30f;
    if (i % 8 == 0) {
      const int axis = static_cast<int>((i / 8) % 3);
      const int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
      Vec3 o = center;
      o[axis] = b.lo[axis] - 1.0f;
      o[a1] = b.lo[a1] + std::floor(rng.unit() * 16.0f) / 16.0f * std::max(ext[a1], 1.0f);
      o[a2] = b.lo[a2] + std::floor(rng.unit() * 16.0f) / 16.0f * std::max(ext[a2], 1.0f);
      Vec3 d;
      d[axis] = 1.0f;
      r.origin = o;
      r.direction = d;
    } else {
      const Vec3 target{rng.range(b.lo.x, b.hi.x), rng.range(b.lo.y, b.hi.y), rng.range(b.lo.z, b.hi.z)};
      Vec3 dir{rng.range(-1, 1), rng.range(-1, 1), rng.range(-1, 1)};
      if (length(dir) < 0.1f) dir = {0.3f, 0.4f, -1.0f};
      r.origin = center + normalize(dir) * radius;
      r.direction = target - r.origin;
    }
    rays.push_back(r);
  }
  return rays;
}

/// Two leaves (leaf size 2) whose visit order flips when tMin moves up to the shared hit
/// distance 6: entry distances 5 (left) vs 3 (right) at tMin = 0, tied once clamped.
/// Both on-ray triangles are hit at t = 6 by tMinFlipRay().
inline Scene tMinFlipScene() {
  Mesh m;
  m.vertices = {
      {-7, -1, 4}, {-6, -1, 4}, {-7, 0, 4},  // left, off-ray
      {-2, -1, 5}, {2, -1, 5},  {-2, 3, 5},  // left, on-ray
      {-1, -1, 5}, {2, -1, 5},  {2, 2, 5},   // right, on-ray
      {6, -1, 2},  {7, -1, 2},  {7, 0, 2},   // right, off-ray
  };
  m.indices = {{0, 1, 2}, {3, 4, 5}, {6, 7, 8}, {9, 10, 11}};
  return sceneFromMesh(std::move(m));
}

inline Ray tMinFlipRay() { return {{0.5f, 0.2f, -1.0f}, {0, 0, 1}, 0.0f, 100.0f}; }

inline UserCode countAllCode() {
  return [](const HitDesc&, const HitContext*) { return UserAction::Continue; };
}

}  // namespace ftb::test
