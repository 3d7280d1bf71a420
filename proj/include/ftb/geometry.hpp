#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <optional>

namespace ftb {

struct Vec3 {
  float x = 0.0f, y = 0.0f, z = 0.0f;

  float operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
  float& operator[](int axis) { return axis == 0 ? x : (axis == 1 ? y : z); }

  friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator*(Vec3 a, float s) { return {a.x * s, a.y * s, a.z * s}; }
  friend Vec3 operator*(float s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
  friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline float dot(Vec3 a, Vec3 b) { return (a.x * b.x + a.y * b.y) + a.z * b.z; }

inline Vec3 cross(Vec3 a, Vec3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline float length(Vec3 a) { return std::sqrt(dot(a, a)); }
inline Vec3 normalize(Vec3 a) { return a * (1.0f / length(a)); }
inline Vec3 min(Vec3 a, Vec3 b) { return {std::fmin(a.x, b.x), std::fmin(a.y, b.y), std::fmin(a.z, b.z)}; }
inline Vec3 max(Vec3 a, Vec3 b) { return {std::fmax(a.x, b.x), std::fmax(a.y, b.y), std::fmax(a.z, b.z)}; }
inline bool isFinite(Vec3 a) { return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z); }

/// A ray with an exclusive valid interval: a hit at t counts only if tMin < t < tMax.
/// Traversal kernels change tMin/tMax between traces; origin and direction stay fixed.
struct Ray {
  Vec3 origin;
  Vec3 direction;
  float tMin = 0.0f;
  float tMax = std::numeric_limits<float>::max();
};

struct Triangle {
  Vec3 v0, v1, v2;
};

struct Aabb {
  Vec3 lo{std::numeric_limits<float>::infinity(), std::numeric_limits<float>::infinity(),
          std::numeric_limits<float>::infinity()};
  Vec3 hi{-std::numeric_limits<float>::infinity(), -std::numeric_limits<float>::infinity(),
          -std::numeric_limits<float>::infinity()};

  bool empty() const { return lo.x > hi.x || lo.y > hi.y || lo.z > hi.z; }
  void extend(Vec3 p) {
    lo = min(lo, p);
    hi = max(hi, p);
  }
  void extend(const Aabb& b) {
    lo = min(lo, b.lo);
    hi = max(hi, b.hi);
  }
  Vec3 extent() const { return hi - lo; }
  friend bool operator==(const Aabb&, const Aabb&) = default;
};

Aabb bounds(const Triangle& tri);

/// Affine map p -> linear * p + translation.
struct Affine3 {
  std::array<std::array<float, 3>, 3> linear{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  Vec3 translation;

  static Affine3 identity() { return {}; }
  static Affine3 translate(Vec3 t);
  static Affine3 scale(float s);

  bool isIdentity() const;
  double determinant() const;

  Vec3 applyPoint(Vec3 p) const;
  Vec3 applyVector(Vec3 v) const;

  friend bool operator==(const Affine3&, const Affine3&) = default;
};

/// Inverse computed in double precision and rounded once. Throws std::domain_error when singular.
Affine3 inverse(const Affine3& xf);

Aabb transformBounds(const Affine3& xf, const Aabb& box);

struct TriangleHit {
  float t;
  float u, v;
  bool frontFace;
};

/// Möller–Trumbore with a fixed evaluation order and no epsilon tolerance. Edges are
/// inclusive. Returns a hit only for tMin < t < tMax; degenerate triangles never hit.
std::optional<TriangleHit> intersectTriangle(const Ray& ray, const Triangle& tri);

struct BoxOverlap {
  float tEnter;
  float tExit;
};

/// Slab test clipped to [tMin, tMax]. Deliberately conservative: the slab distances are
/// widened by a few ULP so rounding can never cull a box whose contents would be hit.
std::optional<BoxOverlap> intersectAabb(const Ray& ray, const Aabb& box);

/// Maps a world ray into the object space of an instance whose object-to-world map is `xf`.
/// The direction is not renormalized, so object-space t equals world-space t.
Ray transformRay(const Affine3& xf, const Ray& ray);

/// Same as transformRay, taking the already-inverted (world-to-object) map.
Ray transformRayByInverse(const Affine3& worldToObject, const Ray& ray);

}  // namespace ftb
