#include "ftb/geometry.hpp"

#include <stdexcept>

namespace ftb {

namespace {

// Relative widening applied to slab distances. Generous compared to the rounding error
// of either the slab test or the triangle test; admitting a few extra boxes only costs
// traversal steps.
constexpr float kSlabSlack = 1e-5f;

}  // namespace

Aabb bounds(const Triangle& tri) {
  Aabb b;
  b.extend(tri.v0);
  b.extend(tri.v1);
  b.extend(tri.v2);
  return b;
}

Affine3 Affine3::translate(Vec3 t) {
  Affine3 xf;
  xf.translation = t;
  return xf;
}

Affine3 Affine3::scale(float s) {
  Affine3 xf;
  xf.linear = {{{s, 0, 0}, {0, s, 0}, {0, 0, s}}};
  return xf;
}

bool Affine3::isIdentity() const { return *this == Affine3{}; }

double Affine3::determinant() const {
  const auto& m = linear;
  const double a = m[0][0], b = m[0][1], c = m[0][2];
  const double d = m[1][0], e = m[1][1], f = m[1][2];
  const double g = m[2][0], h = m[2][1], i = m[2][2];
  return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
}

Vec3 Affine3::applyVector(Vec3 v) const {
  const auto& m = linear;
  return {(m[0][0] * v.x + m[0][1] * v.y) + m[0][2] * v.z,
          (m[1][0] * v.x + m[1][1] * v.y) + m[1][2] * v.z,
          (m[2][0] * v.x + m[2][1] * v.y) + m[2][2] * v.z};
}

Vec3 Affine3::applyPoint(Vec3 p) const { return applyVector(p) + translation; }

Affine3 inverse(const Affine3& xf) {
  const double det = xf.determinant();
  if (det == 0.0 || !std::isfinite(det)) throw std::domain_error("inverse: singular transform");
  const auto& m = xf.linear;
  double inv[3][3];
  inv[0][0] = (double(m[1][1]) * m[2][2] - double(m[1][2]) * m[2][1]) / det;
  inv[0][1] = (double(m[0][2]) * m[2][1] - double(m[0][1]) * m[2][2]) / det;
  inv[0][2] = (double(m[0][1]) * m[1][2] - double(m[0][2]) * m[1][1]) / det;
  inv[1][0] = (double(m[1][2]) * m[2][0] - double(m[1][0]) * m[2][2]) / det;
  inv[1][1] = (double(m[0][0]) * m[2][2] - double(m[0][2]) * m[2][0]) / det;
  inv[1][2] = (double(m[0][2]) * m[1][0] - double(m[0][0]) * m[1][2]) / det;
  inv[2][0] = (double(m[1][0]) * m[2][1] - double(m[1][1]) * m[2][0]) / det;
  inv[2][1] = (double(m[0][1]) * m[2][0] - double(m[0][0]) * m[2][1]) / det;
  inv[2][2] = (double(m[0][0]) * m[1][1] - double(m[0][1]) * m[1][0]) / det;

  Affine3 out;
  double t[3];
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) out.linear[r][c] = static_cast<float>(inv[r][c]);
    t[r] = -(inv[r][0] * xf.translation.x + inv[r][1] * xf.translation.y +
             inv[r][2] * xf.translation.z);
  }
  // -(0 * x) would otherwise leave -0.0 components behind.
  out.translation = {static_cast<float>(t[0] + 0.0), static_cast<float>(t[1] + 0.0),
                     static_cast<float>(t[2] + 0.0)};
  return out;
}

Aabb transformBounds(const Affine3& xf, const Aabb& box) {
  Aabb out;
  if (box.empty()) return out;
  for (int corner = 0; corner < 8; ++corner) {
    const Vec3 p{(corner & 1) ? box.hi.x : box.lo.x, (corner & 2) ? box.hi.y : box.lo.y,
                 (corner & 4) ? box.hi.z : box.lo.z};
    out.extend(xf.applyPoint(p));
  }
  // The transformed corners are rounded; pad by a relative hair so world boxes stay conservative.
  const Vec3 mag = max(Vec3{std::fabs(out.lo.x), std::fabs(out.lo.y), std::fabs(out.lo.z)},
                       Vec3{std::fabs(out.hi.x), std::fabs(out.hi.y), std::fabs(out.hi.z)});
  const Vec3 pad = mag * kSlabSlack;
  out.lo = out.lo - pad;
  out.hi = out.hi + pad;
  return out;
}

std::optional<TriangleHit> intersectTriangle(const Ray& ray, const Triangle& tri) {
  const Vec3 e1 = tri.v1 - tri.v0;
  const Vec3 e2 = tri.v2 - tri.v0;
  const Vec3 n = cross(e1, e2);
  if (n.x == 0.0f && n.y == 0.0f && n.z == 0.0f) return std::nullopt;

  const Vec3 p = cross(ray.direction, e2);
  const float det = dot(e1, p);
  if (det == 0.0f) return std::nullopt;
  const float invDet = 1.0f / det;

  const Vec3 s = ray.origin - tri.v0;
  const float u = dot(s, p) * invDet;
  if (!(u >= 0.0f && u <= 1.0f)) return std::nullopt;

  const Vec3 q = cross(s, e1);
  const float v = dot(ray.direction, q) * invDet;
  if (!(v >= 0.0f && u + v <= 1.0f)) return std::nullopt;

  const float t = dot(e2, q) * invDet;
  if (!(ray.tMin < t && t < ray.tMax)) return std::nullopt;
  return TriangleHit{t, u, v, det > 0.0f};
}

std::optional<BoxOverlap> intersectAabb(const Ray& ray, const Aabb& box) {
  if (box.empty()) return std::nullopt;
  float tNear = -std::numeric_limits<float>::infinity();
  float tFar = std::numeric_limits<float>::infinity();
  for (int axis = 0; axis < 3; ++axis) {
    const float o = ray.origin[axis];
    const float d = ray.direction[axis];
    if (d == 0.0f) {
      if (o < box.lo[axis] || o > box.hi[axis]) return std::nullopt;
      continue;
    }
    float t0 = (box.lo[axis] - o) / d;
    float t1 = (box.hi[axis] - o) / d;
    if (t0 > t1) std::swap(t0, t1);
    t0 -= std::fabs(t0) * kSlabSlack;
    t1 += std::fabs(t1) * kSlabSlack;
    tNear = std::fmax(tNear, t0);
    tFar = std::fmin(tFar, t1);
  }
  const float tEnter = std::fmax(tNear, ray.tMin);
  const float tExit = std::fmin(tFar, ray.tMax);
  if (tEnter > tExit) return std::nullopt;
  return BoxOverlap{tEnter, tExit};
}

Ray transformRayByInverse(const Affine3& worldToObject, const Ray& ray) {
  if (worldToObject.isIdentity()) return ray;
  Ray out = ray;
  out.origin = worldToObject.applyPoint(ray.origin);
  out.direction = worldToObject.applyVector(ray.direction);
  return out;
}

Ray transformRay(const Affine3& xf, const Ray& ray) {
  if (xf.isIdentity()) return ray;
  return transformRayByInverse(inverse(xf), ray);
}

}  // namespace ftb
