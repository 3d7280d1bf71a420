#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ftb/geometry.hpp"
#include "ftb/scene.hpp"
#include "ftb/stats.hpp"

namespace ftb {

enum class PrimOrder { AsGiven, Permuted };

struct BuildOptions {
  int leafSize = 4;
  PrimOrder primOrder = PrimOrder::AsGiven;
  std::uint64_t seed = 0;  // used by PrimOrder::Permuted

  static BuildOptions permuted(std::uint64_t seed, int leafSize = 4) {
    return {leafSize, PrimOrder::Permuted, seed};
  }
};

struct BvhNode {
  Aabb bounds;
  int left = -1, right = -1;  // children, or -1 for a leaf
  std::uint32_t first = 0;    // leaf range into Bvh::primIndices
  std::uint32_t count = 0;
  int axis = 0;               // split axis of an interior node

  bool isLeaf() const { return left < 0; }
  friend bool operator==(const BvhNode&, const BvhNode&) = default;
};

/// Binary BVH over primitive bounds. nodes[0] is the root; leaves reference
/// contiguous ranges of primIndices.
struct Bvh {
  std::vector<BvhNode> nodes;
  std::vector<std::uint32_t> primIndices;
};

/// Median split over the longest centroid axis (stable sort, so ties keep insertion
/// order). Permuted order shuffles insertion order first, emulating a rebuild that is
/// not temporally stable. `salt` decorrelates shuffles of different BVHs in one scene.
/// Throws std::invalid_argument for an empty primitive set or leafSize < 1.
Bvh buildBvh(std::span<const Aabb> primBounds, const BuildOptions& opts, std::uint64_t salt = 0);
Bvh buildBlas(const Mesh& mesh, const BuildOptions& opts, std::uint64_t salt = 0);

/// One (instance, geometry) pair referenced by a TLAS leaf.
struct TlasEntry {
  int instance = 0;
  std::uint32_t geometry = 0;  // index into Scene::geometries
  Aabb worldBounds;
};

/// An immutable scene plus its two-level acceleration structure.
class BuiltScene {
 public:
  BuiltScene(Scene scene, const BuildOptions& opts = {});

  const Scene& scene() const { return scene_; }
  const BuildOptions& options() const { return opts_; }
  const Bvh& blas(std::uint32_t geometry) const { return blas_[geometry]; }
  const Bvh& tlas() const { return tlas_; }
  const std::vector<TlasEntry>& tlasEntries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

 private:
  Scene scene_;
  BuildOptions opts_;
  std::vector<Bvh> blas_;  // one per geometry
  Bvh tlas_;
  std::vector<TlasEntry> entries_;
};

/// A triangle the traversal found inside the current interval.
struct Candidate {
  TriangleHit hit;
  int prim = 0;
  int geom = 0;  // sbtOffset
  int inst = 0;
  const Instance* instance = nullptr;
};

enum class VisitResult { Continue, Stop };
using HitVisitor = std::function<VisitResult(const Candidate&)>;

/// Optional traversal instrumentation.
struct TraversalLog {
  struct Leaf {
    int inst;            // -1 for TLAS leaves
    std::uint32_t geometry;
    int node;
    friend bool operator==(const Leaf&, const Leaf&) = default;
  };
  std::vector<Leaf> leaves;
};

/// Depth-first traversal. Children are visited by increasing clipped entry distance
/// (ties: near side by direction sign on the split axis). The visitor may shrink
/// ray.tMax; it is re-read after every call. Each triangle with ray.tMin < t < ray.tMax
/// (current values) is reported exactly once. Throws std::logic_error if the visitor
/// grows tMax or touches tMin.
void traverse(const BuiltScene& scene, Ray& ray, const HitVisitor& visitor, TraceStats& stats,
              TraversalLog* log = nullptr);

}  // namespace ftb
