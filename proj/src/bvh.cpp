#include "ftb/bvh.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace ftb {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Fisher-Yates with our own generator so permutations are identical on every platform.
void shuffle(std::vector<std::uint32_t>& v, std::uint64_t seed) {
  std::uint64_t state = seed;
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = splitmix64(state) % i;
    std::swap(v[i - 1], v[j]);
  }
}

Vec3 centroid(const Aabb& b) { return (b.lo + b.hi) * 0.5f; }

struct Builder {
  std::span<const Aabb> prims;
  int leafSize;
  Bvh& out;

  int build(std::uint32_t begin, std::uint32_t end) {
    const int index = static_cast<int>(out.nodes.size());
    out.nodes.emplace_back();
    Aabb box, cbox;
    for (auto i = begin; i < end; ++i) {
      const Aabb& b = prims[out.primIndices[i]];
      box.extend(b);
      cbox.extend(centroid(b));
    }
    out.nodes[index].bounds = box;
    if (end - begin <= static_cast<std::uint32_t>(leafSize)) {
      out.nodes[index].first = begin;
      out.nodes[index].count = end - begin;
      return index;
    }
    const Vec3 ext = cbox.extent();
    int axis = 0;
    if (ext.y > ext[axis]) axis = 1;
    if (ext.z > ext[axis]) axis = 2;
    if (ext[axis] > 0.0f) {
      std::stable_sort(out.primIndices.begin() + begin, out.primIndices.begin() + end,
                       [&](std::uint32_t a, std::uint32_t b) {
                         return centroid(prims[a])[axis] < centroid(prims[b])[axis];
                       });
    }
    const std::uint32_t mid = begin + (end - begin) / 2;
    const int left = build(begin, mid);
    const int right = build(mid, end);
    out.nodes[index].left = left;
    out.nodes[index].right = right;
    out.nodes[index].axis = axis;
    return index;
  }
};

struct StackEntry {
  int node;
  float tEnter;
};

// Generic DFS over one BVH. Box tests use `origin/direction` with the live interval of
// `interval`. Returns false if the leaf callback asked to stop.
template <class LeafFn>
bool traverseNodes(const Bvh& bvh, Vec3 origin, Vec3 direction, const Ray& interval, TraceStats& stats,
                   LeafFn&& onLeaf) {
  auto boxRay = [&] {
    Ray r;
    r.origin = origin;
    r.direction = direction;
    r.tMin = interval.tMin;
    r.tMax = interval.tMax;
    return r;
  };
  const auto rootHit = intersectAabb(boxRay(), bvh.nodes[0].bounds);
  if (!rootHit) return true;

  std::vector<StackEntry> stack;
  stack.reserve(64);
  stack.push_back({0, rootHit->tEnter});
  while (!stack.empty()) {
    const StackEntry entry = stack.back();
    stack.pop_back();
    if (entry.tEnter > interval.tMax) continue;
    ++stats.nodesVisited;
    const BvhNode& node = bvh.nodes[entry.node];
    if (node.isLeaf()) {
      if (!onLeaf(entry.node, node)) return false;
      continue;
    }
    const Ray r = boxRay();
    const auto hl = intersectAabb(r, bvh.nodes[node.left].bounds);
    const auto hr = intersectAabb(r, bvh.nodes[node.right].bounds);
    if (hl && hr) {
      bool leftFirst;
      if (hl->tEnter != hr->tEnter)
        leftFirst = hl->tEnter < hr->tEnter;
      else
        leftFirst = !(direction[node.axis] < 0.0f);
      if (leftFirst) {
        stack.push_back({node.right, hr->tEnter});
        stack.push_back({node.left, hl->tEnter});
      } else {
        stack.push_back({node.left, hl->tEnter});
        stack.push_back({node.right, hr->tEnter});
      }
    } else if (hl) {
      stack.push_back({node.left, hl->tEnter});
    } else if (hr) {
      stack.push_back({node.right, hr->tEnter});
    }
  }
  return true;
}

}  // namespace

Bvh buildBvh(std::span<const Aabb> primBounds, const BuildOptions& opts, std::uint64_t salt) {
  if (primBounds.empty()) throw std::invalid_argument("buildBvh: no primitives");
  if (opts.leafSize < 1) throw std::invalid_argument("buildBvh: leafSize must be >= 1");
  Bvh bvh;
  bvh.primIndices.resize(primBounds.size());
  std::iota(bvh.primIndices.begin(), bvh.primIndices.end(), 0u);
  if (opts.primOrder == PrimOrder::Permuted) shuffle(bvh.primIndices, opts.seed ^ (salt * 0xD6E8FEB86659FD93ull));
  Builder{primBounds, opts.leafSize, bvh}.build(0, static_cast<std::uint32_t>(primBounds.size()));
  return bvh;
}

Bvh buildBlas(const Mesh& mesh, const BuildOptions& opts, std::uint64_t salt) {
  if (mesh.triangleCount() == 0) throw std::invalid_argument("buildBlas: empty mesh");
  std::vector<Aabb> boxes;
  boxes.reserve(mesh.triangleCount());
  for (std::size_t i = 0; i < mesh.triangleCount(); ++i) boxes.push_back(bounds(mesh.triangle(i)));
  return buildBvh(boxes, opts, salt);
}

BuiltScene::BuiltScene(Scene scene, const BuildOptions& opts) : scene_(std::move(scene)), opts_(opts) {
  const auto& geoms = scene_.geometries();
  blas_.reserve(geoms.size());
  for (std::size_t g = 0; g < geoms.size(); ++g) blas_.push_back(buildBlas(scene_.meshOf(geoms[g]), opts_, g + 1));

  for (const auto& inst : scene_.instances()) {
    for (auto g : inst.geometries) {
      TlasEntry e;
      e.instance = inst.instanceIndex;
      e.geometry = g;
      e.worldBounds = transformBounds(inst.objectToWorld, blas_[g].nodes[0].bounds);
      entries_.push_back(e);
    }
  }
  if (!entries_.empty()) {
    std::vector<Aabb> boxes;
    boxes.reserve(entries_.size());
    for (const auto& e : entries_) boxes.push_back(e.worldBounds);
    tlas_ = buildBvh(boxes, opts_, 0);
  }
}

void traverse(const BuiltScene& built, Ray& ray, const HitVisitor& visitor, TraceStats& stats, TraversalLog* log) {
  if (built.empty()) return;
  const Scene& scene = built.scene();
  const float tMin = ray.tMin;

  traverseNodes(built.tlas(), ray.origin, ray.direction, ray, stats, [&](int tlasNode, const BvhNode& leaf) {
    if (log) log->leaves.push_back({-1, 0, tlasNode});
    for (std::uint32_t k = leaf.first; k < leaf.first + leaf.count; ++k) {
      const TlasEntry& entry = built.tlasEntries()[built.tlas().primIndices[k]];
      const Instance& inst = scene.instances()[entry.instance];
      const Geometry& geom = scene.geometries()[entry.geometry];
      const Mesh& mesh = scene.meshOf(geom);
      const Bvh& blas = built.blas(entry.geometry);
      Ray objRay = transformRayByInverse(inst.worldToObject, ray);

      const bool keepGoing = traverseNodes(
          blas, objRay.origin, objRay.direction, ray, stats, [&](int blasNode, const BvhNode& bleaf) {
            if (log) log->leaves.push_back({entry.instance, entry.geometry, blasNode});
            for (std::uint32_t p = bleaf.first; p < bleaf.first + bleaf.count; ++p) {
              const std::uint32_t prim = blas.primIndices[p];
              ++stats.triTests;
              objRay.tMin = ray.tMin;
              objRay.tMax = ray.tMax;
              const auto hit = intersectTriangle(objRay, mesh.triangle(prim));
              if (!hit) continue;
              const float before = ray.tMax;
              const VisitResult res =
                  visitor(Candidate{*hit, static_cast<int>(prim), geom.sbtOffset, entry.instance, &inst});
              if (ray.tMax > before || ray.tMin != tMin)
                throw std::logic_error("traverse: visitor widened the ray interval");
              if (res == VisitResult::Stop) return false;
            }
            return true;
          });
      if (!keepGoing) return false;
    }
    return true;
  });
}

}  // namespace ftb
