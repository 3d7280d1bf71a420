#include <algorithm>
#include <limits>
#include <set>
#include <tuple>
#include <vector>

#include "doctest.h"
#include "ftb/bvh.hpp"
#include "ftb/float_interval.hpp"
#include "ftb/oracle.hpp"
#include "support.hpp"

using namespace ftb;

namespace {

std::vector<HitDesc> collectAll(const BuiltScene& scene, Ray ray, TraceStats& stats, TraversalLog* log = nullptr) {
  std::vector<HitDesc> seen;
  traverse(
      scene, ray,
      [&](const Candidate& c) {
        seen.emplace_back(c.hit.t, c.prim, c.geom, c.inst);
        return VisitResult::Continue;
      },
      stats, log);
  return seen;
}

std::vector<int> blasLeafOrder(const TraversalLog& log) {
  std::vector<int> nodes;
  for (const auto& leaf : log.leaves)
    if (leaf.inst >= 0) nodes.push_back(leaf.node);
  return nodes;
}

}  // namespace

TEST_SUITE("bvh") {
  TEST_CASE("one triangle is a single leaf") {
    Mesh m;
    m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    m.indices = {{0, 1, 2}};
    const Bvh bvh = buildBlas(m, {});
    REQUIRE(bvh.nodes.size() == 1);
    CHECK(bvh.nodes[0].isLeaf());
    CHECK(bvh.nodes[0].count == 1);
  }

  TEST_CASE("invalid build input") {
    CHECK_THROWS_AS(buildBvh({}, {}), std::invalid_argument);
    const Aabb box{{0, 0, 0}, {1, 1, 1}};
    CHECK_THROWS_AS(buildBvh(std::span(&box, 1), BuildOptions{0, PrimOrder::AsGiven, 0}), std::invalid_argument);
  }

  TEST_CASE("builds are deterministic") {
    const Scene s = genInstancedGrid(3);
    for (const BuildOptions& opts : {BuildOptions{}, BuildOptions::permuted(17), BuildOptions::permuted(17, 1)}) {
      const BuiltScene a(s, opts), b(s, opts);
      CHECK(a.tlas().nodes == b.tlas().nodes);
      CHECK(a.tlas().primIndices == b.tlas().primIndices);
      for (std::uint32_t g = 0; g < s.geometries().size(); ++g) {
        CHECK(a.blas(g).nodes == b.blas(g).nodes);
        CHECK(a.blas(g).primIndices == b.blas(g).primIndices);
      }
    }
  }

  TEST_CASE("every leaf range covers each primitive exactly once") {
    const Scene s = genAbuttingBoxes(3);
    for (int leafSize : {1, 2, 3, 4, 8}) {
      const BuiltScene b(s, BuildOptions::permuted(5, leafSize));
      for (std::uint32_t g = 0; g < s.geometries().size(); ++g) {
        const Bvh& bvh = b.blas(g);
        std::vector<int> seen(s.meshOf(s.geometries()[g]).triangleCount(), 0);
        for (const auto& n : bvh.nodes) {
          if (!n.isLeaf()) continue;
          CHECK(n.count <= static_cast<std::uint32_t>(leafSize));
          for (std::uint32_t i = 0; i < n.count; ++i) ++seen[bvh.primIndices[n.first + i]];
        }
        CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
      }
    }
  }

  TEST_CASE("permuted rebuild changes the visit order of tied triangles") {
    const Scene s = genCoplanarStack(8, true);
    const Ray probe = coplanarStackProbeRay();
    TraceStats stats;
    const auto reference = collectAll(BuiltScene(s), probe, stats);
    REQUIRE(reference.size() == 8);
    bool differs = false;
    for (std::uint64_t seed = 1; seed <= 3 && !differs; ++seed) {
      const auto permuted = collectAll(BuiltScene(s, BuildOptions::permuted(seed)), probe, stats);
      CHECK(sortHits(permuted) == sortHits(reference));
      differs = permuted != reference;
    }
    CHECK(differs);
  }

  TEST_CASE("one triangle at t = 5") {
    Mesh m;
    m.vertices = {{-1, -1, 5}, {2, -1, 5}, {-1, 2, 5}};
    m.indices = {{0, 1, 2}};
    TraceStats stats;
    const auto seen = collectAll(BuiltScene(sceneFromMesh(m)), {{0, 0, 0}, {0, 0, 1}, 0, 10}, stats);
    REQUIRE(seen.size() == 1);
    CHECK(seen[0].t == 5.0f);
  }

  TEST_CASE("accepting the front hit prunes the rest") {
    const BuiltScene scene(genCoplanarStack(8, false));
    Ray ray = coplanarStackProbeRay();
    TraceStats ignoreAll, acceptFirst;
    collectAll(scene, ray, ignoreAll);
    int calls = 0;
    traverse(
        scene, ray,
        [&](const Candidate& c) {
          ++calls;
          ray.tMax = c.hit.t;
          return VisitResult::Continue;
        },
        acceptFirst);
    CHECK(acceptFirst.triTests < ignoreAll.triTests);
    CHECK(ray.tMax == oracleAllHits(scene.scene(), coplanarStackProbeRay()).hits[0].t);
  }

  TEST_CASE("moving tMin to the hit distance flips the leaf visit order") {
    const BuiltScene scene(test::tMinFlipScene(), BuildOptions{2, PrimOrder::AsGiven, 0});
    TraceStats stats;
    TraversalLog fromZero, fromHit;
    Ray ray = test::tMinFlipRay();
    const auto first = collectAll(scene, ray, stats, &fromZero);
    ray.tMin = justBelow(6.0f);
    const auto second = collectAll(scene, ray, stats, &fromHit);

    REQUIRE(first.size() == 2);
    REQUIRE(second.size() == 2);
    CHECK(first[0].t == 6.0f);
    CHECK(first[1].t == 6.0f);
    // Same two hits, opposite order.
    CHECK(first[0] == second[1]);
    CHECK(first[1] == second[0]);
    const auto a = blasLeafOrder(fromZero), b = blasLeafOrder(fromHit);
    REQUIRE(a.size() == 2);
    REQUIRE(b.size() == 2);
    CHECK(a[0] == b[1]);
    CHECK(a[1] == b[0]);
  }

  TEST_CASE("ignore-all traversal reports exactly the oracle set") {
    for (const Scene& s : {genCoplanarStack(8, true), genAbuttingBoxes(5), genInstancedGrid(3), genAdversarialOrder()}) {
      for (const BuildOptions& opts : {BuildOptions{}, BuildOptions::permuted(3, 1), BuildOptions::permuted(4, 8)}) {
        const BuiltScene scene(s, opts);
        int mismatches = 0, duplicates = 0;
        for (const Ray& r : test::sceneRays(s, 300, 21)) {
          TraceStats stats;
          const auto seen = collectAll(scene, r, stats);
          std::set<std::tuple<int, int, int>> ids;
          for (const auto& h : seen) ids.emplace(h.inst, h.geom, h.prim);
          if (ids.size() != seen.size()) ++duplicates;
          if (sortHits(seen) != oracleAllHits(s, r).hits) ++mismatches;
        }
        CHECK(mismatches == 0);
        CHECK(duplicates == 0);
      }
    }
  }

  TEST_CASE("visit sequence is deterministic") {
    const Scene s = genInstancedGrid(3);
    const BuiltScene scene(s, BuildOptions::permuted(8));
    for (const Ray& r : test::sceneRays(s, 100, 4)) {
      TraceStats a, b;
      TraversalLog la, lb;
      CHECK(collectAll(scene, r, a, &la) == collectAll(scene, r, b, &lb));
      CHECK(la.leaves == lb.leaves);
      CHECK(a == b);
    }
  }

  TEST_CASE("visitor may only shrink tMax") {
    const BuiltScene scene(genCoplanarStack(2, false));
    Ray ray = coplanarStackProbeRay();
    TraceStats stats;
    CHECK_THROWS_AS(traverse(
                        scene, ray,
                        [&](const Candidate&) {
                          ray.tMax = std::numeric_limits<float>::infinity();
                          return VisitResult::Continue;
                        },
                        stats),
                    std::logic_error);
    ray = coplanarStackProbeRay();
    CHECK_THROWS_AS(traverse(
                        scene, ray,
                        [&](const Candidate&) {
                          ray.tMin = 0.5f;
                          return VisitResult::Continue;
                        },
                        stats),
                    std::logic_error);
  }

  TEST_CASE("empty scene traverses nothing") {
    const BuiltScene scene{Scene{}};
    CHECK(scene.empty());
    TraceStats stats;
    CHECK(collectAll(scene, coplanarStackProbeRay(), stats).empty());
    CHECK(stats.triTests == 0);
  }
}
