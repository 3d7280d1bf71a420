#pragma once

// Software model of the hardware ray-tracing pipeline's observable behavior:
// exclusive (tMin, tMax) interval, any-hit verdicts, tMax shrinking on accept,
// terminate, and closest-hit / miss resolution at the end of a trace.

#include <functional>

#include "ftb/bvh.hpp"
#include "ftb/geometry.hpp"
#include "ftb/hit_order.hpp"
#include "ftb/stats.hpp"

namespace ftb {

/// What an AH or CH program can query about the hit it is looking at.
struct HitContext {
  float t = 0.0f;
  int prim = -1;
  int geom = -1;  // sbtOffset
  int inst = -1;
  float u = 0.0f, v = 0.0f;
  bool frontFace = false;
  Affine3 objectToWorld;
  Affine3 worldToObject;
  Ray worldRay;  // interval as seen when the hit was delivered

  HitDesc desc() const { return HitDesc(t, prim, geom, inst); }
};

enum class AhVerdict {
  Accept,           // commit, tMax <- t
  Ignore,           // discard, interval unchanged
  TerminateAccept,  // commit, then stop all traversal; CH still runs
};

enum TraceFlags : unsigned {
  kTraceNone = 0,
  kDisableAnyHit = 1u << 0,
  kDisableClosestHit = 1u << 1,
};

/// Programs of one emulated SBT entry plus per-trace flags, bound to a PRD type.
template <class Prd>
struct TraceConfig {
  std::function<AhVerdict(const HitContext&, Prd&)> anyHit;
  std::function<void(const HitContext&, Prd&)> closestHit;
  std::function<void(Prd&)> miss;
  unsigned flags = kTraceNone;
};

/// Type-erased programs (PRD already bound).
struct TracePrograms {
  std::function<AhVerdict(const HitContext&)> anyHit;
  std::function<void(const HitContext&)> closestHit;
  std::function<void()> miss;
  unsigned flags = kTraceNone;
};

/// Launches one trace. A missing AH program (or kDisableAnyHit) means every candidate
/// is accepted without an AH call. Throws std::domain_error for a NaN interval bound.
void traceRays(const BuiltScene& scene, const Ray& ray, const TracePrograms& programs, TraceStats& stats,
               TraversalLog* log = nullptr);

template <class Prd>
void trace(const BuiltScene& scene, const Ray& ray, const TraceConfig<Prd>& cfg, Prd& prd, TraceStats& stats,
           TraversalLog* log = nullptr) {
  TracePrograms p;
  if (cfg.anyHit) p.anyHit = [&](const HitContext& ctx) { return cfg.anyHit(ctx, prd); };
  if (cfg.closestHit) p.closestHit = [&](const HitContext& ctx) { cfg.closestHit(ctx, prd); };
  if (cfg.miss) p.miss = [&] { cfg.miss(prd); };
  p.flags = cfg.flags;
  traceRays(scene, ray, p, stats, log);
}

}  // namespace ftb
