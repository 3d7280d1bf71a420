#include "ftb/pipeline.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>

namespace ftb {

void traceRays(const BuiltScene& scene, const Ray& launch, const TracePrograms& programs, TraceStats& stats,
               TraversalLog* log) {
  if (std::isnan(launch.tMin) || std::isnan(launch.tMax)) throw std::domain_error("trace: NaN ray interval");
  ++stats.traces;

  const bool anyHitEnabled = programs.anyHit && !(programs.flags & kDisableAnyHit);
  const bool closestHitEnabled = programs.closestHit && !(programs.flags & kDisableClosestHit);

  Ray ray = launch;
  std::optional<HitContext> committed;

  traverse(
      scene, ray,
      [&](const Candidate& c) {
        HitContext ctx;
        ctx.t = c.hit.t;
        ctx.prim = c.prim;
        ctx.geom = c.geom;
        ctx.inst = c.inst;
        ctx.u = c.hit.u;
        ctx.v = c.hit.v;
        ctx.frontFace = c.hit.frontFace;
        ctx.objectToWorld = c.instance->objectToWorld;
        ctx.worldToObject = c.instance->worldToObject;
        ctx.worldRay = ray;

        AhVerdict verdict = AhVerdict::Accept;
        if (anyHitEnabled) {
          ++stats.ahCalls;
          verdict = programs.anyHit(ctx);
        }
        switch (verdict) {
          case AhVerdict::Ignore:
            return VisitResult::Continue;
          case AhVerdict::Accept:
            committed = ctx;
            ray.tMax = ctx.t;
            return VisitResult::Continue;
          case AhVerdict::TerminateAccept:
            committed = ctx;
            ray.tMax = ctx.t;
            return VisitResult::Stop;
        }
        return VisitResult::Continue;
      },
      stats, log);

  if (committed) {
    if (closestHitEnabled) {
      ++stats.chCalls;
      programs.closestHit(*committed);
    }
  } else {
    ++stats.missCalls;
    if (programs.miss) programs.miss();
  }
}

}  // namespace ftb
