#include "ftb/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ftb/float_interval.hpp"

namespace ftb {

namespace {

void checkRay(const Ray& ray) {
  if (!std::isfinite(ray.tMin) || !std::isfinite(ray.tMax) || ray.tMin < 0.0f)
    throw std::domain_error("FTB kernel: ray interval must be finite with tMin >= 0");
}

// Hands one hit to the user and records it.
struct Delivery {
  const UserCode& userCode;
  FtbReport& report;

  UserAction operator()(const HitDesc& hit, const HitContext* ctx) {
    report.hits.push_back(hit);
    ++report.stats.userCodeCalls;
    const UserAction action = userCode(hit, ctx);
    if (action == UserAction::Stop) report.stoppedEarly = true;
    return action;
  }
};

// ---- stable-next -------------------------------------------------------------------

struct StableNextPrd {
  HitDesc hitMin;  // any hit has to be strictly greater than this
  HitDesc hitMax;  // closest qualifying hit found so far
};

AhVerdict stableNextAnyHit(const HitContext& ctx, StableNextPrd& prd) {
  const HitDesc curr = ctx.desc();
  if (less(prd.hitMin, curr) && less(curr, prd.hitMax)) prd.hitMax = curr;
  // Only hits strictly beyond the stored one may shrink tMax; accepting anything at
  // (or before) the stored distance would cull the rest of that distance group.
  return curr.t > prd.hitMax.t ? AhVerdict::Accept : AhVerdict::Ignore;
}

// ---- reject-repeats ----------------------------------------------------------------

struct RejectRepeatsPrd {
  HitDesc skipHit;  // first hit delivered at the current skip distance
  int skipCount = 0;
  HitDesc thisHit;
  std::optional<HitContext> thisContext;
};

AhVerdict rejectRepeatsAnyHit(const HitContext& ctx, RejectRepeatsPrd& prd) {
  const HitDesc hit = ctx.desc();
  if (hit.t > prd.skipHit.t) return AhVerdict::Accept;
  // tMin = justBelow(skip distance), so we are exactly at the skip distance here.
  if (hit == prd.skipHit) return AhVerdict::Ignore;
  if (prd.skipCount == 0) return AhVerdict::Accept;
  --prd.skipCount;
  return AhVerdict::Ignore;
}

// Host side of reject-repeats; identical for the callback and the cursor form.
struct RejectRepeatsLoop {
  float savedTMax;
  float nextTMin;
  int nextSkipCount = 0;
  HitDesc skipHit = HitDesc::none(-std::numeric_limits<float>::infinity());

  // Launches one trace; returns false when the loop is finished.
  template <class Ch>
  bool step(const BuiltScene& scene, Ray& ray, RejectRepeatsPrd& prd, TraceStats& stats, Ch&& closestHit) {
    ray.tMin = nextTMin;
    ray.tMax = savedTMax;
    prd.thisHit = HitDesc::none(0.0f);
    prd.thisContext.reset();
    prd.skipCount = nextSkipCount;
    prd.skipHit = skipHit;
    TraceConfig<RejectRepeatsPrd> cfg;
    cfg.anyHit = rejectRepeatsAnyHit;
    cfg.closestHit = closestHit;
    trace(scene, ray, cfg, prd, stats);
    if (!prd.thisHit.isHit()) return false;  // no hit, or user code wants to exit
    if (prd.thisHit.t > skipHit.t) {
      nextTMin = justBelow(prd.thisHit.t);
      nextSkipCount = 0;  // in addition to skipHit itself
      skipHit = prd.thisHit;
    } else {
      ++nextSkipCount;
    }
    return true;
  }
};

// ---- stable multi-hit --------------------------------------------------------------

struct MultiHitPrd {
  HitDesc hitMin;
  std::vector<HitDesc> buffer;  // sorted, at most `capacity`
  std::size_t capacity = 1;
};

AhVerdict multiHitAnyHit(const HitContext& ctx, MultiHitPrd& prd) {
  const HitDesc curr = ctx.desc();
  auto& buf = prd.buffer;
  if (less(prd.hitMin, curr)) {
    if (buf.size() < prd.capacity) {
      buf.insert(std::upper_bound(buf.begin(), buf.end(), curr, less), curr);
    } else if (less(curr, buf.back())) {
      buf.pop_back();
      buf.insert(std::upper_bound(buf.begin(), buf.end(), curr, less), curr);
    }
  }
  // Same rule as stable-next, against the worst buffered hit of a full buffer.
  const bool full = buf.size() == prd.capacity;
  return full && curr.t > buf.back().t ? AhVerdict::Accept : AhVerdict::Ignore;
}

}  // namespace

// ---- KernelId ----------------------------------------------------------------------

KernelId KernelId::parse(const std::string& name) {
  using K = Kind;
  if (name == "stable-next") return {K::StableNext, 1};
  if (name == "reject-repeats") return {K::RejectRepeats, 1};
  if (name == "while-while") return {K::WhileWhile, 1};
  if (name == "while-merged") return {K::WhileMerged, 1};
  if (name == "ah-only") return {K::AhOnly, 1};
  if (name == "ch-only") return {K::ChOnly, 1};
  for (const std::string prefix : {"multi-hit:", "stable-multihit:"}) {
    if (name.rfind(prefix, 0) == 0) {
      const std::string num = name.substr(prefix.size());
      std::size_t used = 0;
      int n = 0;
      try {
        n = std::stoi(num, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != num.size() || num.empty()) throw std::invalid_argument("bad multi-hit capacity in '" + name + "'");
      if (n < 1) throw std::invalid_argument("multi-hit capacity must be >= 1");
      return {K::StableMultiHit, n};
    }
  }
  throw std::invalid_argument("unknown kernel '" + name + "'");
}

std::string KernelId::name() const {
  switch (kind) {
    case Kind::StableNext: return "stable-next";
    case Kind::RejectRepeats: return "reject-repeats";
    case Kind::WhileWhile: return "while-while";
    case Kind::WhileMerged: return "while-merged";
    case Kind::StableMultiHit: return "multi-hit:" + std::to_string(n);
    case Kind::AhOnly: return "ah-only";
    case Kind::ChOnly: return "ch-only";
  }
  return "?";
}

std::vector<KernelId> correctKernels() {
  using K = KernelId::Kind;
  return {{K::StableNext, 1}, {K::RejectRepeats, 1}, {K::WhileWhile, 1}, {K::WhileMerged, 1},
          KernelId::stableMultiHit(1), KernelId::stableMultiHit(4), KernelId::stableMultiHit(16)};
}

std::vector<KernelId> allKernels() {
  auto out = correctKernels();
  out.push_back({KernelId::Kind::AhOnly, 1});
  out.push_back({KernelId::Kind::ChOnly, 1});
  return out;
}

// ---- cursors -----------------------------------------------------------------------

StableNextCursor::StableNextCursor(const BuiltScene& scene, const Ray& ray)
    : scene_(&scene), ray_(ray), userTMax_(ray.tMax), hitMin_(HitDesc::none(ray.tMin)) {
  checkRay(ray);
}

std::optional<HitDesc> StableNextCursor::next() {
  if (done_) return std::nullopt;
  StableNextPrd prd{hitMin_, HitDesc::none(userTMax_)};
  if (!first_) ray_.tMin = justBelow(hitMin_.t);
  ray_.tMax = userTMax_;
  first_ = false;

  TraceConfig<StableNextPrd> cfg;
  cfg.anyHit = stableNextAnyHit;
  cfg.flags = kDisableClosestHit;
  trace(*scene_, ray_, cfg, prd, stats_);
  if (!prd.hitMax.isHit()) {
    done_ = true;
    return std::nullopt;
  }
  hitMin_ = prd.hitMax;
  return prd.hitMax;
}

RejectRepeatsCursor::RejectRepeatsCursor(const BuiltScene& scene, const Ray& ray)
    : scene_(&scene),
      ray_(ray),
      savedTMax_(ray.tMax),
      nextTMin_(ray.tMin),
      skipHit_(HitDesc::none(-std::numeric_limits<float>::infinity())) {
  checkRay(ray);
}

std::optional<HitContext> RejectRepeatsCursor::next() {
  if (done_) return std::nullopt;
  RejectRepeatsLoop loop{savedTMax_, nextTMin_, nextSkipCount_, skipHit_};
  RejectRepeatsPrd prd;
  const bool more = loop.step(*scene_, ray_, prd, stats_, [](const HitContext& ctx, RejectRepeatsPrd& p) {
    p.thisHit = ctx.desc();
    p.thisContext = ctx;
  });
  if (!more) {
    done_ = true;
    return std::nullopt;
  }
  nextTMin_ = loop.nextTMin;
  nextSkipCount_ = loop.nextSkipCount;
  skipHit_ = loop.skipHit;
  return prd.thisContext;
}

StableMultiHitCursor::StableMultiHitCursor(const BuiltScene& scene, const Ray& ray, int n)
    : scene_(&scene), ray_(ray), capacity_(n), userTMax_(ray.tMax), hitMin_(HitDesc::none(ray.tMin)) {
  if (n < 1) throw std::domain_error("StableMultiHit: capacity must be >= 1");
  checkRay(ray);
}

std::vector<HitDesc> StableMultiHitCursor::nextBatch() {
  if (done_) return {};
  MultiHitPrd prd;
  prd.hitMin = hitMin_;
  prd.capacity = static_cast<std::size_t>(capacity_);
  prd.buffer.reserve(prd.capacity + 1);
  if (!first_) ray_.tMin = justBelow(hitMin_.t);
  ray_.tMax = userTMax_;
  first_ = false;

  TraceConfig<MultiHitPrd> cfg;
  cfg.anyHit = multiHitAnyHit;
  cfg.flags = kDisableClosestHit;
  trace(*scene_, ray_, cfg, prd, stats_);
  if (prd.buffer.empty()) {
    done_ = true;
    return {};
  }
  hitMin_ = prd.buffer.back();
  return std::move(prd.buffer);
}

std::optional<HitDesc> StableMultiHitCursor::next() {
  if (pendingPos_ == pending_.size()) {
    pending_ = nextBatch();
    pendingPos_ = 0;
    if (pending_.empty()) return std::nullopt;
  }
  return pending_[pendingPos_++];
}

// ---- callback runners --------------------------------------------------------------

FtbReport runStableNext(const BuiltScene& scene, const Ray& ray, const UserCode& userCode) {
  FtbReport report;
  Delivery deliver{userCode, report};
  StableNextCursor cursor(scene, ray);
  while (auto hit = cursor.next()) {
    // No pipeline state: the AH program had to OptiX-ignore the hit it kept.
    if (deliver(*hit, nullptr) == UserAction::Stop) break;
  }
  const auto calls = report.stats.userCodeCalls;
  report.stats = cursor.stats();
  report.stats.userCodeCalls = calls;
  return report;
}

FtbReport runRejectRepeats(const BuiltScene& scene, const Ray& ray, const UserCode& userCode) {
  checkRay(ray);
  FtbReport report;
  Delivery deliver{userCode, report};
  RejectRepeatsLoop loop{ray.tMax, ray.tMin};
  Ray r = ray;
  RejectRepeatsPrd prd;
  auto closestHit = [&](const HitContext& ctx, RejectRepeatsPrd& p) {
    if (deliver(ctx.desc(), &ctx) == UserAction::Continue) p.thisHit = ctx.desc();
  };
  while (loop.step(scene, r, prd, report.stats, closestHit)) {
  }
  return report;
}

FtbReport runWhileWhile(const BuiltScene& scene, const Ray& ray, const UserCode& userCode) {
  checkRay(ray);
  FtbReport report;
  Delivery deliver{userCode, report};

  struct Prd {
    float tNext = -1.0f;
    bool stop = false;
  };
  // One SBT entry: CH serves feeler rays, AH serves executor rays; each trace disables the other.
  TraceConfig<Prd> sbt;
  sbt.closestHit = [](const HitContext& ctx, Prd& prd) { prd.tNext = ctx.t; };
  sbt.anyHit = [&](const HitContext& ctx, Prd& prd) {
    if (deliver(ctx.desc(), &ctx) == UserAction::Stop) {
      prd.stop = true;
      return AhVerdict::TerminateAccept;
    }
    return AhVerdict::Ignore;
  };
  TraceConfig<Prd> feeler = sbt;
  feeler.flags = kDisableAnyHit;
  TraceConfig<Prd> executor = sbt;
  executor.flags = kDisableClosestHit;

  const float userTMax = ray.tMax;
  Ray r = ray;
  while (true) {
    Prd prd;
    trace(scene, r, feeler, prd, report.stats);
    if (prd.tNext == -1.0f) break;  // no next hit distance

    const float tNext = prd.tNext;
    r.tMin = justBelow(tNext);
    r.tMax = justAbove(tNext);
    trace(scene, r, executor, prd, report.stats);
    if (prd.stop) break;

    r.tMin = tNext;
    r.tMax = userTMax;
  }
  return report;
}

FtbReport runWhileMerged(const BuiltScene& scene, const Ray& ray, const UserCode& userCode) {
  checkRay(ray);
  FtbReport report;
  Delivery deliver{userCode, report};

  // tFeeler: -1 = no next distance found, -2 = user code asked to terminate.
  struct Prd {
    float tExec = -1.0f;
    float tFeeler = -1.0f;
  };
  TraceConfig<Prd> cfg;
  cfg.closestHit = [](const HitContext& ctx, Prd& prd) {
    if (prd.tFeeler != -2.0f) prd.tFeeler = ctx.t;
  };
  cfg.anyHit = [&](const HitContext& ctx, Prd& prd) {
    const bool atExecDistance = ctx.t == prd.tExec;
    // Hits beyond the executed surface are accepted without user code; they find the next distance.
    if (!atExecDistance) return AhVerdict::Accept;
    if (deliver(ctx.desc(), &ctx) == UserAction::Stop) {
      prd.tFeeler = -2.0f;
      return AhVerdict::TerminateAccept;
    }
    return AhVerdict::Ignore;
  };

  const float userTMax = ray.tMax;
  Ray r = ray;
  Prd prd;
  while (true) {
    trace(scene, r, cfg, prd, report.stats);
    if (prd.tFeeler < 0.0f) break;
    prd.tExec = prd.tFeeler;
    prd.tFeeler = -1.0f;
    r.tMin = justBelow(prd.tExec);
    r.tMax = userTMax;
  }
  return report;
}

FtbReport runStableMultiHit(const BuiltScene& scene, const Ray& ray, int n, const UserCode& userCode) {
  FtbReport report;
  Delivery deliver{userCode, report};
  StableMultiHitCursor cursor(scene, ray, n);
  bool stop = false;
  while (!stop) {
    const auto batch = cursor.nextBatch();
    if (batch.empty()) break;
    for (const auto& hit : batch) {
      if (deliver(hit, nullptr) == UserAction::Stop) {
        stop = true;
        break;
      }
    }
  }
  const auto calls = report.stats.userCodeCalls;
  report.stats = cursor.stats();
  report.stats.userCodeCalls = calls;
  return report;
}

FtbReport runAhOnly(const BuiltScene& scene, const Ray& ray, const UserCode& userCode) {
  checkRay(ray);
  FtbReport report;
  Delivery deliver{userCode, report};
  struct Prd {};
  TraceConfig<Prd> cfg;
  cfg.anyHit = [&](const HitContext& ctx, Prd&) {
    return deliver(ctx.desc(), &ctx) == UserAction::Stop ? AhVerdict::TerminateAccept : AhVerdict::Ignore;
  };
  cfg.flags = kDisableClosestHit;
  Prd prd;
  trace(scene, ray, cfg, prd, report.stats);
  return report;
}

FtbReport runChOnly(const BuiltScene& scene, const Ray& ray, const UserCode& userCode) {
  checkRay(ray);
  FtbReport report;
  Delivery deliver{userCode, report};
  struct Prd {
    float tFound = -1.0f;
    bool stop = false;
  };
  TraceConfig<Prd> cfg;
  cfg.closestHit = [&](const HitContext& ctx, Prd& prd) {
    prd.tFound = ctx.t;
    if (deliver(ctx.desc(), &ctx) == UserAction::Stop) prd.stop = true;
  };
  cfg.flags = kDisableAnyHit;
  Ray r = ray;
  while (true) {
    Prd prd;
    trace(scene, r, cfg, prd, report.stats);
    if (prd.tFound == -1.0f || prd.stop) break;
    r.tMin = prd.tFound;  // not justBelow: other hits at this distance are lost
  }
  return report;
}

FtbReport runKernel(const KernelId& kernel, const BuiltScene& scene, const Ray& ray, const UserCode& userCode) {
  using K = KernelId::Kind;
  switch (kernel.kind) {
    case K::StableNext: return runStableNext(scene, ray, userCode);
    case K::RejectRepeats: return runRejectRepeats(scene, ray, userCode);
    case K::WhileWhile: return runWhileWhile(scene, ray, userCode);
    case K::WhileMerged: return runWhileMerged(scene, ray, userCode);
    case K::StableMultiHit: return runStableMultiHit(scene, ray, kernel.n, userCode);
    case K::AhOnly: return runAhOnly(scene, ray, userCode);
    case K::ChOnly: return runChOnly(scene, ray, userCode);
  }
  throw std::invalid_argument("runKernel: unknown kernel");
}

}  // namespace ftb
