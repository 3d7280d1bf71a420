#pragma once

// Front-to-back any-hit (FTB) kernels: iterate every hit along a ray in ascending
// distance without losing hits that share a distance. All kernels are written
// purely against the pipeline emulator (trace + AH/CH programs) and only ever
// change the ray's tMin/tMax between traces.
//
//   kernel           correct        iteration         user code sees HitContext
//   stable-next      yes            explicit          no
//   reject-repeats   yes            explicit / CH     yes
//   while-while      yes            callback (AH)     yes
//   while-merged     yes            callback (AH)     yes
//   multi-hit:N      yes            explicit          no
//   ah-only          out of order   callback (AH)     yes
//   ch-only          skips ties     explicit / CH     yes

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ftb/bvh.hpp"
#include "ftb/hit_order.hpp"
#include "ftb/pipeline.hpp"
#include "ftb/stats.hpp"

namespace ftb {

enum class UserAction { Continue, Stop };

/// Called once per delivered hit. `ctx` is null for kernels without pipeline-state access.
using UserCode = std::function<UserAction(const HitDesc& hit, const HitContext* ctx)>;

struct KernelId {
  enum class Kind { StableNext, RejectRepeats, WhileWhile, WhileMerged, StableMultiHit, AhOnly, ChOnly };
  Kind kind = Kind::StableNext;
  int n = 1;  // StableMultiHit capacity

  static KernelId stableMultiHit(int n) { return {Kind::StableMultiHit, n}; }

  /// "stable-next", "reject-repeats", "while-while", "while-merged", "multi-hit:N",
  /// "ah-only", "ch-only". Throws std::invalid_argument.
  static KernelId parse(const std::string& name);
  std::string name() const;

  /// Delivers every hit in ascending distance order.
  bool isCorrect() const { return kind != Kind::AhOnly && kind != Kind::ChOnly; }
  /// Delivery sequence equals the strict total order, independent of BVH build.
  bool isStable() const { return kind == Kind::StableNext || kind == Kind::StableMultiHit; }
  bool hasRtxState() const { return !isStable(); }

  friend bool operator==(const KernelId&, const KernelId&) = default;
};

/// All kernels in the order the tools list them.
std::vector<KernelId> allKernels();
std::vector<KernelId> correctKernels();

struct FtbReport {
  std::vector<HitDesc> hits;  // everything handed to userCode, in call order
  bool stoppedEarly = false;
  TraceStats stats;
};

/// Kernels require a finite ray interval with tMin >= 0 (the sentinels -1/-2 of the
/// distance-based kernels are then unambiguous). Throws std::domain_error otherwise.
FtbReport runStableNext(const BuiltScene& scene, const Ray& ray, const UserCode& userCode);
FtbReport runRejectRepeats(const BuiltScene& scene, const Ray& ray, const UserCode& userCode);
FtbReport runWhileWhile(const BuiltScene& scene, const Ray& ray, const UserCode& userCode);
FtbReport runWhileMerged(const BuiltScene& scene, const Ray& ray, const UserCode& userCode);
/// Throws std::domain_error for n < 1.
FtbReport runStableMultiHit(const BuiltScene& scene, const Ray& ray, int n, const UserCode& userCode);
FtbReport runAhOnly(const BuiltScene& scene, const Ray& ray, const UserCode& userCode);
FtbReport runChOnly(const BuiltScene& scene, const Ray& ray, const UserCode& userCode);

FtbReport runKernel(const KernelId& kernel, const BuiltScene& scene, const Ray& ray, const UserCode& userCode);

// Explicit iteration. Each next() launches the traces needed for one more hit; the
// caller may do arbitrary work in between.

class StableNextCursor {
 public:
  StableNextCursor(const BuiltScene& scene, const Ray& ray);
  std::optional<HitDesc> next();
  const TraceStats& stats() const { return stats_; }

 private:
  const BuiltScene* scene_;
  Ray ray_;
  float userTMax_;
  HitDesc hitMin_;
  bool first_ = true;
  bool done_ = false;
  TraceStats stats_;
};

class RejectRepeatsCursor {
 public:
  RejectRepeatsCursor(const BuiltScene& scene, const Ray& ray);
  /// The hit as seen by the CH program, including pipeline state.
  std::optional<HitContext> next();
  const TraceStats& stats() const { return stats_; }

 private:
  const BuiltScene* scene_;
  Ray ray_;
  float savedTMax_;
  float nextTMin_;
  int nextSkipCount_ = 0;
  HitDesc skipHit_;
  bool done_ = false;
  TraceStats stats_;
};

class StableMultiHitCursor {
 public:
  StableMultiHitCursor(const BuiltScene& scene, const Ray& ray, int n);
  /// The next up-to-n hits in strict order; empty once exhausted.
  std::vector<HitDesc> nextBatch();
  std::optional<HitDesc> next();
  const TraceStats& stats() const { return stats_; }

 private:
  const BuiltScene* scene_;
  Ray ray_;
  int capacity_;
  float userTMax_;
  HitDesc hitMin_;
  bool first_ = true;
  bool done_ = false;
  std::vector<HitDesc> pending_;
  std::size_t pendingPos_ = 0;
  TraceStats stats_;
};

}  // namespace ftb
