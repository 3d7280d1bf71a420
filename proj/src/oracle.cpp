#include "ftb/oracle.hpp"

#include <algorithm>
#include <sstream>

#include "ftb/parallel.hpp"

namespace ftb {

OracleResult oracleAllHits(const Scene& scene, const Ray& ray) {
  OracleResult out;
  for (const auto& inst : scene.instances()) {
    const Ray objRay = transformRayByInverse(inst.worldToObject, ray);
    for (auto g : inst.geometries) {
      const Geometry& geom = scene.geometries()[g];
      const Mesh& mesh = scene.meshOf(geom);
      for (std::size_t prim = 0; prim < mesh.triangleCount(); ++prim) {
        if (const auto hit = intersectTriangle(objRay, mesh.triangle(prim)))
          out.hits.emplace_back(hit->t, static_cast<int>(prim), geom.sbtOffset, inst.instanceIndex);
      }
    }
  }
  out.hits = sortHits(out.hits);
  out.groupSizes = distanceGroups(out.hits);
  return out;
}

std::vector<std::size_t> distanceGroups(std::span<const HitDesc> hits) {
  std::vector<std::size_t> sizes;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (i == 0 || hits[i].t != hits[i - 1].t)
      sizes.push_back(1);
    else
      ++sizes.back();
  }
  return sizes;
}

std::string checkName(Check c) {
  switch (c) {
    case Check::Completeness: return "completeness";
    case Check::Duplicate: return "duplicate";
    case Check::Order: return "order";
    case Check::StableOrder: return "stable-order";
    case Check::Counters: return "counters";
    case Check::EarlyStop: return "early-stop";
  }
  return "?";
}

namespace {

std::string describe(const TraceStats& s) {
  std::ostringstream os;
  os << "traces=" << s.traces << " ahCalls=" << s.ahCalls << " chCalls=" << s.chCalls
     << " userCodeCalls=" << s.userCodeCalls;
  return os.str();
}

std::optional<std::string> expectEqual(const char* what, std::uint64_t actual, std::uint64_t expected,
                                       const TraceStats& s) {
  if (actual == expected) return std::nullopt;
  std::ostringstream os;
  os << what << " = " << actual << ", expected " << expected << " (" << describe(s) << ")";
  return os.str();
}

UserAction countAll(const HitDesc&, const HitContext*) { return UserAction::Continue; }

struct RayOutcome {
  std::array<bool, kAllChecks.size()> failed{};
  std::vector<std::string> problems;
  std::vector<HitDesc> expected, actual;
  TraceStats stats;
  std::size_t oracleHits = 0, oracleGroups = 0;
};

void flag(RayOutcome& o, Check c, std::string msg) {
  o.failed[static_cast<std::size_t>(c)] = true;
  o.problems.push_back(checkName(c) + ": " + std::move(msg));
}

RayOutcome checkRay(const KernelUnderTest& kernel, const BuiltScene& scene, const Ray& ray, const UserCode* userCode) {
  RayOutcome o;
  const OracleResult oracle = oracleAllHits(scene.scene(), ray);
  const FtbReport run = kernel.run(scene, ray, countAll);
  o.expected = oracle.hits;
  o.actual = run.hits;
  o.stats = run.stats;
  o.oracleHits = oracle.hitCount();
  o.oracleGroups = oracle.groupCount();

  // Duplicates and completeness on the sorted multiset.
  std::vector<HitDesc> sorted = sortHits(run.hits);
  const auto dup = std::adjacent_find(sorted.begin(), sorted.end());
  if (dup != sorted.end()) {
    std::ostringstream os;
    os << "hit (t=" << dup->t << ", inst=" << dup->inst << ", geom=" << dup->geom << ", prim=" << dup->prim
       << ") delivered more than once";
    flag(o, Check::Duplicate, os.str());
  }
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  if (sorted != oracle.hits) {
    std::vector<HitDesc> missing, extra;
    std::set_difference(oracle.hits.begin(), oracle.hits.end(), sorted.begin(), sorted.end(),
                        std::back_inserter(missing), less);
    std::set_difference(sorted.begin(), sorted.end(), oracle.hits.begin(), oracle.hits.end(),
                        std::back_inserter(extra), less);
    std::ostringstream os;
    os << missing.size() << " missing, " << extra.size() << " unexpected";
    flag(o, Check::Completeness, os.str());
  }

  for (std::size_t i = 1; i < run.hits.size(); ++i) {
    if (run.hits[i].t < run.hits[i - 1].t) {
      std::ostringstream os;
      os << "hit " << i << " at t=" << run.hits[i].t << " delivered after t=" << run.hits[i - 1].t;
      flag(o, Check::Order, os.str());
      break;
    }
  }

  if (kernel.stable && run.hits != oracle.hits) flag(o, Check::StableOrder, "sequence differs from sorted oracle");

  if (run.stats.userCodeCalls != run.hits.size())
    flag(o, Check::Counters, "userCodeCalls does not match delivered hits");
  if (kernel.counterIdentity) {
    if (auto msg = kernel.counterIdentity(run, oracle)) flag(o, Check::Counters, *msg);
  }

  // Stopping after k hits must yield exactly the first k hits of the exhaustion run.
  if (!run.hits.empty()) {
    const std::size_t k = (run.hits.size() + 1) / 2;
    std::size_t seen = 0;
    const FtbReport stopped = kernel.run(scene, ray, [&](const HitDesc&, const HitContext*) {
      return ++seen >= k ? UserAction::Stop : UserAction::Continue;
    });
    const std::vector<HitDesc> prefix(run.hits.begin(), run.hits.begin() + static_cast<std::ptrdiff_t>(k));
    if (stopped.hits != prefix || !stopped.stoppedEarly) {
      std::ostringstream os;
      os << "stop after " << k << " delivered " << stopped.hits.size() << " hits, not the exhaustion prefix";
      flag(o, Check::EarlyStop, os.str());
    }
  }
  if (userCode) {
    const FtbReport custom = kernel.run(scene, ray, *userCode);
    const bool prefix = custom.hits.size() <= run.hits.size() &&
                        std::equal(custom.hits.begin(), custom.hits.end(), run.hits.begin()) &&
                        (custom.stoppedEarly || custom.hits.size() == run.hits.size());
    if (!prefix) flag(o, Check::EarlyStop, "user code run is not a prefix of the exhaustion run");
  }
  return o;
}

std::vector<HitDesc> withinGroupSorted(std::vector<HitDesc> hits) {
  std::size_t begin = 0;
  for (std::size_t size : distanceGroups(hits)) {
    std::sort(hits.begin() + static_cast<std::ptrdiff_t>(begin),
              hits.begin() + static_cast<std::ptrdiff_t>(begin + size), less);
    begin += size;
  }
  return hits;
}

bool rebuildEquivalent(RebuildInvariant inv, const std::vector<HitDesc>& a, const std::vector<HitDesc>& b) {
  switch (inv) {
    case RebuildInvariant::ExactSequence:
      return a == b;
    case RebuildInvariant::MultisetAndGroups:
      return withinGroupSorted(a) == withinGroupSorted(b);
    case RebuildInvariant::Multiset:
      return sortHits(a) == sortHits(b);
    case RebuildInvariant::DistanceSequence: {
      if (a.size() != b.size()) return false;
      for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].t != b[i].t) return false;
      return true;
    }
  }
  return false;
}

const char* invariantName(RebuildInvariant inv) {
  switch (inv) {
    case RebuildInvariant::ExactSequence: return "exact-sequence";
    case RebuildInvariant::MultisetAndGroups: return "multiset-and-groups";
    case RebuildInvariant::Multiset: return "multiset";
    case RebuildInvariant::DistanceSequence: return "distance-sequence";
  }
  return "?";
}

nlohmann::json hitsToJson(const std::vector<HitDesc>& hits) {
  auto arr = nlohmann::json::array();
  for (const auto& h : hits) arr.push_back(toJson(h));
  return arr;
}

}  // namespace

nlohmann::json toJson(const HitDesc& hit) {
  return {{"t", hit.t}, {"inst", hit.inst}, {"geom", hit.geom}, {"prim", hit.prim}};
}

KernelUnderTest kernelUnderTest(const KernelId& kernel) {
  using K = KernelId::Kind;
  KernelUnderTest k;
  k.name = kernel.name();
  k.run = [kernel](const BuiltScene& s, const Ray& r, const UserCode& u) { return runKernel(kernel, s, r, u); };
  k.stable = kernel.isStable();
  switch (kernel.kind) {
    case K::StableNext:
    case K::StableMultiHit:
      k.rebuildInvariant = RebuildInvariant::ExactSequence;
      break;
    case K::AhOnly:
      k.rebuildInvariant = RebuildInvariant::Multiset;
      break;
    case K::ChOnly:
      k.rebuildInvariant = RebuildInvariant::DistanceSequence;
      break;
    default:
      k.rebuildInvariant = RebuildInvariant::MultisetAndGroups;
  }

  const int n = kernel.n;
  switch (kernel.kind) {
    case K::StableNext:
    case K::RejectRepeats:
      k.counterIdentity = [](const FtbReport& r, const OracleResult& o) {
        return expectEqual("traces", r.stats.traces, o.hitCount() + 1, r.stats);
      };
      break;
    case K::WhileWhile:
      k.counterIdentity = [](const FtbReport& r, const OracleResult& o) -> std::optional<std::string> {
        if (auto m = expectEqual("traces", r.stats.traces, 2 * o.groupCount() + 1, r.stats)) return m;
        return expectEqual("executor ahCalls", r.stats.ahCalls, o.hitCount(), r.stats);
      };
      break;
    case K::WhileMerged:
      k.counterIdentity = [](const FtbReport& r, const OracleResult& o) {
        return expectEqual("traces", r.stats.traces, o.groupCount() + 1, r.stats);
      };
      break;
    case K::StableMultiHit:
      k.counterIdentity = [n](const FtbReport& r, const OracleResult& o) {
        const std::uint64_t batches = (o.hitCount() + static_cast<std::uint64_t>(n) - 1) / static_cast<std::uint64_t>(n);
        return expectEqual("traces", r.stats.traces, batches + 1, r.stats);
      };
      break;
    case K::AhOnly:
      k.counterIdentity = [](const FtbReport& r, const OracleResult&) {
        return expectEqual("traces", r.stats.traces, 1, r.stats);
      };
      break;
    case K::ChOnly:
      k.counterIdentity = [](const FtbReport& r, const OracleResult&) {
        return expectEqual("traces", r.stats.traces, r.hits.size() + 1, r.stats);
      };
      break;
  }
  return k;
}

ValidationReport validateKernel(const KernelUnderTest& kernel, const BuiltScene& scene, std::span<const Ray> rays,
                                unsigned threads, const UserCodeFactory& userCodeFor) {
  std::vector<RayOutcome> outcomes(rays.size());
  parallelFor(rays.size(), threads, [&](std::size_t i) {
    if (userCodeFor) {
      const UserCode code = userCodeFor(i);
      outcomes[i] = checkRay(kernel, scene, rays[i], &code);
    } else {
      outcomes[i] = checkRay(kernel, scene, rays[i], nullptr);
    }
  });

  ValidationReport report;
  report.kernel = kernel.name;
  report.raysChecked = rays.size();
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    auto& o = outcomes[i];
    report.totals += o.stats;
    report.oracleHits += o.oracleHits;
    report.oracleGroups += o.oracleGroups;
    bool any = false;
    for (std::size_t c = 0; c < kAllChecks.size(); ++c) {
      if (o.failed[c]) {
        ++report.violations[c];
        any = true;
      }
    }
    if (!any) continue;
    ++report.raysFailed;
    if (!report.firstFailure)
      report.firstFailure = RayFailure{i, std::move(o.problems), std::move(o.expected), std::move(o.actual)};
  }
  return report;
}

ValidationReport validateKernel(const KernelId& kernel, const BuiltScene& scene, std::span<const Ray> rays,
                                unsigned threads, const UserCodeFactory& userCodeFor) {
  return validateKernel(kernelUnderTest(kernel), scene, rays, threads, userCodeFor);
}

nlohmann::json ValidationReport::toJson() const {
  nlohmann::json j;
  j["kernel"] = kernel;
  j["raysChecked"] = raysChecked;
  j["raysFailed"] = raysFailed;
  j["ok"] = ok();
  nlohmann::json v = nlohmann::json::object();
  for (auto c : kAllChecks) v[checkName(c)] = count(c);
  j["violations"] = v;
  j["oracleHits"] = oracleHits;
  j["oracleGroups"] = oracleGroups;
  j["stats"] = {{"traces", totals.traces},       {"nodesVisited", totals.nodesVisited},
                {"triTests", totals.triTests},   {"ahCalls", totals.ahCalls},
                {"chCalls", totals.chCalls},     {"missCalls", totals.missCalls},
                {"userCodeCalls", totals.userCodeCalls}};
  if (firstFailure) {
    j["firstFailure"] = {{"ray", firstFailure->rayIndex},
                         {"problems", firstFailure->problems},
                         {"expected", hitsToJson(firstFailure->expected)},
                         {"actual", hitsToJson(firstFailure->actual)}};
  }
  return j;
}

std::string ValidationReport::toText() const {
  std::ostringstream os;
  os << kernel << ": " << (ok() ? "OK" : "FAIL") << " (" << raysChecked << " rays, " << raysFailed << " failing)";
  for (auto c : kAllChecks)
    if (count(c)) os << " " << checkName(c) << "=" << count(c);
  os << "\n";
  if (firstFailure) {
    os << "  first failing ray " << firstFailure->rayIndex << ":\n";
    for (const auto& p : firstFailure->problems) os << "    " << p << "\n";
  }
  return os.str();
}

StabilityReport checkRebuildStability(const KernelUnderTest& kernel, const Scene& scene, std::span<const Ray> rays,
                                      std::span<const std::uint64_t> seeds, int leafSize, unsigned threads) {
  StabilityReport report;
  report.kernel = kernel.name;
  report.seeds.assign(seeds.begin(), seeds.end());
  report.invariant = kernel.rebuildInvariant;
  report.raysChecked = rays.size();

  const BuiltScene reference(scene, BuildOptions{leafSize, PrimOrder::AsGiven, 0});
  std::vector<std::vector<HitDesc>> refHits(rays.size());
  parallelFor(rays.size(), threads, [&](std::size_t i) { refHits[i] = kernel.run(reference, rays[i], countAll).hits; });

  for (auto seed : seeds) {
    const BuiltScene rebuilt(scene, BuildOptions::permuted(seed, leafSize));
    std::vector<std::vector<HitDesc>> hits(rays.size());
    parallelFor(rays.size(), threads, [&](std::size_t i) { hits[i] = kernel.run(rebuilt, rays[i], countAll).hits; });
    for (std::size_t i = 0; i < rays.size(); ++i) {
      if (rebuildEquivalent(report.invariant, refHits[i], hits[i])) continue;
      ++report.mismatches;
      if (!report.firstMismatch) report.firstMismatch = StabilityReport::Mismatch{i, seed, refHits[i], hits[i]};
    }
  }
  return report;
}

StabilityReport checkRebuildStability(const KernelId& kernel, const Scene& scene, std::span<const Ray> rays,
                                      std::span<const std::uint64_t> seeds, int leafSize, unsigned threads) {
  return checkRebuildStability(kernelUnderTest(kernel), scene, rays, seeds, leafSize, threads);
}

nlohmann::json StabilityReport::toJson() const {
  nlohmann::json j;
  j["kernel"] = kernel;
  j["seeds"] = seeds;
  j["invariant"] = invariantName(invariant);
  j["raysChecked"] = raysChecked;
  j["mismatches"] = mismatches;
  j["ok"] = ok();
  if (firstMismatch) {
    j["firstMismatch"] = {{"ray", firstMismatch->rayIndex},
                          {"seed", firstMismatch->seed},
                          {"reference", hitsToJson(firstMismatch->reference)},
                          {"rebuilt", hitsToJson(firstMismatch->rebuilt)}};
  }
  return j;
}

}  // namespace ftb
