// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>
#include <string>
#include <vector>

#include "ftb/float_interval.hpp"
#include "ftb/kernels.hpp"
#include "ftb/oracle.hpp"
#include "ftb/pipeline.hpp"
#include "ftb/render.hpp"
#include "support.hpp"

using namespace ftb;

namespace {

constexpr std::size_t kRaysPerScene = 1024;

struct GridScene {
  std::string name;
  Scene scene;
  std::vector<Ray> rays;
};

const std::vector<GridScene>& grid() {
  static const std::vector<GridScene> scenes = [] {
    std::vector<GridScene> s;
    auto add = [&](std::string name, Scene scene, std::uint64_t seed) {
      auto rays = test::sceneRays(scene, kRaysPerScene, seed);
      s.push_back({std::move(name), std::move(scene), std::move(rays)});
    };
    add("coplanarStack(8,true)", genCoplanarStack(8, true), 101);
    add("coplanarStack(8,false)", genCoplanarStack(8, false), 102);
    add("abuttingBoxes(5)", genAbuttingBoxes(5), 103);
    add("instancedGrid(3)", genInstancedGrid(3), 104);
    return s;
  }();
  return scenes;
}

// Validation of every correct kernel on every grid scene, computed once.
const std::map<std::pair<std::string, std::string>, ValidationReport>& gridReports() {
  static const auto reports = [] {
    std::map<std::pair<std::string, std::string>, ValidationReport> out;
    for (const auto& g : grid()) {
      const BuiltScene built(g.scene);
      for (const auto& k : correctKernels()) out[{g.name, k.name()}] = validateKernel(k, built, g.rays, 0);
    }
    return out;
  }();
  return reports;
}

int failures = 0;

void report(int id, const std::string& title, bool pass, const std::string& detail) {
  std::cout << (pass ? "PASS" : "FAIL") << " criterion " << id << ": " << title << " -- " << detail << std::endl;
  if (!pass) ++failures;
}

int runCli(const std::string& args) {
  const std::string cmd = std::string("\"") + FTB_CLI_PATH + "\" " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

void criterion1() {
  const auto start = std::chrono::steady_clock::now();
  std::size_t bad = 0, rays = 0;
  std::string firstBad;
  for (const auto& [key, rep] : gridReports()) {
    rays += rep.raysChecked;
    const std::size_t v = rep.count(Check::Completeness) + rep.count(Check::Duplicate) + rep.count(Check::Order);
    if (v && firstBad.empty()) firstBad = key.second + " on " + key.first;
    bad += v;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ostringstream d;
  d << correctKernels().size() << " kernels x " << grid().size() << " scenes, " << rays << " kernel-rays, " << bad
    << " violations, " << secs << " s";
  if (!firstBad.empty()) d << ", first: " << firstBad;
  report(1, "oracle equivalence (completeness + order)", bad == 0 && secs < 60.0, d.str());
}

void criterion2() {
  const std::vector<std::uint64_t> seeds{11, 12, 13};
  std::size_t exactFailures = 0, rebuildMismatches = 0, kernels = 0;
  for (const auto& k : correctKernels()) {
    if (!k.isStable()) continue;
    ++kernels;
    for (const auto& g : grid()) {
      exactFailures += gridReports().at({g.name, k.name()}).count(Check::StableOrder);
      rebuildMismatches += checkRebuildStability(k, g.scene, g.rays, seeds, 4, 0).mismatches;
    }
  }
  std::ostringstream d;
  d << kernels << " stable kernels, " << exactFailures << " rays differing from sorted oracle, " << rebuildMismatches
    << " mismatches across 3 permuted rebuilds";
  report(2, "stable-order exactness", kernels == 4 && exactFailures == 0 && rebuildMismatches == 0, d.str());
}

void criterion3() {
  // ch-only: exactly one hit per distance group.
  const Scene stack = genCoplanarStack(8, true);
  const BuiltScene stackBuilt(stack);
  std::size_t chBad = 0, groupsSeen = 0;
  for (const Ray& r : test::sceneRays(stack, kRaysPerScene, 101)) {
    const auto oracle = oracleAllHits(stack, r);
    const auto rep = runChOnly(stackBuilt, r, test::countAllCode());
    std::vector<float> expected;
    for (std::size_t i = 0, g = 0; g < oracle.groupSizes.size(); i += oracle.groupSizes[g++])
      expected.push_back(oracle.hits[i].t);
    std::vector<float> got;
    for (const auto& h : rep.hits) got.push_back(h.t);
    if (got != expected) ++chBad;
    groupsSeen += expected.size();
  }

  // ah-only: full multiset but descending on the adversarial probe.
  const Scene adv = genAdversarialOrder();
  const auto advRep = runAhOnly(BuiltScene(adv), adversarialProbeRay(), test::countAllCode());
  const bool advMultiset = sortHits(advRep.hits) == oracleAllHits(adv, adversarialProbeRay()).hits;
  bool advOutOfOrder = false;
  for (std::size_t i = 1; i < advRep.hits.size(); ++i) advOutOfOrder |= advRep.hits[i].t < advRep.hits[i - 1].t;

  // validate exits nonzero, flagging only the violated property.
  const auto dir = std::filesystem::temp_directory_path() / "ftb_acceptance";
  std::filesystem::create_directories(dir);
  auto onlyViolation = [&](const std::string& args, const std::string& expected) {
    const auto path = dir / "report.json";
    const int code = runCli("validate " + args + " --seeds 1,2 --out " + path.string());
    const auto j = nlohmann::json::parse(slurp(path));
    bool ok = code == 1;
    for (const auto& [name, count] : j["kernels"][0]["violations"].items())
      ok = ok && ((name == expected) == (count.get<std::size_t>() > 0));
    return ok;
  };
  const bool chCli = onlyViolation("--gen coplanar:n=8,same=1 --size 32x32 --kernels ch-only", "completeness");
  const bool ahCli = onlyViolation("--gen adversarial --size 32x32 --kernels ah-only", "order");

  std::ostringstream d;
  d << "ch-only rays not one-per-group: " << chBad << " (of " << groupsSeen << " groups); ah-only multiset "
    << (advMultiset ? "complete" : "INCOMPLETE") << ", " << (advOutOfOrder ? "out of order" : "IN ORDER")
    << "; validate ch-only " << (chCli ? "completeness only" : "WRONG") << ", ah-only "
    << (ahCli ? "order only" : "WRONG");
  report(3, "incorrect-baseline characterization", chBad == 0 && groupsSeen > 0 && advMultiset && advOutOfOrder &&
                                                       chCli && ahCli,
         d.str());
}

void criterion4() {
  std::size_t counterViolations = 0;
  for (const auto& [key, rep] : gridReports()) counterViolations += rep.count(Check::Counters);

  // while-merged calls at least as many AH programs as the while-while executor, per ray.
  std::size_t perRayBad = 0;
  std::uint64_t wwSpread = 0, wmSpread = 0;
  const KernelId ww = KernelId::parse("while-while"), wm = KernelId::parse("while-merged");
  for (const auto& g : grid()) {
    const BuiltScene built(g.scene);
    for (const Ray& r : g.rays) {
      const auto a = runKernel(ww, built, r, test::countAllCode()).stats.ahCalls;
      const auto b = runKernel(wm, built, r, test::countAllCode()).stats.ahCalls;
      if (b < a) ++perRayBad;
    }
    if (g.name == "coplanarStack(8,false)") {
      wwSpread = gridReports().at({g.name, ww.name()}).totals.ahCalls;
      wmSpread = gridReports().at({g.name, wm.name()}).totals.ahCalls;
    }
  }
  std::ostringstream d;
  d << counterViolations << " identity violations; rays with merged < executor AH calls: " << perRayBad
    << "; coplanarStack(8,false) AH calls while-merged " << wmSpread << " vs while-while " << wwSpread;
  report(4, "counter identities at exhaustion", counterViolations == 0 && perRayBad == 0 && wmSpread > wwSpread,
         d.str());
}

void criterion5() {
  auto key = [](float f) {
    const std::uint32_t u = floatBits(f);
    return (u & 0x80000000u) ? ~u : (u | 0x80000000u);
  };
  test::Rng rng(2025);
  std::size_t bad = 0, samples = 0;
  while (samples < 1'000'000) {
    const float f = bitsToFloat(static_cast<std::uint32_t>(rng.next()));
    if (!std::isfinite(f) || f == 0.0f || std::fabs(f) == std::numeric_limits<float>::max()) continue;
    ++samples;
    const float up = justAbove(f), down = justBelow(f);
    if (justBelow(up) != f || justAbove(down) != f) ++bad;
    if (!(down < f && f < up)) ++bad;
    if (key(up) != key(f) + 1 || key(down) != key(f) - 1) ++bad;  // emptiness
    if (f > 0.0f) {
      // Executor interval (justBelow(t), justAbove(t)) holds exactly one float.
      if (key(up) - key(down) != 2) ++bad;
    }
  }
  // Boundary cases.
  const float tiny = std::numeric_limits<float>::denorm_min();
  if (justAbove(0.0f) != tiny || justAbove(-0.0f) != tiny || justBelow(0.0f) != -tiny) ++bad;
  if (justAbove(1.0f) != 1.0f + 0x1p-23f || justBelow(1.0f) != 1.0f - 0x1p-24f) ++bad;
  if (floatBits(justBelow(std::numeric_limits<float>::min())) != 0x007fffffu) ++bad;
  for (float f : {std::numeric_limits<float>::max(), std::numeric_limits<float>::infinity(),
                  std::numeric_limits<float>::quiet_NaN()}) {
    try {
      justAbove(f);
      ++bad;
    } catch (const std::domain_error&) {
    }
  }
  report(5, "float-interval properties", bad == 0,
         std::to_string(samples) + " random finite samples + boundary cases, " + std::to_string(bad) + " failures");
}

void criterion6() {
  struct Prd {
    std::vector<float> seen;
    std::optional<float> closest;
  };
  auto traceAll = [](const BuiltScene& scene, const Ray& r, std::function<AhVerdict(const HitContext&)> verdict,
                     Prd& prd, TraceStats& stats) {
    TraceConfig<Prd> cfg;
    cfg.anyHit = [&](const HitContext& ctx, Prd& p) {
      p.seen.push_back(ctx.t);
      return verdict(ctx);
    };
    cfg.closestHit = [](const HitContext& ctx, Prd& p) { p.closest = ctx.t; };
    trace(scene, r, cfg, prd, stats);
  };

  // Exclusive interval: a hit exactly at tMin is rejected.
  Mesh m;
  m.vertices = {{-1, -1, 5}, {2, -1, 5}, {-1, 2, 5}};
  m.indices = {{0, 1, 2}};
  const BuiltScene one(sceneFromMesh(m));
  bool exclusive = true;
  {
    Prd prd;
    TraceStats stats;
    traceAll(one, {{0, 0, 0}, {0, 0, 1}, 5.0f, 10.0f}, [](const HitContext&) { return AhVerdict::Accept; }, prd, stats);
    exclusive = prd.seen.empty() && !prd.closest && stats.missCalls == 1;
    Prd inside;
    traceAll(one, {{0, 0, 0}, {0, 0, 1}, justBelow(5.0f), 10.0f}, [](const HitContext&) { return AhVerdict::Accept; },
             inside, stats);
    exclusive = exclusive && inside.closest == 5.0f;
  }

  bool shrink = true, lemmaBelow = true, lemmaAt = true, terminate = true;
  std::size_t lemmaCases = 0;
  for (const auto& g : grid()) {
    const BuiltScene built(g.scene);
    for (std::size_t i = 0; i < g.rays.size(); i += 4) {
      const Ray& r = g.rays[i];
      const auto oracle = oracleAllHits(g.scene, r);
      // Accepting every candidate: committed distances strictly decrease.
      {
        Prd prd;
        TraceStats stats;
        traceAll(built, r, [](const HitContext&) { return AhVerdict::Accept; }, prd, stats);
        for (std::size_t k = 1; k < prd.seen.size(); ++k) shrink = shrink && prd.seen[k] < prd.seen[k - 1];
        if (!oracle.hits.empty()) shrink = shrink && prd.closest == oracle.hits[0].t;
      }
      for (std::size_t first = 0, grp = 0; grp < oracle.groupSizes.size(); first += oracle.groupSizes[grp++]) {
        const float tFound = oracle.hits[first].t;
        ++lemmaCases;
        Ray follow = r;
        follow.tMin = justBelow(tFound);
        Prd below;
        TraceStats stats;
        traceAll(built, follow, [](const HitContext&) { return AhVerdict::Ignore; }, below, stats);
        std::size_t atFound = 0;
        for (float t : below.seen) {
          lemmaBelow = lemmaBelow && t >= tFound;
          atFound += t == tFound;
        }
        lemmaBelow = lemmaBelow && atFound == oracle.groupSizes[grp];
        follow.tMin = tFound;
        Prd at;
        traceAll(built, follow, [](const HitContext&) { return AhVerdict::Ignore; }, at, stats);
        for (float t : at.seen) lemmaAt = lemmaAt && t > tFound;
      }
      // Terminate on the first candidate: no further AH calls at all.
      if (!oracle.hits.empty()) {
        Prd prd;
        TraceStats stats;
        traceAll(built, r, [](const HitContext&) { return AhVerdict::TerminateAccept; }, prd, stats);
        terminate = terminate && prd.seen.size() == 1 && stats.ahCalls == 1 && prd.closest == prd.seen[0];
      }
    }
  }
  std::ostringstream d;
  d << "exclusive " << exclusive << ", strict shrink " << shrink << ", justBelow re-find " << lemmaBelow
    << ", tMin=tFound excludes " << lemmaAt << " (" << lemmaCases << " groups), terminate " << terminate;
  report(6, "pipeline semantics", exclusive && shrink && lemmaBelow && lemmaAt && terminate && lemmaCases > 0,
         d.str());
}

void criterion7() {
  const Scene s = genCoplanarStack(6, true);
  const BuiltScene built(s);
  const auto oracle = oracleAllHits(s, coplanarStackProbeRay());
  StableMultiHitCursor cursor(built, coplanarStackProbeRay(), 4);
  const auto a = cursor.nextBatch(), b = cursor.nextBatch(), c = cursor.nextBatch();
  std::vector<HitDesc> all = a;
  all.insert(all.end(), b.begin(), b.end());
  const bool pass = oracle.groupSizes == std::vector<std::size_t>{6} && a.size() == 4 && b.size() == 2 &&
                    c.empty() && all == oracle.hits;
  report(7, "multi-hit tie-boundary resume", pass,
         "batches " + std::to_string(a.size()) + " + " + std::to_string(b.size()) + " + " + std::to_string(c.size()) +
             " of one 6-hit tie group, " + (all == oracle.hits ? "exact oracle sequence" : "MISMATCH"));
}

void criterion8() {
  const auto dir = std::filesystem::temp_directory_path() / "ftb_acceptance";
  std::filesystem::create_directories(dir);
  const unsigned many = std::max(4u, std::thread::hardware_concurrency());
  std::vector<std::string> images, csvs, reports;
  bool exitOk = true;
  for (unsigned threads : {1u, 1u, many, many}) {
    const std::string tag = std::to_string(images.size());
    const auto ppm = dir / ("r" + tag + ".ppm"), csv = dir / ("r" + tag + ".csv"), json = dir / ("v" + tag + ".json");
    exitOk = exitOk && runCli("render --gen grid:m=3 --kernel reject-repeats --user-code probdepth:4:7 --size 64x48 "
                              "--prim-order permuted:5 --threads " +
                              std::to_string(threads) + " --out " + ppm.string() + " --stats " + csv.string()) == 0;
    exitOk = exitOk && runCli("validate --gen boxes:k=5 --user-code probdepth:4:9 --size 32x32 --seeds 1,2,3 "
                              "--threads " +
                              std::to_string(threads) + " --out " + json.string()) == 0;
    images.push_back(slurp(ppm));
    csvs.push_back(slurp(csv));
    reports.push_back(slurp(json));
  }
  bool same = !images[0].empty() && !reports[0].empty();
  for (std::size_t i = 1; i < images.size(); ++i)
    same = same && images[i] == images[0] && csvs[i] == csvs[0] && reports[i] == reports[0];
  report(8, "end-to-end determinism", exitOk && same,
         "render + validate, 2 runs each at 1 and " + std::to_string(many) + " threads: " +
             (same ? "bitwise identical" : "DIFFERENT") + (exitOk ? "" : ", unexpected exit status"));
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> criteria{criterion1, criterion2, criterion3, criterion4,
                                                   criterion5, criterion6, criterion7, criterion8};
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    try {
      criteria[i]();
    } catch (const std::exception& e) {
      report(static_cast<int>(i + 1), "exception", false, e.what());
    }
  }
  return failures == 0 ? 0 : 1;
}
