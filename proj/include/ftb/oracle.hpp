#pragma once

// Brute-force ground truth and differential validation of FTB kernels.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ftb/bvh.hpp"
#include "ftb/hit_order.hpp"
#include "ftb/kernels.hpp"
#include "ftb/scene.hpp"
#include "json.hpp"

namespace ftb {

/// Every hit along a ray, sorted by `less`, partitioned into equal-t groups.
struct OracleResult {
  std::vector<HitDesc> hits;
  std::vector<std::size_t> groupSizes;  // contiguous runs of equal t, in order

  std::size_t hitCount() const { return hits.size(); }
  std::size_t groupCount() const { return groupSizes.size(); }
  friend bool operator==(const OracleResult&, const OracleResult&) = default;
};

/// Tests every triangle of every instance (no BVH, no pipeline) with the same
/// intersector and ray transform the traversal uses, so distances agree exactly.
OracleResult oracleAllHits(const Scene& scene, const Ray& ray);

/// Sizes of the maximal runs of equal t in a hit sequence.
std::vector<std::size_t> distanceGroups(std::span<const HitDesc> hits);

enum class Check { Completeness, Duplicate, Order, StableOrder, Counters, EarlyStop };
inline constexpr std::array kAllChecks{Check::Completeness, Check::Duplicate, Check::Order,
                                       Check::StableOrder,  Check::Counters,  Check::EarlyStop};
std::string checkName(Check c);

/// What must survive a permuted BVH rebuild.
enum class RebuildInvariant {
  ExactSequence,       // stable kernels
  MultisetAndGroups,   // correct but order-within-group may change
  Multiset,            // complete but unordered (ah-only)
  DistanceSequence,    // one hit per distance, identity may change (ch-only)
};

/// A kernel as seen by the validator. Fixtures can wrap arbitrary (even broken) kernels.
struct KernelUnderTest {
  std::string name;
  std::function<FtbReport(const BuiltScene&, const Ray&, const UserCode&)> run;
  bool stable = false;  // expect exact sortHits(oracle) sequences
  RebuildInvariant rebuildInvariant = RebuildInvariant::MultisetAndGroups;
  /// Exhaustion counter identity; returns a description of the mismatch, if any.
  std::function<std::optional<std::string>(const FtbReport&, const OracleResult&)> counterIdentity;
};

KernelUnderTest kernelUnderTest(const KernelId& kernel);

struct RayFailure {
  std::size_t rayIndex = 0;
  std::vector<std::string> problems;
  std::vector<HitDesc> expected;  // oracle, sorted
  std::vector<HitDesc> actual;    // delivered sequence
};

struct ValidationReport {
  std::string kernel;
  std::size_t raysChecked = 0;
  std::size_t raysFailed = 0;
  std::array<std::size_t, kAllChecks.size()> violations{};
  std::optional<RayFailure> firstFailure;
  TraceStats totals;  // exhaustion runs only
  std::uint64_t oracleHits = 0;
  std::uint64_t oracleGroups = 0;

  std::size_t count(Check c) const { return violations[static_cast<std::size_t>(c)]; }
  bool ok() const { return raysFailed == 0; }
  nlohmann::json toJson() const;
  std::string toText() const;
};

/// Per-ray user code for the extra early-stop run (e.g. seeded probabilistic depth).
using UserCodeFactory = std::function<UserCode(std::size_t rayIndex)>;

/// Runs the kernel to exhaustion on every ray and compares against the oracle:
/// completeness (multiset), duplicates, nondecreasing t, exact stable order for stable
/// kernels, counter identities, and the early-stop prefix property. If `userCodeFor` is
/// set, a further run with that user code must also deliver a prefix of the exhaustion
/// sequence. Rays are processed on `threads` workers; the report does not depend on the
/// thread count.
ValidationReport validateKernel(const KernelUnderTest& kernel, const BuiltScene& scene, std::span<const Ray> rays,
                                unsigned threads = 1, const UserCodeFactory& userCodeFor = {});
ValidationReport validateKernel(const KernelId& kernel, const BuiltScene& scene, std::span<const Ray> rays,
                                unsigned threads = 1, const UserCodeFactory& userCodeFor = {});

struct StabilityReport {
  std::string kernel;
  std::vector<std::uint64_t> seeds;
  RebuildInvariant invariant = RebuildInvariant::ExactSequence;
  std::size_t raysChecked = 0;
  std::size_t mismatches = 0;
  struct Mismatch {
    std::size_t rayIndex;
    std::uint64_t seed;
    std::vector<HitDesc> reference;
    std::vector<HitDesc> rebuilt;
  };
  std::optional<Mismatch> firstMismatch;

  bool ok() const { return mismatches == 0; }
  nlohmann::json toJson() const;
};

/// Compares each permuted-order rebuild against the as-given build under the kernel's
/// RebuildInvariant.
StabilityReport checkRebuildStability(const KernelUnderTest& kernel, const Scene& scene, std::span<const Ray> rays,
                                      std::span<const std::uint64_t> seeds, int leafSize = 4, unsigned threads = 1);
StabilityReport checkRebuildStability(const KernelId& kernel, const Scene& scene, std::span<const Ray> rays,
                                      std::span<const std::uint64_t> seeds, int leafSize = 4, unsigned threads = 1);

nlohmann::json toJson(const HitDesc& hit);

}  // namespace ftb
