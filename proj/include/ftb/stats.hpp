#pragma once

#include <cstdint>

namespace ftb {

/// Per-trace (or aggregated) work counters. They stand in for GPU timings: every
/// quantity the hardware would spend time on is counted here.
struct TraceStats {
  std::uint64_t traces = 0;
  std::uint64_t nodesVisited = 0;
  std::uint64_t triTests = 0;
  std::uint64_t ahCalls = 0;
  std::uint64_t chCalls = 0;
  std::uint64_t missCalls = 0;
  std::uint64_t userCodeCalls = 0;

  TraceStats& operator+=(const TraceStats& o) {
    traces += o.traces;
    nodesVisited += o.nodesVisited;
    triTests += o.triTests;
    ahCalls += o.ahCalls;
    chCalls += o.chCalls;
    missCalls += o.missCalls;
    userCodeCalls += o.userCodeCalls;
    return *this;
  }
  friend bool operator==(const TraceStats&, const TraceStats&) = default;
};

}  // namespace ftb
