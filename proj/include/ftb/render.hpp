#pragma once

// Test rig: per-pixel kernel runs with mock user code, pseudo-colored count images,
// kernel comparisons and the validation driver behind the CLI.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ftb/bvh.hpp"
#include "ftb/camera.hpp"
#include "ftb/kernels.hpp"
#include "ftb/oracle.hpp"
#include "ftb/scene.hpp"
#include "ftb/stats.hpp"
#include "json.hpp"

namespace ftb {

/// Mock user code invoked once per delivered hit.
struct UserCodeSpec {
  enum class Kind { CountAll, MaxDepth, ProbDepth };
  Kind kind = Kind::CountAll;
  int n = 1;               // MaxDepth: stop after n hits; ProbDepth: stop with chance 1/n per hit
  std::uint64_t seed = 0;  // ProbDepth only

  static UserCodeSpec countAll() { return {}; }
  static UserCodeSpec maxDepth(int n);
  static UserCodeSpec probDepth(int n, std::uint64_t seed);
  /// "countall", "maxdepth:N", "probdepth:N:SEED". Throws std::invalid_argument.
  static UserCodeSpec parse(const std::string& text);
  std::string name() const;

  /// User code for pixel (x, y); ProbDepth draws from a counter-based stream keyed on
  /// (seed, x, y, hit index), so results do not depend on scheduling.
  UserCode make(int x, int y) const;
};

/// Counter-based 64-bit hash used for per-pixel randomness and pseudo-coloring.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t hashCombine(std::uint64_t seed, std::uint64_t value);

enum class Shade {
  Count,    // color from the per-pixel delivered-hit count
  LastHit,  // color from count and the last delivered hit (t bits and ids)
};
Shade parseShade(const std::string& text);

struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // row-major, top row first

  friend bool operator==(const Image&, const Image&) = default;
};

/// Binary PPM (P6). Throws std::runtime_error if the file cannot be written.
void writePpm(const std::string& path, const Image& image);
std::string encodePpm(const Image& image);

/// Black for an empty pixel; otherwise an avalanche-hashed nonblack color.
std::array<std::uint8_t, 3> pseudoColor(std::uint32_t count, const std::optional<HitDesc>& lastHit, Shade shade);

struct RunConfig {
  std::string scenePath;  // OBJ or JSON manifest
  std::string generator;  // e.g. "coplanar:n=8,same=1"
  KernelId kernel;
  UserCodeSpec userCode;
  std::optional<Camera> camera;  // overrides the scene camera
  std::optional<std::pair<int, int>> size;
  BuildOptions build;
  Shade shade = Shade::Count;
  unsigned threads = 0;  // 0 = hardware concurrency

  /// Throws std::invalid_argument unless exactly one scene source is set.
  Scene loadScene() const;
  /// Scene camera (or the default one) with overrides applied.
  Camera resolveCamera(const Scene& scene) const;
};

struct RenderResult {
  Image image;
  std::vector<std::uint32_t> counts;  // delivered hits per pixel
  TraceStats stats;                   // sum over pixels in pixel order
};

RenderResult renderDepthImage(const BuiltScene& scene, const Camera& camera, const KernelId& kernel,
                              const UserCodeSpec& userCode, Shade shade, unsigned threads = 0);
RenderResult renderDepthImage(const RunConfig& cfg);

std::string statsCsvHeader();
std::string statsCsvRow(const std::string& kernel, const TraceStats& stats);

struct CompareReport {
  struct Entry {
    std::string kernel;
    TraceStats stats;
    std::size_t differingPixels = 0;  // against the first kernel
  };
  std::vector<Entry> entries;

  std::string csv() const;
  std::size_t maxDifferingPixels() const;
};

/// Renders each kernel with identical rays and counts pixels differing from the first.
CompareReport compareKernels(const RunConfig& cfg, std::span<const KernelId> kernels);

/// Primary rays of the camera in pixel order.
std::vector<Ray> cameraRays(const Camera& camera);

struct ValidationRun {
  nlohmann::json report;
  bool ok = true;
};

/// Validates each kernel on all primary rays of the configured view, plus rebuild
/// stability for each seed. Failing rays are reported with their pixel coordinates.
ValidationRun runValidation(const RunConfig& cfg, std::span<const KernelUnderTest> kernels,
                            std::span<const std::uint64_t> seeds);
ValidationRun runValidation(const RunConfig& cfg, std::span<const KernelId> kernels,
                            std::span<const std::uint64_t> seeds);

}  // namespace ftb
