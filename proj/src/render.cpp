#include "ftb/render.hpp"

#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "ftb/float_interval.hpp"
#include "ftb/parallel.hpp"

namespace ftb {

namespace {

int parsePositive(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty() || v < 1) throw std::invalid_argument(what + ": expected a positive integer, got '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) parts.push_back(cur);
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

}  // namespace

UserCodeSpec UserCodeSpec::maxDepth(int n) {
  if (n < 1) throw std::invalid_argument("maxdepth: n must be >= 1");
  return {Kind::MaxDepth, n, 0};
}

UserCodeSpec UserCodeSpec::probDepth(int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("probdepth: n must be >= 1");
  return {Kind::ProbDepth, n, seed};
}

UserCodeSpec UserCodeSpec::parse(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() == 1 && parts[0] == "countall") return countAll();
  if (parts.size() == 2 && parts[0] == "maxdepth") return maxDepth(parsePositive(parts[1], "maxdepth"));
  if (parts.size() == 3 && parts[0] == "probdepth") {
    std::size_t used = 0;
    std::uint64_t seed = 0;
    try {
      seed = std::stoull(parts[2], &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (parts[2].empty() || used != parts[2].size()) throw std::invalid_argument("probdepth: bad seed '" + parts[2] + "'");
    return probDepth(parsePositive(parts[1], "probdepth"), seed);
  }
  throw std::invalid_argument("unknown user code '" + text + "' (countall | maxdepth:N | probdepth:N:SEED)");
}

std::string UserCodeSpec::name() const {
  switch (kind) {
    case Kind::CountAll: return "countall";
    case Kind::MaxDepth: return "maxdepth:" + std::to_string(n);
    case Kind::ProbDepth: return "probdepth:" + std::to_string(n) + ":" + std::to_string(seed);
  }
  return "?";
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t hashCombine(std::uint64_t seed, std::uint64_t value) { return mix64(seed ^ mix64(value)); }

UserCode UserCodeSpec::make(int x, int y) const {
  auto delivered = std::make_shared<int>(0);
  switch (kind) {
    case Kind::CountAll:
      return [](const HitDesc&, const HitContext*) { return UserAction::Continue; };
    case Kind::MaxDepth:
      return [delivered, n = n](const HitDesc&, const HitContext*) {
        return ++*delivered >= n ? UserAction::Stop : UserAction::Continue;
      };
    case Kind::ProbDepth: {
      const std::uint64_t key =
          hashCombine(hashCombine(seed, static_cast<std::uint64_t>(x)), static_cast<std::uint64_t>(y));
      return [delivered, key, n = n](const HitDesc&, const HitContext*) {
        const std::uint64_t r = hashCombine(key, static_cast<std::uint64_t>((*delivered)++));
        return r % static_cast<std::uint64_t>(n) == 0 ? UserAction::Stop : UserAction::Continue;
      };
    }
  }
  throw std::logic_error("UserCodeSpec::make");
}

Shade parseShade(const std::string& text) {
  if (text == "count") return Shade::Count;
  if (text == "lasthit") return Shade::LastHit;
  throw std::invalid_argument("unknown shade '" + text + "' (count | lasthit)");
}

std::string encodePpm(const Image& image) {
  std::string out = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(image.rgb.data()), image.rgb.size());
  return out;
}

void writePpm(const std::string& path, const Image& image) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  const std::string bytes = encodePpm(image);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

std::array<std::uint8_t, 3> pseudoColor(std::uint32_t count, const std::optional<HitDesc>& lastHit, Shade shade) {
  if (count == 0) return {0, 0, 0};
  std::uint64_t h = mix64(count);
  if (shade == Shade::LastHit && lastHit) {
    h = hashCombine(h, floatBits(lastHit->t));
    h = hashCombine(h, static_cast<std::uint32_t>(lastHit->inst));
    h = hashCombine(h, static_cast<std::uint32_t>(lastHit->geom));
    h = hashCombine(h, static_cast<std::uint32_t>(lastHit->prim));
  }
  std::array<std::uint8_t, 3> c{static_cast<std::uint8_t>(h), static_cast<std::uint8_t>(h >> 8),
                                static_cast<std::uint8_t>(h >> 16)};
  if (c[0] == 0 && c[1] == 0 && c[2] == 0) c[0] = 1;
  return c;
}

Scene RunConfig::loadScene() const {
  if (scenePath.empty() == generator.empty())
    throw std::invalid_argument("exactly one scene source (file or generator) is required");
  return scenePath.empty() ? generateScene(generator) : loadSceneFile(scenePath);
}

Camera RunConfig::resolveCamera(const Scene& scene) const {
  Camera cam = camera ? *camera : scene.camera.value_or(Camera{});
  if (size) {
    cam.width = size->first;
    cam.height = size->second;
  }
  if (cam.width < 1 || cam.height < 1) throw std::invalid_argument("image size must be at least 1x1");
  return cam;
}

std::vector<Ray> cameraRays(const Camera& camera) {
  std::vector<Ray> rays;
  rays.reserve(static_cast<std::size_t>(camera.width) * static_cast<std::size_t>(camera.height));
  for (int y = 0; y < camera.height; ++y)
    for (int x = 0; x < camera.width; ++x) rays.push_back(camera.generateRay(x, y));
  return rays;
}

RenderResult renderDepthImage(const BuiltScene& scene, const Camera& camera, const KernelId& kernel,
                              const UserCodeSpec& userCode, Shade shade, unsigned threads) {
  const std::size_t w = static_cast<std::size_t>(camera.width);
  const std::size_t pixels = w * static_cast<std::size_t>(camera.height);
  std::vector<FtbReport> reports(pixels);
  parallelFor(pixels, threads, [&](std::size_t i) {
    const int x = static_cast<int>(i % w), y = static_cast<int>(i / w);
    reports[i] = runKernel(kernel, scene, camera.generateRay(x, y), userCode.make(x, y));
  });

  RenderResult out;
  out.image.width = camera.width;
  out.image.height = camera.height;
  out.image.rgb.resize(pixels * 3);
  out.counts.resize(pixels);
  for (std::size_t i = 0; i < pixels; ++i) {
    const auto& r = reports[i];
    out.counts[i] = static_cast<std::uint32_t>(r.hits.size());
    std::optional<HitDesc> last;
    if (!r.hits.empty()) last = r.hits.back();
    const auto c = pseudoColor(out.counts[i], last, shade);
    std::memcpy(&out.image.rgb[i * 3], c.data(), 3);
    out.stats += r.stats;
  }
  return out;
}

RenderResult renderDepthImage(const RunConfig& cfg) {
  const Scene scene = cfg.loadScene();
  const BuiltScene built(scene, cfg.build);
  return renderDepthImage(built, cfg.resolveCamera(scene), cfg.kernel, cfg.userCode, cfg.shade, cfg.threads);
}

std::string statsCsvHeader() { return "kernel,traces,ahCalls,chCalls,userCodeCalls,nodesVisited,triTests\n"; }

std::string statsCsvRow(const std::string& kernel, const TraceStats& s) {
  std::ostringstream os;
  os << kernel << ',' << s.traces << ',' << s.ahCalls << ',' << s.chCalls << ',' << s.userCodeCalls << ','
     << s.nodesVisited << ',' << s.triTests << '\n';
  return os.str();
}

std::string CompareReport::csv() const {
  std::string out = statsCsvHeader();
  for (const auto& e : entries) out += statsCsvRow(e.kernel, e.stats);
  return out;
}

std::size_t CompareReport::maxDifferingPixels() const {
  std::size_t m = 0;
  for (const auto& e : entries) m = std::max(m, e.differingPixels);
  return m;
}

CompareReport compareKernels(const RunConfig& cfg, std::span<const KernelId> kernels) {
  const Scene scene = cfg.loadScene();
  const BuiltScene built(scene, cfg.build);
  const Camera cam = cfg.resolveCamera(scene);
  CompareReport report;
  Image reference;
  for (std::size_t k = 0; k < kernels.size(); ++k) {
    RenderResult r = renderDepthImage(built, cam, kernels[k], cfg.userCode, cfg.shade, cfg.threads);
    CompareReport::Entry e{kernels[k].name(), r.stats, 0};
    if (k == 0) {
      reference = std::move(r.image);
    } else {
      for (std::size_t p = 0; p < reference.rgb.size(); p += 3)
        if (std::memcmp(&reference.rgb[p], &r.image.rgb[p], 3) != 0) ++e.differingPixels;
    }
    report.entries.push_back(std::move(e));
  }
  return report;
}

ValidationRun runValidation(const RunConfig& cfg, std::span<const KernelUnderTest> kernels,
                            std::span<const std::uint64_t> seeds) {
  const Scene scene = cfg.loadScene();
  const BuiltScene built(scene, cfg.build);
  const Camera cam = cfg.resolveCamera(scene);
  const std::vector<Ray> rays = cameraRays(cam);
  const std::size_t w = static_cast<std::size_t>(cam.width);

  UserCodeFactory userCodeFor;
  if (cfg.userCode.kind != UserCodeSpec::Kind::CountAll) {
    userCodeFor = [&](std::size_t i) {
      return cfg.userCode.make(static_cast<int>(i % w), static_cast<int>(i / w));
    };
  }

  ValidationRun run;
  run.report["scene"] = cfg.scenePath.empty() ? cfg.generator : cfg.scenePath;
  run.report["width"] = cam.width;
  run.report["height"] = cam.height;
  run.report["userCode"] = cfg.userCode.name();
  run.report["seeds"] = std::vector<std::uint64_t>(seeds.begin(), seeds.end());
  auto list = nlohmann::json::array();
  for (const auto& kernel : kernels) {
    const ValidationReport v = validateKernel(kernel, built, rays, cfg.threads, userCodeFor);
    nlohmann::json j = v.toJson();
    if (v.firstFailure)
      j["firstFailure"]["pixel"] = {{"x", v.firstFailure->rayIndex % w}, {"y", v.firstFailure->rayIndex / w}};
    bool ok = v.ok();
    if (!seeds.empty()) {
      const StabilityReport s = checkRebuildStability(kernel, scene, rays, seeds, cfg.build.leafSize, cfg.threads);
      j["rebuild"] = s.toJson();
      ok = ok && s.ok();
    }
    j["ok"] = ok;
    run.ok = run.ok && ok;
    list.push_back(std::move(j));
  }
  run.report["kernels"] = std::move(list);
  run.report["ok"] = run.ok;
  return run;
}

ValidationRun runValidation(const RunConfig& cfg, std::span<const KernelId> kernels,
                            std::span<const std::uint64_t> seeds) {
  std::vector<KernelUnderTest> wrapped;
  for (const auto& k : kernels) wrapped.push_back(kernelUnderTest(k));
  return runValidation(cfg, wrapped, seeds);
}

}  // namespace ftb
