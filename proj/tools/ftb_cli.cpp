// ftb: render / compare / validate / bench front-to-back any-hit kernels on the
// emulated ray tracing pipeline.
//
// Exit codes: 0 success, 1 validation failure, 2 usage or I/O error.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ftb/render.hpp"

namespace {

struct Options {
  std::string scene, gen, kernel = "while-while", kernels, userCode = "countall", size, primOrder = "asgiven";
  std::string shade = "count", out, stats, seeds;
  unsigned threads = 0;
  int leafSize = 4;
};

std::vector<std::string> splitList(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::pair<int, int> parseSize(const std::string& s) {
  const auto x = s.find('x');
  if (x == std::string::npos) throw std::invalid_argument("--size expects WxH");
  std::size_t a = 0, b = 0;
  const int w = std::stoi(s.substr(0, x), &a);
  const int h = std::stoi(s.substr(x + 1), &b);
  if (a != x || b != s.size() - x - 1 || w < 1 || h < 1) throw std::invalid_argument("--size expects WxH with W, H >= 1");
  return {w, h};
}

ftb::BuildOptions parsePrimOrder(const std::string& s, int leafSize) {
  if (s == "asgiven") return {leafSize, ftb::PrimOrder::AsGiven, 0};
  const std::string prefix = "permuted:";
  if (s.rfind(prefix, 0) == 0) return ftb::BuildOptions::permuted(std::stoull(s.substr(prefix.size())), leafSize);
  throw std::invalid_argument("--prim-order expects asgiven | permuted:SEED");
}

ftb::RunConfig makeConfig(const Options& o) {
  ftb::RunConfig cfg;
  cfg.scenePath = o.scene;
  cfg.generator = o.gen;
  cfg.kernel = ftb::KernelId::parse(o.kernel);
  cfg.userCode = ftb::UserCodeSpec::parse(o.userCode);
  if (!o.size.empty()) cfg.size = parseSize(o.size);
  cfg.build = parsePrimOrder(o.primOrder, o.leafSize);
  cfg.shade = ftb::parseShade(o.shade);
  cfg.threads = o.threads;
  return cfg;
}

std::vector<ftb::KernelId> kernelList(const Options& o) {
  if (o.kernels.empty()) return ftb::correctKernels();
  std::vector<ftb::KernelId> ks;
  for (const auto& name : splitList(o.kernels)) ks.push_back(ftb::KernelId::parse(name));
  return ks;
}

void writeText(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

int cmdRender(const Options& o) {
  const ftb::RunConfig cfg = makeConfig(o);
  const ftb::RenderResult r = ftb::renderDepthImage(cfg);
  ftb::writePpm(o.out, r.image);
  const std::string csv = ftb::statsCsvHeader() + ftb::statsCsvRow(cfg.kernel.name(), r.stats);
  if (!o.stats.empty()) writeText(o.stats, csv);
  std::cerr << "wrote " << o.out << " (" << r.image.width << "x" << r.image.height << ")\n";
  return 0;
}

int cmdCompare(const Options& o) {
  const ftb::RunConfig cfg = makeConfig(o);
  const auto kernels = kernelList(o);
  const ftb::CompareReport report = ftb::compareKernels(cfg, kernels);
  writeText(o.stats, report.csv());
  for (const auto& e : report.entries)
    std::cerr << e.kernel << ": " << e.differingPixels << " pixels differ from " << report.entries.front().kernel
              << "\n";
  return 0;
}

int cmdValidate(const Options& o) {
  const ftb::RunConfig cfg = makeConfig(o);
  const auto kernels = kernelList(o);
  std::vector<std::uint64_t> seeds;
  for (const auto& s : splitList(o.seeds)) seeds.push_back(std::stoull(s));
  const ftb::ValidationRun run = ftb::runValidation(cfg, kernels, seeds);
  writeText(o.out, run.report.dump(2) + "\n");
  for (const auto& k : run.report["kernels"])
    std::cerr << k["kernel"].get<std::string>() << ": " << (k["ok"].get<bool>() ? "ok" : "FAIL") << "\n";
  return run.ok ? 0 : 1;
}

int cmdBench(const Options& o) {
  ftb::RunConfig cfg = makeConfig(o);
  std::cout << "kernel,ms,traces,userCodeCalls\n";
  for (const auto& k : kernelList(o)) {
    cfg.kernel = k;
    const auto start = std::chrono::steady_clock::now();
    const ftb::RenderResult r = ftb::renderDepthImage(cfg);
    const std::chrono::duration<double, std::milli> ms = std::chrono::steady_clock::now() - start;
    std::cout << k.name() << ',' << ms.count() << ',' << r.stats.traces << ',' << r.stats.userCodeCalls << '\n';
  }
  return 0;
}

void addSceneOptions(CLI::App* cmd, Options& o) {
  auto* scene = cmd->add_option("--scene", o.scene, "OBJ file or JSON scene manifest");
  auto* gen = cmd->add_option("--gen", o.gen, "generator, e.g. coplanar:n=8,same=1 | boxes:k=5 | grid:m=3 | adversarial");
  scene->excludes(gen);
  gen->excludes(scene);
  cmd->add_option("--user-code", o.userCode, "countall | maxdepth:N | probdepth:N:SEED");
  cmd->add_option("--size", o.size, "image size WxH (overrides the scene camera)");
  cmd->add_option("--prim-order", o.primOrder, "asgiven | permuted:SEED");
  cmd->add_option("--leaf-size", o.leafSize, "BVH leaf size")->check(CLI::PositiveNumber);
  cmd->add_option("--threads", o.threads, "worker threads (0 = all cores)");
  cmd->add_option("--shade", o.shade, "count | lasthit");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Front-to-back any-hit kernels on an emulated ray tracing pipeline"};
  app.require_subcommand(1);
  Options o;

  auto* render = app.add_subcommand("render", "render a pseudo-colored hit-count image");
  addSceneOptions(render, o);
  render->add_option("--kernel", o.kernel, "kernel name");
  render->add_option("--out", o.out, "output PPM path")->required();
  render->add_option("--stats", o.stats, "stats CSV path");

  auto* compare = app.add_subcommand("compare", "render several kernels and diff their images");
  addSceneOptions(compare, o);
  compare->add_option("--kernels", o.kernels, "comma-separated kernels (default: all correct kernels)");
  compare->add_option("--stats", o.stats, "stats CSV path (default: stdout)");

  auto* validate = app.add_subcommand("validate", "check kernels against the brute-force oracle");
  addSceneOptions(validate, o);
  validate->add_option("--kernels", o.kernels, "comma-separated kernels (default: all correct kernels)");
  validate->add_option("--seeds", o.seeds, "comma-separated seeds for permuted BVH rebuilds");
  validate->add_option("--out", o.out, "JSON report path (default: stdout)");

  auto* bench = app.add_subcommand("bench", "wall time per kernel (CPU emulator, informational)");
  addSceneOptions(bench, o);
  bench->add_option("--kernels", o.kernels, "comma-separated kernels (default: all correct kernels)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*render) return cmdRender(o);
    if (*compare) return cmdCompare(o);
    if (*validate) return cmdValidate(o);
    if (*bench) return cmdBench(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
