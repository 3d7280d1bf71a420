#include "ftb/scene.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "json.hpp"

namespace ftb {

Ray Camera::generateRay(int x, int y) const {
  const Vec3 forward = normalize(lookAt - position);
  const Vec3 right = normalize(cross(up, forward));
  const Vec3 trueUp = cross(forward, right);
  const float tanHalf = std::tan(fovY * std::numbers::pi_v<float> / 360.0f);
  const float aspect = static_cast<float>(width) / static_cast<float>(height);
  const float sx = ((static_cast<float>(x) + 0.5f) / static_cast<float>(width) * 2.0f - 1.0f) * tanHalf * aspect;
  const float sy = (1.0f - (static_cast<float>(y) + 0.5f) / static_cast<float>(height) * 2.0f) * tanHalf;
  Ray ray;
  ray.origin = position;
  ray.direction = (forward + right * sx) + trueUp * sy;
  ray.tMin = 0.0f;
  ray.tMax = 1e30f;
  return ray;
}

void Mesh::validate() const {
  const auto n = vertices.size();
  for (const auto& tri : indices)
    for (auto i : tri)
      if (i >= n) throw std::out_of_range("mesh index " + std::to_string(i) + " >= vertex count " + std::to_string(n));
}

std::uint32_t Scene::addMesh(Mesh mesh) {
  mesh.validate();
  meshes_.push_back(std::move(mesh));
  return static_cast<std::uint32_t>(meshes_.size() - 1);
}

std::uint32_t Scene::addGeometry(std::uint32_t mesh, int sbtOffset) {
  if (mesh >= meshes_.size()) throw std::invalid_argument("addGeometry: unknown mesh");
  if (sbtOffset < 0) throw std::invalid_argument("addGeometry: negative sbtOffset");
  for (const auto& g : geometries_)
    if (g.sbtOffset == sbtOffset) throw std::invalid_argument("addGeometry: duplicate sbtOffset " + std::to_string(sbtOffset));
  geometries_.push_back({mesh, sbtOffset});
  return static_cast<std::uint32_t>(geometries_.size() - 1);
}

int Scene::addInstance(std::vector<std::uint32_t> geometries, const Affine3& objectToWorld) {
  for (auto g : geometries)
    if (g >= geometries_.size()) throw std::invalid_argument("addInstance: unknown geometry");
  Instance inst;
  inst.geometries = std::move(geometries);
  inst.objectToWorld = objectToWorld;
  inst.worldToObject = inverse(objectToWorld);
  inst.instanceIndex = static_cast<int>(instances_.size());
  instances_.push_back(std::move(inst));
  return instances_.back().instanceIndex;
}

std::size_t Scene::triangleCount() const {
  std::size_t n = 0;
  for (const auto& inst : instances_)
    for (auto g : inst.geometries) n += meshOf(geometries_[g]).triangleCount();
  return n;
}

Scene sceneFromMesh(Mesh mesh) {
  Scene scene;
  const auto m = scene.addMesh(std::move(mesh));
  const auto g = scene.addGeometry(m, 0);
  scene.addInstance({g}, Affine3::identity());
  return scene;
}

// ---------------------------------------------------------------------------------------
// OBJ

ObjParseError::ObjParseError(const std::string& path, int line, const std::string& what)
    : std::runtime_error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

namespace {

bool parseFloat(std::string_view s, float& out) {
  // std::from_chars for float is not available in every libstdc++ we target.
  std::string tmp(s);
  char* end = nullptr;
  out = std::strtof(tmp.c_str(), &end);
  return end == tmp.c_str() + tmp.size() && !tmp.empty();
}

bool parseInt(std::string_view s, long& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

}  // namespace

Mesh parseObj(const std::string& text, const std::string& sourceName) {
  Mesh mesh;
  std::istringstream in(text);
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      std::string tok[3];
      Vec3 p;
      if (!(ls >> tok[0] >> tok[1] >> tok[2]) || !parseFloat(tok[0], p.x) || !parseFloat(tok[1], p.y) ||
          !parseFloat(tok[2], p.z))
        throw ObjParseError(sourceName, lineNo, "malformed vertex record");
      if (!isFinite(p)) throw ObjParseError(sourceName, lineNo, "non-finite vertex");
      mesh.vertices.push_back(p);
    } else if (tag == "f") {
      std::vector<std::uint32_t> poly;
      std::string tok;
      while (ls >> tok) {
        const auto slash = tok.find('/');
        long idx = 0;
        if (!parseInt(std::string_view(tok).substr(0, slash), idx) || idx == 0)
          throw ObjParseError(sourceName, lineNo, "malformed face index '" + tok + "'");
        const long n = static_cast<long>(mesh.vertices.size());
        const long resolved = idx > 0 ? idx - 1 : n + idx;
        if (resolved < 0 || resolved >= n)
          throw ObjParseError(sourceName, lineNo, "face index " + std::to_string(idx) + " out of range");
        poly.push_back(static_cast<std::uint32_t>(resolved));
      }
      if (poly.size() < 3) throw ObjParseError(sourceName, lineNo, "face with fewer than 3 vertices");
      for (std::size_t k = 1; k + 1 < poly.size(); ++k) mesh.indices.push_back({poly[0], poly[k], poly[k + 1]});
    }
  }
  return mesh;
}

Mesh loadObj(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open OBJ file: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parseObj(buf.str(), path.string());
}

// ---------------------------------------------------------------------------------------
// Manifest

namespace {

using nlohmann::json;

Vec3 vec3From(const json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("manifest: expected [x, y, z]");
  return {j[0].get<float>(), j[1].get<float>(), j[2].get<float>()};
}

Affine3 affineFrom(const json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("manifest: transform must be 3 rows of 4");
  Affine3 xf;
  for (int r = 0; r < 3; ++r) {
    if (!j[r].is_array() || j[r].size() != 4) throw std::invalid_argument("manifest: transform must be 3 rows of 4");
    for (int c = 0; c < 3; ++c) xf.linear[r][c] = j[r][c].get<float>();
    xf.translation[r] = j[r][3].get<float>();
  }
  return xf;
}

}  // namespace

Scene parseManifest(const std::string& text, const std::filesystem::path& baseDir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("manifest: ") + e.what());
  }
  Scene scene;
  try {
    for (const auto& m : doc.at("meshes")) {
      if (m.contains("path")) {
        std::filesystem::path p = m.at("path").get<std::string>();
        if (p.is_relative()) p = baseDir / p;
        scene.addMesh(loadObj(p));
      } else {
        Mesh mesh;
        for (const auto& v : m.at("vertices")) mesh.vertices.push_back(vec3From(v));
        for (const auto& f : m.at("indices")) {
          if (!f.is_array() || f.size() != 3) throw std::invalid_argument("manifest: index triple expected");
          mesh.indices.push_back({f[0].get<std::uint32_t>(), f[1].get<std::uint32_t>(), f[2].get<std::uint32_t>()});
        }
        scene.addMesh(std::move(mesh));
      }
    }
    for (const auto& g : doc.at("geometries"))
      scene.addGeometry(g.at("mesh").get<std::uint32_t>(), g.at("sbtOffset").get<int>());
    for (const auto& inst : doc.at("instances")) {
      auto geoms = inst.at("geometries").get<std::vector<std::uint32_t>>();
      const Affine3 xf = inst.contains("transform") ? affineFrom(inst.at("transform")) : Affine3::identity();
      scene.addInstance(std::move(geoms), xf);
    }
    if (doc.contains("camera")) {
      const auto& c = doc.at("camera");
      Camera cam;
      cam.position = vec3From(c.at("position"));
      cam.lookAt = vec3From(c.at("lookAt"));
      if (c.contains("up")) cam.up = vec3From(c.at("up"));
      if (c.contains("fovY")) cam.fovY = c.at("fovY").get<float>();
      scene.camera = cam;
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("manifest: ") + e.what());
  } catch (const std::out_of_range& e) {
    throw std::invalid_argument(std::string("manifest: ") + e.what());
  }
  return scene;
}

Scene loadManifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open manifest: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parseManifest(buf.str(), path.parent_path());
}

Scene loadSceneFile(const std::filesystem::path& path) {
  if (path.extension() == ".json") return loadManifest(path);
  return sceneFromMesh(loadObj(path));
}

// ---------------------------------------------------------------------------------------
// Generators

namespace {

void addQuad(Mesh& mesh, Vec3 a, Vec3 b, Vec3 c, Vec3 d) {
  const auto base = static_cast<std::uint32_t>(mesh.vertices.size());
  mesh.vertices.insert(mesh.vertices.end(), {a, b, c, d});
  mesh.indices.push_back({base, base + 1, base + 2});
  mesh.indices.push_back({base, base + 2, base + 3});
}

Mesh unitCube() {
  Mesh m;
  // Faces with a fixed vertex order per plane (winding is irrelevant: no culling).
  for (float c : {0.0f, 1.0f}) {
    addQuad(m, {c, 0, 0}, {c, 1, 0}, {c, 1, 1}, {c, 0, 1});
    addQuad(m, {0, c, 0}, {1, c, 0}, {1, c, 1}, {0, c, 1});
    addQuad(m, {0, 0, c}, {1, 0, c}, {1, 1, c}, {0, 1, c});
  }
  return m;
}

}  // namespace

Scene genCoplanarStack(int n, bool sameT) {
  if (n < 1) throw std::invalid_argument("genCoplanarStack: n must be >= 1");
  Mesh mesh;
  for (int k = 0; k < n; ++k) {
    const float z = sameT ? 5.0f : 5.0f + static_cast<float>(k);
    addQuad(mesh, {0, 0, z}, {1, 0, z}, {1, 1, z}, {0, 1, z});
  }
  Scene scene = sceneFromMesh(std::move(mesh));
  Camera cam;
  cam.position = {0.5f, 0.5f, -4.0f};
  cam.lookAt = {0.5f, 0.5f, 5.0f};
  cam.fovY = 8.0f;
  scene.camera = cam;
  return scene;
}

Ray coplanarStackProbeRay() {
  Ray ray;
  ray.origin = {2.0f / 3.0f, 1.0f / 3.0f, -1.0f};
  ray.direction = {0, 0, 1};
  ray.tMin = 0.0f;
  ray.tMax = 1e30f;
  return ray;
}

Scene genAbuttingBoxes(int k) {
  if (k < 2) throw std::invalid_argument("genAbuttingBoxes: k must be >= 2");
  Scene scene;
  std::vector<std::uint32_t> geoms;
  for (int i = 0; i < k; ++i) {
    const float x0 = static_cast<float>(i), x1 = static_cast<float>(i + 1);
    Mesh m;
    for (float c : {x0, x1}) addQuad(m, {c, 0, 0}, {c, 1, 0}, {c, 1, 1}, {c, 0, 1});
    for (float c : {0.0f, 1.0f}) {
      addQuad(m, {x0, c, 0}, {x1, c, 0}, {x1, c, 1}, {x0, c, 1});
      addQuad(m, {x0, 0, c}, {x1, 0, c}, {x1, 1, c}, {x0, 1, c});
    }
    geoms.push_back(scene.addGeometry(scene.addMesh(std::move(m)), i));
  }
  scene.addInstance(geoms, Affine3::identity());
  Camera cam;
  cam.position = {-3.0f, 0.5f, 0.5f};
  cam.lookAt = {static_cast<float>(k), 0.5f, 0.5f};
  cam.fovY = 20.0f;
  scene.camera = cam;
  return scene;
}

Ray abuttingBoxesProbeRay() {
  Ray ray;
  ray.origin = {-1.0f, 0.6f, 0.3f};
  ray.direction = {1, 0, 0};
  ray.tMin = 0.0f;
  ray.tMax = 1e30f;
  return ray;
}

Scene genInstancedGrid(int m) {
  if (m < 1) throw std::invalid_argument("genInstancedGrid: m must be >= 1");
  Scene scene;
  const auto g = scene.addGeometry(scene.addMesh(unitCube()), 0);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i)
      scene.addInstance({g}, Affine3::translate({1.5f * static_cast<float>(i), 1.5f * static_cast<float>(j), 0.0f}));
  if (m >= 2) scene.addInstance({g}, scene.instances()[0].objectToWorld);
  const float extent = 1.5f * static_cast<float>(m - 1) + 1.0f;
  const float c = extent * 0.5f;
  Camera cam;
  cam.position = {c, c, -6.0f};
  cam.lookAt = {c, c, 0.5f};
  cam.fovY = 2.0f * std::atan((c + 0.3f) / 6.0f) * 180.0f / std::numbers::pi_v<float>;
  scene.camera = cam;
  return scene;
}

Scene genAdversarialOrder() {
  Mesh mesh;
  mesh.vertices = {{-2.0f, -0.5f, 0.0f}, {4.0f, -0.5f, 0.0f}, {0.25f, 0.5f, 20.0f},
                   {-1.0f, -1.0f, 5.0f}, {2.0f, -1.0f, 5.0f}, {-1.0f, 2.0f, 5.0f}};
  mesh.indices = {{0, 1, 2}, {3, 4, 5}};
  Scene scene = sceneFromMesh(std::move(mesh));
  Camera cam;
  cam.position = {0.25f, 0.25f, -2.0f};
  cam.lookAt = {0.25f, 0.25f, 5.0f};
  cam.fovY = 12.0f;
  scene.camera = cam;
  return scene;
}

Ray adversarialProbeRay() {
  Ray ray;
  ray.origin = {0.25f, 0.25f, -1.0f};
  ray.direction = {0, 0, 1};
  ray.tMin = 0.0f;
  ray.tMax = 1e30f;
  return ray;
}

Scene generateScene(const std::string& text) {
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  std::map<std::string, std::string> params;
  if (colon != std::string::npos) {
    std::string rest = text.substr(colon + 1);
    for (char& c : rest)
      if (c == ':') c = ',';
    std::istringstream in(rest);
    std::string kv;
    while (std::getline(in, kv, ',')) {
      if (kv.empty()) continue;
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("generator parameter '" + kv + "' is not k=v");
      params[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
  }
  auto intParam = [&](const std::string& key, long def) {
    auto it = params.find(key);
    if (it == params.end()) return def;
    long v = 0;
    if (!parseInt(it->second, v)) throw std::invalid_argument("generator parameter '" + key + "' is not an integer");
    params.erase(it);
    return v;
  };
  Scene scene;
  if (name == "coplanar") {
    const long n = intParam("n", 8);
    const long same = intParam("same", 1);
    scene = genCoplanarStack(static_cast<int>(n), same != 0);
  } else if (name == "boxes") {
    scene = genAbuttingBoxes(static_cast<int>(intParam("k", 5)));
  } else if (name == "grid") {
    scene = genInstancedGrid(static_cast<int>(intParam("m", 3)));
  } else if (name == "adversarial") {
    scene = genAdversarialOrder();
  } else {
    throw std::invalid_argument("unknown generator '" + name + "'");
  }
  if (!params.empty()) throw std::invalid_argument("unknown generator parameter '" + params.begin()->first + "'");
  return scene;
}

}  // namespace ftb
