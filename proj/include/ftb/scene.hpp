#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ftb/camera.hpp"
#include "ftb/geometry.hpp"

namespace ftb {

struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> indices;

  std::size_t triangleCount() const { return indices.size(); }
  Triangle triangle(std::size_t prim) const {
    const auto& i = indices[prim];
    return {vertices[i[0]], vertices[i[1]], vertices[i[2]]};
  }
  /// Throws std::out_of_range if any index addresses a missing vertex.
  void validate() const;
};

struct Geometry {
  std::uint32_t mesh = 0;  // index into Scene::meshes
  int sbtOffset = 0;
};

struct Instance {
  std::vector<std::uint32_t> geometries;  // indices into Scene::geometries
  Affine3 objectToWorld;
  Affine3 worldToObject;  // cached inverse, filled by Scene::addInstance
  int instanceIndex = 0;
};

/// Meshes, geometries and instances. Every (inst, geom, prim) triple addresses
/// exactly one triangle; `geom` is the geometry's sbtOffset.
class Scene {
 public:
  std::uint32_t addMesh(Mesh mesh);
  /// Throws std::invalid_argument on an unknown mesh or a repeated sbtOffset.
  std::uint32_t addGeometry(std::uint32_t mesh, int sbtOffset);
  /// Throws std::domain_error for a singular transform.
  int addInstance(std::vector<std::uint32_t> geometries, const Affine3& objectToWorld);

  const std::vector<Mesh>& meshes() const { return meshes_; }
  const std::vector<Geometry>& geometries() const { return geometries_; }
  const std::vector<Instance>& instances() const { return instances_; }

  const Mesh& meshOf(const Geometry& g) const { return meshes_[g.mesh]; }
  std::size_t triangleCount() const;

  /// Suggested view, set by generators and manifests.
  std::optional<Camera> camera;

 private:
  std::vector<Mesh> meshes_;
  std::vector<Geometry> geometries_;
  std::vector<Instance> instances_;
};

/// Single-mesh, single-instance scene with an identity transform.
Scene sceneFromMesh(Mesh mesh);

class ObjParseError : public std::runtime_error {
 public:
  ObjParseError(const std::string& path, int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

/// OBJ subset: `v` and `f` records, 1-based or negative indices, `v/vt/vn` face tokens.
/// Polygons are fanned: (1,2,3,4) -> (1,2,3), (1,3,4). Everything else is ignored.
Mesh loadObj(const std::filesystem::path& path);
Mesh parseObj(const std::string& text, const std::string& sourceName = "<memory>");

/// JSON manifest:
///   { "meshes": [{"path": "a.obj"} | {"vertices": [[x,y,z],...], "indices": [[i,j,k],...]}],
///     "geometries": [{"mesh": 0, "sbtOffset": 0}],
///     "instances": [{"geometries": [0], "transform": [[r00,r01,r02,tx],[..],[..]]}],
///     "camera": {"position": [..], "lookAt": [..], "up": [..], "fovY": 45} }
/// Relative mesh paths resolve against the manifest's directory.
Scene loadManifest(const std::filesystem::path& path);
Scene parseManifest(const std::string& text, const std::filesystem::path& baseDir);

/// Loads a manifest (.json) or a single OBJ mesh by extension.
Scene loadSceneFile(const std::filesystem::path& path);

// Procedural stress scenes. Each ships a canonical camera.

/// n unit quads stacked along +z. sameT: every quad at z = 5 with identical vertices;
/// otherwise quad k sits at z = 5 + k.
Scene genCoplanarStack(int n, bool sameT);
/// A ray along +z through the centroid of triangle 0 of every quad.
Ray coplanarStackProbeRay();

/// k closed unit boxes along x, box i spanning [i, i+1] x [0,1] x [0,1]. Shared faces
/// use bitwise-identical triangles so they tie exactly. Each box is its own geometry.
Scene genAbuttingBoxes(int k);
/// A ray along +x crossing every box face once.
Ray abuttingBoxesProbeRay();

/// m x m grid of unit-cube instances; for m >= 2 one extra instance duplicates instance 0
/// so coincident triangles differ only by instance index.
Scene genInstancedGrid(int m);

/// Two triangles where the far one (prim 0) is traversed first: a slanted triangle whose
/// bounds start near the camera but which the probe ray meets at z = 15, and a plane
/// triangle at z = 5.
Scene genAdversarialOrder();
Ray adversarialProbeRay();

/// Generator by name: "coplanar" (n, same), "boxes" (k), "grid" (m), "adversarial".
/// Params as "k=v" pairs separated by ',' or ':'. Throws std::invalid_argument.
Scene generateScene(const std::string& text);

}  // namespace ftb
