#pragma once

#include "ftb/geometry.hpp"

namespace ftb {

/// Pinhole camera; one primary ray per pixel through the pixel center.
struct Camera {
  Vec3 position{0, 0, -5};
  Vec3 lookAt{0, 0, 0};
  Vec3 up{0, 1, 0};
  float fovY = 45.0f;  // degrees
  int width = 64;
  int height = 64;

  /// Primary ray for pixel (x, y), y = 0 being the top row. Interval is (0, 1e30).
  Ray generateRay(int x, int y) const;
};

}  // namespace ftb
