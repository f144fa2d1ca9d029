#pragma once

#include <cstdint>
#include <vector>

#include "mousepose/forest.hpp"
#include "mousepose/geometry.hpp"
#include "mousepose/rng.hpp"

namespace mousepose {

// mm from the camera plane; background pixels hold exactly background_mm.
struct DepthImage {
  int width = 0;
  int height = 0;
  float background_mm = 600.0f;
  std::vector<float> values;

  float at(int x, int y) const { return values[static_cast<std::size_t>(y) *
                                               static_cast<std::size_t>(width) +
                                               static_cast<std::size_t>(x)]; }
  float& at(int x, int y) { return values[static_cast<std::size_t>(y) *
                                          static_cast<std::size_t>(width) +
                                          static_cast<std::size_t>(x)]; }
  bool foreground(int x, int y) const { return at(x, y) < background_mm; }
};

// Six body regions; Background fills non-mouse pixels.
enum class PartClass : std::uint8_t {
  Head = 0,
  FrontRight = 1,
  FrontLeft = 2,
  RearRight = 3,
  RearLeft = 4,
  Tail = 5,
  Background = 6,
};
inline constexpr int kPartClassCount = 6;

struct LabelImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> values;

  std::uint8_t at(int x, int y) const { return values[static_cast<std::size_t>(y) *
                                                      static_cast<std::size_t>(width) +
                                                      static_cast<std::size_t>(x)]; }
  std::uint8_t& at(int x, int y) { return values[static_cast<std::size_t>(y) *
                                                 static_cast<std::size_t>(width) +
                                                 static_cast<std::size_t>(x)]; }
  bool foreground(int x, int y) const {
    return at(x, y) != static_cast<std::uint8_t>(PartClass::Background);
  }
};

// Overhead pinhole camera looking straight down at the floor plane z = 0.
// u = cx + f*x/d, v = cy + f*y/d with d = height_mm - z.
struct Camera {
  int width = 64;
  int height = 64;
  double focal = 128.0;
  double cx = 32.0;
  double cy = 32.0;
  double height_mm = 600.0;

  static Camera standardTopView(int size = 64) {
    Camera c;
    c.width = size;
    c.height = size;
    c.cx = size / 2.0;
    c.cy = size / 2.0;
    c.focal = 2.0 * size;  // ~300 mm footprint on the floor at 64 px
    return c;
  }
};

inline Vec2 project(const Camera& cam, Vec3 world) {
  double d = cam.height_mm - world.z;
  return Vec2{cam.cx + cam.focal * world.x / d, cam.cy + cam.focal * world.y / d};
}

inline Vec3 backproject(const Camera& cam, double px, double py, double depth) {
  return Vec3{(px - cam.cx) * depth / cam.focal, (py - cam.cy) * depth / cam.focal,
              cam.height_mm - depth};
}

inline float depthFeature(const DepthImage& image, int px, int py, float depth_at, Vec2 offset,
                          const DepthFeatureConfig& cfg) {
  double scale = cfg.reference_depth / static_cast<double>(depth_at);
  int qx = px + static_cast<int>(std::lround(offset.x * scale));
  int qy = py + static_cast<int>(std::lround(offset.y * scale));
  float probe;
  if (qx < 0 || qy < 0 || qx >= image.width || qy >= image.height) {
    probe = static_cast<float>(cfg.background_depth);
  } else {
    probe = image.at(qx, qy);
  }
  return probe - depth_at;
}

// Adds i.i.d. Gaussian depth noise (mm) to foreground pixels in row-major
// order; the background and the foreground mask are preserved.
DepthImage addNoise(const DepthImage& image, double sigma, Rng& rng);

}  // namespace mousepose
