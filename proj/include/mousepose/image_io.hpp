#pragma once

#include <string>

#include "mousepose/images.hpp"
#include "mousepose/skeleton.hpp"

namespace mousepose {

// Depth file: little-endian binary, header {magic "MPD1", u32 width,
// u32 height, f32 scale mm-per-unit, f32 background mm}, then row-major
// 16-bit depth codes (depth_mm = code * scale).
void saveDepthImage(const DepthImage& image, const std::string& path, float scale_mm = 0.05f);
DepthImage loadDepthImage(const std::string& path);

// Label file: same header layout {magic "MPL1", u32 width, u32 height,
// f32 scale = 1, f32 background class id}, then row-major 8-bit class ids.
void saveLabelImage(const LabelImage& image, const std::string& path);
LabelImage loadLabelImage(const std::string& path);

// Ground-truth sidecar: structured text with the camera parameters and the
// 24 joint world positions.
struct TruthSidecar {
  Camera camera{};
  std::array<Vec3, kJointCount> joints{};
};
void saveTruthSidecar(const TruthSidecar& truth, const std::string& path);
TruthSidecar loadTruthSidecar(const std::string& path);

}  // namespace mousepose
