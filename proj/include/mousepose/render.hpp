#pragma once

#include "mousepose/images.hpp"
#include "mousepose/skeleton.hpp"

namespace mousepose {

struct RenderResult {
  DepthImage depth;
  LabelImage labels;
};

// Renders every bone as a capsule under the overhead pinhole camera: per
// pixel the nearest capsule hit wins the z-buffer, the floor plane is the
// background, and the winning surface point decides the part label. Depth
// and label images share one pass, so their foreground masks are identical.
// Throws when any joint sits at or behind the camera plane.
RenderResult renderPose(const SkeletonModel& model,
                        const std::array<Vec3, kJointCount>& joints, const Camera& camera);

DepthImage renderDepth(const SkeletonModel& model, const std::array<Vec3, kJointCount>& joints,
                       const Camera& camera);
LabelImage renderLabels(const SkeletonModel& model, const std::array<Vec3, kJointCount>& joints,
                        const Camera& camera);

// Smallest depth t > 0 at which the ray through pixel-plane direction
// (dx, dy, -1) from (0, 0, camera height) meets the capsule around segment
// [a, b]; negative when there is no hit. Exposed for the renderer tests.
double rayCapsuleDepth(Vec3 origin, double dx, double dy, Vec3 a, Vec3 b, double radius);

}  // namespace mousepose
