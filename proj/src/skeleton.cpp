#include "mousepose/skeleton.hpp"

#include <algorithm>
#include <stdexcept>

namespace mousepose {

namespace {

JointDef def(int parent, Vec3 rest, double radius, Vec3 lim) {
  return JointDef{parent, rest, radius, -1.0 * lim, lim};
}

}  // namespace

SkeletonModel SkeletonModel::standardMouse() {
  // Limits: spine bends moderately, the tail is loose, ears barely move,
  // limbs swing the most.
  const Vec3 spine{0.3, 0.8, 0.8};
  const Vec3 tail{0.4, 1.2, 1.2};
  const Vec3 ear{0.35, 0.35, 0.35};
  const Vec3 rigid{0.3, 0.4, 0.4};
  const Vec3 limb{0.6, 1.3, 0.9};
  const Vec3 paw{0.5, 1.0, 0.8};

  SkeletonModel m;
  m.root = kMidBack;
  m.joints[kNose] = def(kSkull, {60, 0, 21}, 3.5, spine);
  m.joints[kSkull] = def(kWithers, {47, 0, 23}, 7.0, spine);
  m.joints[kWithers] = def(kMidBack, {32, 0, 25}, 9.0, spine);
  m.joints[kMidBack] = def(-1, {14, 0, 26}, 9.5, spine);
  m.joints[kLumbar] = def(kMidBack, {-6, 0, 25}, 9.5, spine);
  m.joints[kPelvis] = def(kLumbar, {-40, 0, 21}, 8.0, spine);
  m.joints[kTailMid] = def(kPelvis, {-62, 0, 8}, 2.5, tail);
  m.joints[kTailTip] = def(kTailMid, {-86, 0, 5}, 2.0, tail);
  m.joints[kEarLeft] = def(kSkull, {44, 10, 29}, 3.0, ear);
  m.joints[kEarRight] = def(kSkull, {44, -10, 29}, 3.0, ear);
  m.joints[kHipLeft] = def(kPelvis, {-36, 11, 17}, 5.5, rigid);
  m.joints[kHipRight] = def(kPelvis, {-36, -11, 17}, 5.5, rigid);
  m.joints[kForeLeftUpper] = def(kWithers, {30, 12, 12}, 3.0, limb);
  m.joints[kForeLeftLower] = def(kForeLeftUpper, {28, 13, 4}, 2.5, limb);
  m.joints[kForeRightUpper] = def(kWithers, {30, -12, 12}, 3.0, limb);
  m.joints[kForeRightLower] = def(kForeRightUpper, {28, -13, 4}, 2.5, limb);
  m.joints[kHindLeftUpper] = def(kHipLeft, {-28, 13, 12}, 3.5, limb);
  m.joints[kHindLeftLower] = def(kHindLeftUpper, {-33, 14, 4}, 2.5, limb);
  m.joints[kHindRightUpper] = def(kHipRight, {-28, -13, 12}, 3.5, limb);
  m.joints[kHindRightLower] = def(kHindRightUpper, {-33, -14, 4}, 2.5, limb);
  m.joints[kPawForeLeft] = def(kForeLeftLower, {33, 13, 2.6}, 2.5, paw);
  m.joints[kPawForeRight] = def(kForeRightLower, {33, -13, 2.6}, 2.5, paw);
  m.joints[kPawHindLeft] = def(kHindLeftLower, {-26, 15, 2.6}, 2.5, paw);
  m.joints[kPawHindRight] = def(kHindRightLower, {-26, -15, 2.6}, 2.5, paw);
  return m;
}

bool poseWithinLimits(const SkeletonModel& model, const SkeletonPose& pose) {
  for (int j = 0; j < kJointCount; ++j) {
    auto k = static_cast<std::size_t>(j);
    const JointDef& d = model.joints[k];
    const Vec3& r = pose.rotation[k];
    if (r.x < d.limit_lo.x || r.x > d.limit_hi.x || r.y < d.limit_lo.y || r.y > d.limit_hi.y ||
        r.z < d.limit_lo.z || r.z > d.limit_hi.z) {
      return false;
    }
  }
  return true;
}

void clampPoseToLimits(const SkeletonModel& model, SkeletonPose* pose) {
  for (int j = 0; j < kJointCount; ++j) {
    auto k = static_cast<std::size_t>(j);
    const JointDef& d = model.joints[k];
    Vec3& r = pose->rotation[k];
    r.x = std::clamp(r.x, d.limit_lo.x, d.limit_hi.x);
    r.y = std::clamp(r.y, d.limit_lo.y, d.limit_hi.y);
    r.z = std::clamp(r.z, d.limit_lo.z, d.limit_hi.z);
  }
}

std::array<Vec3, kJointCount> forwardKinematics(const SkeletonModel& model,
                                                const SkeletonPose& pose) {
  if (pose.scale <= 0.0) throw std::invalid_argument("forwardKinematics: scale must be > 0");
  if (!poseWithinLimits(model, pose)) {
    throw std::invalid_argument("forwardKinematics: joint rotation outside limits");
  }

  std::array<Mat3, kJointCount> frame;
  std::array<Vec3, kJointCount> position;
  std::array<bool, kJointCount> done{};

  Mat3 global = rotationZYX(pose.roll, pose.pitch, pose.yaw);
  auto rootIdx = static_cast<std::size_t>(model.root);
  frame[rootIdx] = global * rotationZYX(pose.rotation[rootIdx].x, pose.rotation[rootIdx].y,
                                        pose.rotation[rootIdx].z);
  position[rootIdx] = pose.translation + pose.scale * (global * model.joints[rootIdx].rest);
  done[rootIdx] = true;

  // Joints are not topologically sorted by index; resolve parents on demand.
  auto solve = [&](auto&& self, int j) -> void {
    auto k = static_cast<std::size_t>(j);
    if (done[k]) return;
    int parent = model.joints[k].parent;
    self(self, parent);
    auto p = static_cast<std::size_t>(parent);
    frame[k] = frame[p] *
               rotationZYX(pose.rotation[k].x, pose.rotation[k].y, pose.rotation[k].z);
    position[k] = position[p] + pose.scale * (frame[k] * model.boneVector(j));
    done[k] = true;
  };
  for (int j = 0; j < kJointCount; ++j) solve(solve, j);
  return position;
}

}  // namespace mousepose
