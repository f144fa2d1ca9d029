#pragma once

#include <array>

#include "mousepose/geometry.hpp"

namespace mousepose {

inline constexpr int kJointCount = 24;

// Joint indices (0-based; the documented skeleton numbers them 1-24 in the
// same order). Spine runs nose to tail tip with two tail joints; ears hang
// off the skull, hips off the pelvis; each limb is two joints plus a paw.
enum Joint : int {
  kNose = 0,
  kSkull = 1,
  kWithers = 2,    // fore-limb anchor on the spine
  kMidBack = 3,    // kinematic root
  kLumbar = 4,     // fore/hind boundary for part labels
  kPelvis = 5,
  kTailMid = 6,
  kTailTip = 7,
  kEarLeft = 8,
  kEarRight = 9,
  kHipLeft = 10,
  kHipRight = 11,
  kForeLeftUpper = 12,
  kForeLeftLower = 13,
  kForeRightUpper = 14,
  kForeRightLower = 15,
  kHindLeftUpper = 16,
  kHindLeftLower = 17,
  kHindRightUpper = 18,
  kHindRightLower = 19,
  kPawForeLeft = 20,
  kPawForeRight = 21,
  kPawHindLeft = 22,
  kPawHindRight = 23,
};

// Joints 1-12: spine 1-8 (with tail 7-8), ears 9-10, hips 11-12.
inline constexpr int kMainJointCount = 12;

struct JointDef {
  int parent = -1;          // -1 for the root
  Vec3 rest{};              // rest position, mm, scale 1, floor at z = 0
  double capsule_radius = 0.0;  // radius of the bone capsule ending at this joint
  Vec3 limit_lo{};          // per-axis rotation limits, radians
  Vec3 limit_hi{};
};

struct SkeletonModel {
  std::array<JointDef, kJointCount> joints{};
  int root = kMidBack;

  // Rest-pose mouse, nose-to-pelvis 100 mm at scale 1.
  static SkeletonModel standardMouse();

  Vec3 boneVector(int joint) const {
    return joints[static_cast<std::size_t>(joint)].rest -
           joints[static_cast<std::size_t>(joints[static_cast<std::size_t>(joint)].parent)].rest;
  }
  double boneLength(int joint) const { return norm(boneVector(joint)); }
};

// Per-joint rotations (radians, applied as Rz*Ry*Rx in the parent frame)
// plus a rigid global transform and a uniform scale.
struct SkeletonPose {
  std::array<Vec3, kJointCount> rotation{};
  double yaw = 0.0;
  double pitch = 0.0;
  double roll = 0.0;
  Vec3 translation{};
  double scale = 1.0;
};

// True when every joint rotation lies within the model's limits.
bool poseWithinLimits(const SkeletonModel& model, const SkeletonPose& pose);

// Clamps each rotation component into its limit range.
void clampPoseToLimits(const SkeletonModel& model, SkeletonPose* pose);

// World positions of all 24 joints. The root is placed by the global
// transform; every child is its parent plus the rotated, scaled bone.
// Throws std::invalid_argument when a rotation violates the limits.
std::array<Vec3, kJointCount> forwardKinematics(const SkeletonModel& model,
                                                const SkeletonPose& pose);

}  // namespace mousepose
