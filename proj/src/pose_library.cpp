#include "mousepose/pose_library.hpp"

#include <stdexcept>

namespace mousepose {

namespace {

void setPitch(SkeletonPose* pose, int joint, double v) {
  pose->rotation[static_cast<std::size_t>(joint)].y = v;
}
void setYaw(SkeletonPose* pose, int joint, double v) {
  pose->rotation[static_cast<std::size_t>(joint)].z = v;
}

SkeletonPose standPose(Rng& rng) {
  SkeletonPose pose;
  double head_pitch = rng.uniform(-0.20, 0.25);
  double arch = rng.uniform(-0.08, 0.12);
  setPitch(&pose, kSkull, head_pitch);
  setPitch(&pose, kNose, 0.5 * head_pitch);
  setPitch(&pose, kWithers, arch);
  setPitch(&pose, kLumbar, -arch);
  setPitch(&pose, kTailMid, rng.uniform(-0.3, 0.3));
  return pose;
}

SkeletonPose walkPose(Rng& rng) {
  SkeletonPose pose;
  double phase = rng.uniform(0.0, 6.283185307179586);
  double stride = rng.uniform(0.25, 0.55);
  double swing = stride * std::sin(phase);
  // Trot: diagonal limb pairs move together.
  setPitch(&pose, kForeLeftUpper, swing);
  setPitch(&pose, kHindRightUpper, swing);
  setPitch(&pose, kForeRightUpper, -swing);
  setPitch(&pose, kHindLeftUpper, -swing);
  setPitch(&pose, kForeLeftLower, -0.4 * swing);
  setPitch(&pose, kForeRightLower, 0.4 * swing);
  setPitch(&pose, kHindLeftLower, 0.4 * swing);
  setPitch(&pose, kHindRightLower, -0.4 * swing);
  // Mild lateral undulation of the spine and tail.
  double wiggle = 0.08 * std::sin(phase);
  setYaw(&pose, kWithers, wiggle);
  setYaw(&pose, kLumbar, -wiggle);
  setYaw(&pose, kTailMid, rng.uniform(-0.5, 0.5));
  setYaw(&pose, kTailTip, rng.uniform(-0.5, 0.5));
  return pose;
}

SkeletonPose rearPose(Rng& rng) {
  SkeletonPose pose;
  double lift = rng.uniform(0.25, 0.7);
  // Pitch the front of the body upward and fold the fore limbs in.
  setPitch(&pose, kWithers, -lift);
  setPitch(&pose, kSkull, -0.5 * lift);
  setPitch(&pose, kLumbar, 0.4 * lift);
  setPitch(&pose, kForeLeftUpper, -0.8 * lift);
  setPitch(&pose, kForeRightUpper, -0.8 * lift);
  setPitch(&pose, kForeLeftLower, 0.5 * lift);
  setPitch(&pose, kForeRightLower, 0.5 * lift);
  setPitch(&pose, kTailMid, rng.uniform(-0.2, 0.4));
  return pose;
}

SkeletonPose bendPose(Rng& rng) {
  SkeletonPose pose;
  double bend = rng.uniform(-1.0, 1.0);
  // Distribute the turn along the spine.
  setYaw(&pose, kSkull, 0.35 * bend);
  setYaw(&pose, kWithers, 0.3 * bend);
  setYaw(&pose, kLumbar, 0.3 * bend);
  setYaw(&pose, kPelvis, 0.25 * bend);
  setYaw(&pose, kTailMid, 0.5 * bend);
  setYaw(&pose, kTailTip, 0.4 * bend);
  setPitch(&pose, kSkull, rng.uniform(-0.15, 0.15));
  return pose;
}

const int kSpineJoints[] = {kNose, kSkull, kWithers, kMidBack, kLumbar, kPelvis, kTailMid,
                            kTailTip};

}  // namespace

SkeletonPose generateBasePose(const SkeletonModel& model, PoseFamily family, Rng& rng) {
  SkeletonPose pose;
  switch (family) {
    case PoseFamily::Stand: pose = standPose(rng); break;
    case PoseFamily::Walk: pose = walkPose(rng); break;
    case PoseFamily::Rear: pose = rearPose(rng); break;
    case PoseFamily::Bend: pose = bendPose(rng); break;
  }
  clampPoseToLimits(model, &pose);
  return pose;
}

std::vector<SkeletonPose> samplePoses(const SkeletonModel& model, const PoseLibrary& library,
                                      const PerturbationRanges& ranges, std::size_t count,
                                      std::uint64_t seed) {
  if (library.families.empty()) throw std::invalid_argument("samplePoses: empty pose library");
  std::vector<SkeletonPose> poses;
  poses.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(deriveSeed(seed, "pose", i));
    PoseFamily family = library.families[static_cast<std::size_t>(
        rng.uniformIndex(library.families.size()))];
    SkeletonPose base = generateBasePose(model, family, rng);

    SkeletonPose pose = base;
    const int kMaxRetries = 4;
    for (int attempt = 0;; ++attempt) {
      pose = base;
      for (int joint : kSpineJoints) {
        auto k = static_cast<std::size_t>(joint);
        pose.rotation[k].x += rng.uniform(-ranges.joint_jitter, ranges.joint_jitter);
        pose.rotation[k].y += rng.uniform(-ranges.joint_jitter, ranges.joint_jitter);
        pose.rotation[k].z += rng.uniform(-ranges.joint_jitter, ranges.joint_jitter);
      }
      if (poseWithinLimits(model, pose)) break;
      if (attempt >= kMaxRetries) {
        clampPoseToLimits(model, &pose);
        break;
      }
    }
    pose.yaw = rng.uniform(-ranges.yaw, ranges.yaw);
    pose.pitch = rng.uniform(-ranges.pitch, ranges.pitch);
    pose.roll = rng.uniform(-ranges.roll, ranges.roll);
    pose.translation = Vec3{rng.uniform(-ranges.translation, ranges.translation),
                            rng.uniform(-ranges.translation, ranges.translation), 0.0};
    pose.scale = rng.uniform(ranges.scale_lo, ranges.scale_hi);
    poses.push_back(pose);
  }
  return poses;
}

}  // namespace mousepose
