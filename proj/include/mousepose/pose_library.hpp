#pragma once

#include <vector>

#include "mousepose/rng.hpp"
#include "mousepose/skeleton.hpp"

namespace mousepose {

// Procedural stand-in for an artist pose bank: four parameterized activity
// generators (standing, walking, rearing, turning).
enum class PoseFamily : int { Stand = 0, Walk = 1, Rear = 2, Bend = 3 };

struct PoseLibrary {
  std::vector<PoseFamily> families{PoseFamily::Stand, PoseFamily::Walk, PoseFamily::Rear,
                                   PoseFamily::Bend};
};

// One base pose from a family, with family parameters drawn from rng.
SkeletonPose generateBasePose(const SkeletonModel& model, PoseFamily family, Rng& rng);

struct PerturbationRanges {
  double yaw = 3.141592653589793;  // full in-plane rotation
  double pitch = 0.10;
  double roll = 0.10;
  double translation = 40.0;  // mm, each floor axis
  double scale_lo = 0.92;
  double scale_hi = 1.08;
  double joint_jitter = 0.05;  // radians added to every spine rotation axis
};

// Base pose drawn uniformly from the library, then global and joint-level
// perturbations. A jittered pose that leaves the joint limits is resampled a
// few times, then clamped. Deterministic by seed.
std::vector<SkeletonPose> samplePoses(const SkeletonModel& model, const PoseLibrary& library,
                                      const PerturbationRanges& ranges, std::size_t count,
                                      std::uint64_t seed);

}  // namespace mousepose
