#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "mousepose/ik.hpp"
#include "mousepose/pose_pipeline.hpp"

using namespace mousepose;

TEST_CASE("two-bone solve honors both lengths and bends toward the pole") {
  Vec3 anchor{0, 0, 10};
  Vec3 target{6, 0, 2};
  TwoBoneSolution sol = solveTwoBone(anchor, target, 7.0, 5.0, Vec3{0, 0, -1});
  CHECK_FALSE(sol.clamped);
  CHECK(distance(sol.mid, anchor) == doctest::Approx(7.0).epsilon(1e-12));
  CHECK(distance(sol.end, sol.mid) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(distance(sol.end, target) < 1e-12);
  CHECK(sol.mid.z < anchor.z);  // pole points down
}

TEST_CASE("a target at full extension makes the limb collinear") {
  Vec3 anchor{0, 0, 10};
  Vec3 target{12, 0, 10};  // exactly len_a + len_b away
  TwoBoneSolution sol = solveTwoBone(anchor, target, 7.0, 5.0, Vec3{0, 0, -1});
  CHECK(distance(sol.mid, anchor) == doctest::Approx(7.0).epsilon(1e-12));
  CHECK(distance(sol.end, sol.mid) == doctest::Approx(5.0).epsilon(1e-12));
  // Collinear: elbow sits on the anchor-target segment.
  Vec3 dir = normalized(target - anchor);
  CHECK(distance(sol.mid, anchor + 7.0 * dir) < 1e-9);
}

TEST_CASE("an unreachable target is clamped and flagged") {
  Vec3 anchor{0, 0, 10};
  Vec3 target{100, 0, 10};
  TwoBoneSolution sol = solveTwoBone(anchor, target, 7.0, 5.0, Vec3{0, 0, -1});
  CHECK(sol.clamped);
  CHECK(distance(sol.mid, anchor) == doctest::Approx(7.0).epsilon(1e-9));
  CHECK(distance(sol.end, sol.mid) == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(distance(sol.end, anchor) == doctest::Approx(12.0).epsilon(1e-9));
}

TEST_CASE("missing paws fall back to the rest configuration exactly") {
  SkeletonModel model = SkeletonModel::standardMouse();
  SkeletonPose rest;
  std::array<Vec3, kJointCount> truth = forwardKinematics(model, rest);
  std::array<Vec3, kMainJointCount> main;
  for (int j = 0; j < kMainJointCount; ++j) main[static_cast<std::size_t>(j)] = truth[static_cast<std::size_t>(j)];
  IkResult fused = ikFuse(model, main, {});
  for (int j = 0; j < kJointCount; ++j) {
    auto k = static_cast<std::size_t>(j);
    CHECK(distance(fused.joints[k], truth[k]) < 1e-6);
  }
  for (bool defaulted : fused.defaulted) CHECK(defaulted);

  // Same under a rigid yaw + translation + scale of the whole skeleton.
  SkeletonPose moved;
  moved.yaw = 0.9;
  moved.translation = Vec3{25, -10, 0};
  moved.scale = 1.1;
  std::array<Vec3, kJointCount> moved_truth = forwardKinematics(model, moved);
  for (int j = 0; j < kMainJointCount; ++j) {
    main[static_cast<std::size_t>(j)] = moved_truth[static_cast<std::size_t>(j)];
  }
  IkResult moved_fused = ikFuse(model, main, {});
  for (int j = 0; j < kJointCount; ++j) {
    auto k = static_cast<std::size_t>(j);
    CHECK(distance(moved_fused.joints[k], moved_truth[k]) < 1e-6);
  }
}

TEST_CASE("round trip preserves bone lengths, the hind right angle, and the mains") {
  SkeletonModel model = SkeletonModel::standardMouse();
  IkRoundTrip trip = ikRoundTrip(model, 100, 64);
  CHECK(trip.poses == 100);
  CHECK(trip.max_bone_length_error_mm < 1e-6);
  CHECK(trip.max_hind_angle_error_rad < 1e-6);
  CHECK(trip.max_main_joint_shift_mm == 0.0);
}

TEST_CASE("far-away paws clamp but keep exact bone lengths") {
  SkeletonModel model = SkeletonModel::standardMouse();
  std::array<Vec3, kJointCount> truth = forwardKinematics(model, SkeletonPose{});
  std::array<Vec3, kMainJointCount> main;
  for (int j = 0; j < kMainJointCount; ++j) main[static_cast<std::size_t>(j)] = truth[static_cast<std::size_t>(j)];
  std::array<std::optional<Vec3>, kLimbCount> paws{
      Vec3{500, 500, 0}, Vec3{-500, 500, 0}, Vec3{500, -500, 0}, Vec3{-500, -500, 0}};
  IkResult fused = ikFuse(model, main, paws);
  for (bool clamped : fused.clamped) CHECK(clamped);
  CHECK(distance(fused.joints[kForeLeftUpper], fused.joints[kForeLeftLower]) ==
        doctest::Approx(model.boneLength(kForeLeftLower)).epsilon(1e-9));
  CHECK(distance(fused.joints[kForeLeftLower], fused.joints[kPawForeLeft]) ==
        doctest::Approx(model.boneLength(kPawForeLeft)).epsilon(1e-9));
}
