#include "mousepose/ik.hpp"

#include <cmath>

namespace mousepose {

namespace {

Vec3 perpendicularTo(Vec3 axis, Vec3 preferred) {
  Vec3 p = preferred - dot(preferred, axis) * axis;
  double n = norm(p);
  if (n > 1e-9) return (1.0 / n) * p;
  // Preferred direction is parallel to the axis; any perpendicular works.
  Vec3 fallback = std::abs(axis.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 0, 1};
  p = fallback - dot(fallback, axis) * axis;
  return normalized(p);
}

struct BodyFrame {
  Mat3 rotation;  // world_dir = rotation * rest_dir
  double scale = 1.0;
};

Mat3 frameFromJoints(Vec3 withers, Vec3 pelvis) {
  Vec3 forward = normalized(withers - pelvis);
  Vec3 left = cross(Vec3{0, 0, 1}, forward);
  double n = norm(left);
  if (n < 1e-9) {
    left = Vec3{0, 1, 0};  // body pointing straight up; pick a lateral axis
  } else {
    left = (1.0 / n) * left;
  }
  Vec3 up = cross(forward, left);
  return Mat3::fromColumns(forward, left, up);
}

}  // namespace

TwoBoneSolution solveTwoBone(Vec3 anchor, Vec3 target, double len_a, double len_b, Vec3 pole) {
  TwoBoneSolution solution;
  Vec3 to_target = target - anchor;
  double d = norm(to_target);
  double d_max = len_a + len_b;
  double d_min = std::abs(len_a - len_b);
  Vec3 axis;
  if (d < 1e-12) {
    axis = Vec3{1, 0, 0};
    d = d_min > 0.0 ? d_min : d_max;
    solution.clamped = true;
  } else {
    axis = (1.0 / d) * to_target;
    if (d > d_max) {
      d = d_max;
      solution.clamped = true;
    } else if (d < d_min) {
      d = d_min;
      solution.clamped = true;
    }
  }
  solution.end = anchor + d * axis;
  double a = d > 0.0 ? (len_a * len_a - len_b * len_b + d * d) / (2.0 * d) : len_a;
  double h_sq = len_a * len_a - a * a;
  double h = h_sq > 0.0 ? std::sqrt(h_sq) : 0.0;
  Vec3 side = perpendicularTo(axis, pole);
  solution.mid = anchor + a * axis + h * side;
  return solution;
}

IkResult ikFuse(const SkeletonModel& model, const std::array<Vec3, kMainJointCount>& main_joints,
                const std::array<std::optional<Vec3>, kLimbCount>& paws) {
  IkResult result;
  for (int j = 0; j < kMainJointCount; ++j) {
    result.joints[static_cast<std::size_t>(j)] = main_joints[static_cast<std::size_t>(j)];
  }

  // Scale from a rigid parent-child spine pair: pose rotations cannot change
  // that distance.
  BodyFrame frame;
  frame.scale = distance(main_joints[kLumbar], main_joints[kPelvis]) / model.boneLength(kPelvis);
  frame.rotation = frameFromJoints(main_joints[kWithers], main_joints[kPelvis]) *
                   transpose(frameFromJoints(model.joints[kWithers].rest,
                                             model.joints[kPelvis].rest));

  auto place = [&](int joint, int anchor_joint, Vec3 anchor_world) {
    Vec3 rest_offset =
        model.joints[static_cast<std::size_t>(joint)].rest -
        model.joints[static_cast<std::size_t>(anchor_joint)].rest;
    return anchor_world + frame.scale * (frame.rotation * rest_offset);
  };

  struct Chain {
    Limb limb;
    int anchor;  // main-body joint holding the chain
    int upper;
    int lower;
    int paw;
    bool fore;
  };
  const Chain chains[] = {
      {Limb::ForeLeft, kWithers, kForeLeftUpper, kForeLeftLower, kPawForeLeft, true},
      {Limb::ForeRight, kWithers, kForeRightUpper, kForeRightLower, kPawForeRight, true},
      {Limb::HindLeft, kHipLeft, kHindLeftUpper, kHindLeftLower, kPawHindLeft, false},
      {Limb::HindRight, kHipRight, kHindRightUpper, kHindRightLower, kPawHindRight, false},
  };

  Vec3 down = frame.rotation * Vec3{0, 0, -1.0};
  for (const Chain& chain : chains) {
    auto limb_index = static_cast<std::size_t>(chain.limb);
    Vec3 anchor_world = result.joints[static_cast<std::size_t>(chain.anchor)];
    const std::optional<Vec3>& paw = paws[limb_index];
    if (!paw) {
      // Rest configuration in the reconstructed body frame.
      result.joints[static_cast<std::size_t>(chain.upper)] =
          place(chain.upper, chain.anchor, anchor_world);
      result.joints[static_cast<std::size_t>(chain.lower)] =
          place(chain.lower, chain.anchor, anchor_world);
      result.joints[static_cast<std::size_t>(chain.paw)] =
          place(chain.paw, chain.anchor, anchor_world);
      result.defaulted[limb_index] = true;
      continue;
    }

    if (chain.fore) {
      // Shoulder rigid from the body frame, then two bones to the paw.
      Vec3 shoulder = place(chain.upper, chain.anchor, anchor_world);
      double len_a = frame.scale * model.boneLength(chain.lower);
      double len_b = frame.scale * model.boneLength(chain.paw);
      TwoBoneSolution sol = solveTwoBone(shoulder, *paw, len_a, len_b, down);
      result.joints[static_cast<std::size_t>(chain.upper)] = shoulder;
      result.joints[static_cast<std::size_t>(chain.lower)] = sol.mid;
      result.joints[static_cast<std::size_t>(chain.paw)] = sol.end;
      result.clamped[limb_index] = sol.clamped;
    } else {
      // Right angle at the ankle folds the last two bones into one virtual
      // segment from the knee to the paw.
      double len_hip = frame.scale * model.boneLength(chain.upper);
      double len_upper = frame.scale * model.boneLength(chain.lower);
      double len_lower = frame.scale * model.boneLength(chain.paw);
      double len_virtual = std::sqrt(len_upper * len_upper + len_lower * len_lower);
      TwoBoneSolution sol = solveTwoBone(anchor_world, *paw, len_hip, len_virtual, down);
      Vec3 knee = sol.mid;
      Vec3 to_paw = sol.end - knee;
      Vec3 axis = (1.0 / len_virtual) * to_paw;
      double along = len_upper * len_upper / len_virtual;
      double h = len_upper * len_lower / len_virtual;
      Vec3 side = perpendicularTo(axis, down);
      result.joints[static_cast<std::size_t>(chain.upper)] = knee;
      result.joints[static_cast<std::size_t>(chain.lower)] = knee + along * axis + h * side;
      result.joints[static_cast<std::size_t>(chain.paw)] = sol.end;
      result.clamped[limb_index] = sol.clamped;
    }
  }
  return result;
}

}  // namespace mousepose
