#pragma once

#include <optional>

#include "mousepose/skeleton.hpp"

namespace mousepose {

enum class Limb : int { ForeLeft = 0, ForeRight = 1, HindLeft = 2, HindRight = 3 };
inline constexpr int kLimbCount = 4;

// Analytic two-bone solution: the elbow lies in the plane spanned by the
// anchor-target axis and the pole direction, honoring both bone lengths
// exactly. An unreachable target is clamped onto the reachable sphere.
//
//        (E)
//   len_a /:. len_b
//        / h .
//      (A)-a--(T)
struct TwoBoneSolution {
  Vec3 mid{};     // elbow/knee position
  Vec3 end{};     // effective target after clamping
  bool clamped = false;
};
TwoBoneSolution solveTwoBone(Vec3 anchor, Vec3 target, double len_a, double len_b, Vec3 pole);

struct IkResult {
  std::array<Vec3, kJointCount> joints{};
  std::array<bool, kLimbCount> clamped{};    // paw was out of reach
  std::array<bool, kLimbCount> defaulted{};  // paw missing, rest configuration used
};

// Completes the 24-joint skeleton from the 12 main-body joints and the paw
// positions. Fore limbs: the shoulder joint is placed rigidly from the body
// frame, the lower joint by two-bone IK to the paw. Hind limbs: the ankle
// angle between upper leg, ankle and paw is fixed at 90 degrees, reducing
// the hip chain to a two-bone solve. Missing paws fall back to the rest
// configuration in the reconstructed body frame. Main joints pass through
// untouched; the pose scale is inferred from the rigid lumbar-pelvis bone.
IkResult ikFuse(const SkeletonModel& model, const std::array<Vec3, kMainJointCount>& main_joints,
                const std::array<std::optional<Vec3>, kLimbCount>& paws);

}  // namespace mousepose
