#include "mousepose/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace mousepose {

namespace {

constexpr double kNoHit = -1.0;

double raySphereDepth(Vec3 origin, Vec3 dir, Vec3 center, double radius) {
  Vec3 w = origin - center;
  double a = dot(dir, dir);
  double b = 2.0 * dot(w, dir);
  double c = dot(w, w) - radius * radius;
  double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return kNoHit;
  double t = (-b - std::sqrt(disc)) / (2.0 * a);
  return t > 0.0 ? t : kNoHit;
}

}  // namespace

double rayCapsuleDepth(Vec3 origin, double dx, double dy, Vec3 a, Vec3 b, double radius) {
  Vec3 dir{dx, dy, -1.0};
  Vec3 axis = b - a;
  double axis_sq = dot(axis, axis);
  double best = std::numeric_limits<double>::infinity();

  if (axis_sq > 1e-12) {
    // Infinite cylinder around the axis, then clamp hits to the segment.
    Vec3 w = origin - a;
    double dv = dot(dir, axis) / axis_sq;
    double wv = dot(w, axis) / axis_sq;
    Vec3 d_perp = dir - dv * axis;
    Vec3 w_perp = w - wv * axis;
    double qa = dot(d_perp, d_perp);
    double qb = 2.0 * dot(w_perp, d_perp);
    double qc = dot(w_perp, w_perp) - radius * radius;
    if (qa > 1e-14) {
      double disc = qb * qb - 4.0 * qa * qc;
      if (disc >= 0.0) {
        double root = std::sqrt(disc);
        for (double t : {(-qb - root) / (2.0 * qa), (-qb + root) / (2.0 * qa)}) {
          if (t <= 0.0 || t >= best) continue;
          double s = wv + t * dv;
          if (s >= 0.0 && s <= 1.0) best = std::min(best, t);
        }
      }
    }
  }
  for (const Vec3& center : {a, b}) {
    double t = raySphereDepth(origin, dir, center, radius);
    if (t > 0.0 && t < best) best = t;
  }
  return std::isinf(best) ? kNoHit : best;
}

namespace {

struct Bone {
  Vec3 a;
  Vec3 b;
  double radius;
  int joint;  // child joint id
};

// Fixed region of a bone, or Torso for the midline spine bones whose side
// is decided per surface point.
enum class BoneRegion : std::uint8_t {
  Head,
  Tail,
  FrontLeft,
  FrontRight,
  RearLeft,
  RearRight,
  Torso,
};

BoneRegion boneRegion(int joint) {
  switch (joint) {
    case kNose:
    case kSkull:
    case kEarLeft:
    case kEarRight: return BoneRegion::Head;
    case kTailMid:
    case kTailTip: return BoneRegion::Tail;
    case kForeLeftUpper:
    case kForeLeftLower:
    case kPawForeLeft: return BoneRegion::FrontLeft;
    case kForeRightUpper:
    case kForeRightLower:
    case kPawForeRight: return BoneRegion::FrontRight;
    case kHipLeft:
    case kHindLeftUpper:
    case kHindLeftLower:
    case kPawHindLeft: return BoneRegion::RearLeft;
    case kHipRight:
    case kHindRightUpper:
    case kHindRightLower:
    case kPawHindRight: return BoneRegion::RearRight;
    default: return BoneRegion::Torso;
  }
}

const int kSpineOrder[] = {kNose, kSkull, kWithers, kMidBack, kLumbar, kPelvis, kTailMid,
                           kTailTip};

// Arc-parameterized spine polyline used to split torso hits into the four
// quadrant labels: fore/hind at the lumbar joint, left/right by the side of
// the local spine tangent.
struct SpineFrame {
  std::array<Vec3, 8> p;
  std::array<double, 8> arc{};
  double lumbar_arc = 0.0;

  explicit SpineFrame(const std::array<Vec3, kJointCount>& joints) {
    for (int i = 0; i < 8; ++i) p[static_cast<std::size_t>(i)] = joints[static_cast<std::size_t>(kSpineOrder[i])];
    for (int i = 1; i < 8; ++i) {
      auto k = static_cast<std::size_t>(i);
      arc[k] = arc[k - 1] + distance(p[k], p[k - 1]);
    }
    lumbar_arc = arc[4];  // kLumbar's position in kSpineOrder
  }

  PartClass classify(Vec3 hit) const {
    double best_sq = std::numeric_limits<double>::infinity();
    double hit_arc = 0.0;
    Vec3 nearest{};
    Vec3 tangent{};
    for (int i = 0; i + 1 < 8; ++i) {
      auto k = static_cast<std::size_t>(i);
      Vec3 seg = p[k + 1] - p[k];
      double len_sq = dot(seg, seg);
      double u = len_sq > 0.0 ? std::clamp(dot(hit - p[k], seg) / len_sq, 0.0, 1.0) : 0.0;
      Vec3 q = p[k] + u * seg;
      double d_sq = squaredNorm(hit - q);
      if (d_sq < best_sq) {
        best_sq = d_sq;
        nearest = q;
        hit_arc = arc[k] + u * std::sqrt(len_sq);
        tangent = seg;
      }
    }
    bool fore = hit_arc < lumbar_arc;
    Vec3 noseward = -1.0 * tangent;  // polyline runs nose -> tail
    Vec3 leftward = cross(Vec3{0, 0, 1}, noseward);
    bool left = dot(hit - nearest, leftward) > 0.0;
    if (fore) return left ? PartClass::FrontLeft : PartClass::FrontRight;
    return left ? PartClass::RearLeft : PartClass::RearRight;
  }
};

}  // namespace

RenderResult renderPose(const SkeletonModel& model,
                        const std::array<Vec3, kJointCount>& joints, const Camera& camera) {
  for (const Vec3& j : joints) {
    if (j.z >= camera.height_mm) {
      throw std::runtime_error("renderPose: joint at or behind the camera plane");
    }
  }

  std::vector<Bone> bones;
  bones.reserve(kJointCount - 1);
  for (int j = 0; j < kJointCount; ++j) {
    if (j == model.root) continue;
    auto k = static_cast<std::size_t>(j);
    bones.push_back(Bone{joints[static_cast<std::size_t>(model.joints[k].parent)], joints[k],
                         model.joints[k].capsule_radius, j});
  }
  SpineFrame spine(joints);

  RenderResult out;
  out.depth.width = camera.width;
  out.depth.height = camera.height;
  out.depth.background_mm = static_cast<float>(camera.height_mm);
  out.depth.values.assign(static_cast<std::size_t>(camera.width) *
                              static_cast<std::size_t>(camera.height),
                          static_cast<float>(camera.height_mm));
  out.labels.width = camera.width;
  out.labels.height = camera.height;
  out.labels.values.assign(out.depth.values.size(),
                           static_cast<std::uint8_t>(PartClass::Background));

  Vec3 origin{0.0, 0.0, camera.height_mm};
  for (int iy = 0; iy < camera.height; ++iy) {
    for (int ix = 0; ix < camera.width; ++ix) {
      double dx = (ix + 0.5 - camera.cx) / camera.focal;
      double dy = (iy + 0.5 - camera.cy) / camera.focal;
      double best = camera.height_mm;  // floor
      const Bone* winner = nullptr;
      for (const Bone& bone : bones) {
        double t = rayCapsuleDepth(origin, dx, dy, bone.a, bone.b, bone.radius);
        if (t > 0.0 && t < best) {
          best = t;
          winner = &bone;
        }
      }
      if (!winner) continue;
      out.depth.at(ix, iy) = static_cast<float>(best);
      PartClass label = PartClass::Background;
      BoneRegion region = boneRegion(winner->joint);
      switch (region) {
        case BoneRegion::Head: label = PartClass::Head; break;
        case BoneRegion::Tail: label = PartClass::Tail; break;
        case BoneRegion::FrontLeft: label = PartClass::FrontLeft; break;
        case BoneRegion::FrontRight: label = PartClass::FrontRight; break;
        case BoneRegion::RearLeft: label = PartClass::RearLeft; break;
        case BoneRegion::RearRight: label = PartClass::RearRight; break;
        case BoneRegion::Torso: {
          Vec3 hit{dx * best, dy * best, camera.height_mm - best};
          label = spine.classify(hit);
          break;
        }
      }
      out.labels.at(ix, iy) = static_cast<std::uint8_t>(label);
    }
  }
  return out;
}

DepthImage renderDepth(const SkeletonModel& model, const std::array<Vec3, kJointCount>& joints,
                       const Camera& camera) {
  return renderPose(model, joints, camera).depth;
}

LabelImage renderLabels(const SkeletonModel& model, const std::array<Vec3, kJointCount>& joints,
                        const Camera& camera) {
  return renderPose(model, joints, camera).labels;
}

}  // namespace mousepose
