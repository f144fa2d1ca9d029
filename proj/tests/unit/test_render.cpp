#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "mousepose/pose_library.hpp"
#include "mousepose/render.hpp"

using namespace mousepose;

namespace {

// Independent analytic ray-sphere oracle.
double raySphereOracle(Vec3 origin, Vec3 dir, Vec3 center, double r) {
  Vec3 w = origin - center;
  double a = dot(dir, dir);
  double b = 2.0 * dot(w, dir);
  double c = dot(w, w) - r * r;
  double disc = b * b - 4 * a * c;
  if (disc < 0) return -1.0;
  double t = (-b - std::sqrt(disc)) / (2 * a);
  return t > 0 ? t : -1.0;
}

// A model whose only visible capsule is the skull->nose bone; all other
// radii are zero so they cannot hit.
SkeletonModel singleBoneModel() {
  SkeletonModel model = SkeletonModel::standardMouse();
  for (auto& joint : model.joints) joint.capsule_radius = 0.0;
  model.joints[kNose].capsule_radius = 20.0;
  return model;
}

std::array<Vec3, kJointCount> mirroredY(const std::array<Vec3, kJointCount>& joints) {
  std::array<Vec3, kJointCount> out = joints;
  // Swap left/right joints and negate y so the skeleton stays well-formed.
  auto swap_pair = [&](int a, int b) { std::swap(out[static_cast<std::size_t>(a)],
                                                 out[static_cast<std::size_t>(b)]); };
  swap_pair(kEarLeft, kEarRight);
  swap_pair(kHipLeft, kHipRight);
  swap_pair(kForeLeftUpper, kForeRightUpper);
  swap_pair(kForeLeftLower, kForeRightLower);
  swap_pair(kHindLeftUpper, kHindRightUpper);
  swap_pair(kHindLeftLower, kHindRightLower);
  swap_pair(kPawForeLeft, kPawForeRight);
  swap_pair(kPawHindLeft, kPawHindRight);
  for (Vec3& j : out) j.y = -j.y;
  return out;
}

}  // namespace

TEST_CASE("ray-capsule depth matches the sphere oracle for degenerate capsules") {
  Rng rng(44);
  Vec3 origin{0, 0, 600};
  for (int trial = 0; trial < 500; ++trial) {
    Vec3 center{rng.uniform(-80, 80), rng.uniform(-80, 80), rng.uniform(5, 60)};
    double radius = rng.uniform(1.0, 15.0);
    double dx = rng.uniform(-0.3, 0.3);
    double dy = rng.uniform(-0.3, 0.3);
    double got = rayCapsuleDepth(origin, dx, dy, center, center, radius);
    double expected = raySphereOracle(origin, Vec3{dx, dy, -1.0}, center, radius);
    if (expected < 0) {
      CHECK(got < 0);
    } else {
      CHECK(got == doctest::Approx(expected).epsilon(1e-9));
    }
  }
}

TEST_CASE("ray-capsule handles body hits between the caps") {
  // Horizontal capsule along x at height 30; a vertical ray over its middle
  // must hit the cylinder at depth 600 - (30 + r).
  Vec3 a{-20, 0, 30}, b{20, 0, 30};
  double r = 5.0;
  double t = rayCapsuleDepth(Vec3{0, 0, 600}, 0.0, 0.0, a, b, r);
  CHECK(t == doctest::Approx(600.0 - 35.0).epsilon(1e-12));
  // A ray far to the side misses.
  CHECK(rayCapsuleDepth(Vec3{0, 0, 600}, 0.2, 0.0, a, b, r) < 0);
}

TEST_CASE("zero-radius skeleton renders an empty image") {
  SkeletonModel model = SkeletonModel::standardMouse();
  for (auto& joint : model.joints) joint.capsule_radius = 0.0;
  std::array<Vec3, kJointCount> joints = forwardKinematics(model, SkeletonPose{});
  Camera camera = Camera::standardTopView(64);
  RenderResult render = renderPose(model, joints, camera);
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) {
      CHECK(render.depth.at(x, y) == render.depth.background_mm);
      CHECK(render.labels.at(x, y) == static_cast<std::uint8_t>(PartClass::Background));
    }
  }
}

TEST_CASE("a single vertical capsule renders a centered disk at the analytic depth") {
  SkeletonModel model = singleBoneModel();
  std::array<Vec3, kJointCount> joints{};
  // The visible bone runs skull -> nose: make it vertical under pixel (31, 31).
  Camera camera = Camera::standardTopView(64);
  camera.cx = 31.5;
  camera.cy = 31.5;
  joints[kSkull] = Vec3{0, 0, 10};
  joints[kNose] = Vec3{0, 0, 40};
  RenderResult render = renderPose(model, joints, camera);

  // Center pixel ray goes straight down: depth = height - (top + radius).
  CHECK(render.depth.at(31, 31) == doctest::Approx(600.0 - 60.0).epsilon(1e-9));
  CHECK(render.labels.at(31, 31) == static_cast<std::uint8_t>(PartClass::Head));

  // Foreground pixel count close to the projected disk area at the capsule's
  // silhouette depth.
  int foreground = 0;
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) foreground += render.depth.foreground(x, y) ? 1 : 0;
  }
  double pixel_radius = camera.focal * 20.0 / (600.0 - 40.0);
  double expected_area = 3.14159265358979 * pixel_radius * pixel_radius;
  CHECK(foreground > 0.8 * expected_area);
  CHECK(foreground < 1.3 * expected_area);
}

TEST_CASE("depth and label foreground masks are identical on random poses") {
  SkeletonModel model = SkeletonModel::standardMouse();
  PoseLibrary library;
  PerturbationRanges ranges;
  Camera camera = Camera::standardTopView(64);
  auto poses = samplePoses(model, library, ranges, 100, 45);
  for (const SkeletonPose& pose : poses) {
    RenderResult render = renderPose(model, forwardKinematics(model, pose), camera);
    bool any_foreground = false;
    for (int y = 0; y < 64; ++y) {
      for (int x = 0; x < 64; ++x) {
        CHECK(render.depth.foreground(x, y) == render.labels.foreground(x, y));
        if (render.depth.foreground(x, y)) {
          any_foreground = true;
          CHECK(render.depth.at(x, y) > 0.0f);
          CHECK(render.depth.at(x, y) < render.depth.background_mm);
        }
      }
    }
    CHECK(any_foreground);
  }
}

TEST_CASE("mirroring the pose swaps left/right label counts exactly") {
  SkeletonModel model = SkeletonModel::standardMouse();
  PoseLibrary library;
  PerturbationRanges ranges;
  Camera camera = Camera::standardTopView(64);
  auto poses = samplePoses(model, library, ranges, 20, 46);
  for (const SkeletonPose& pose : poses) {
    std::array<Vec3, kJointCount> joints = forwardKinematics(model, pose);
    LabelImage labels = renderLabels(model, joints, camera);
    LabelImage mirrored = renderLabels(model, mirroredY(joints), camera);
    std::array<std::int64_t, 7> count_a{}, count_b{};
    for (int y = 0; y < 64; ++y) {
      for (int x = 0; x < 64; ++x) {
        ++count_a[labels.at(x, y)];
        ++count_b[mirrored.at(x, y)];
      }
    }
    auto idx = [](PartClass c) { return static_cast<std::size_t>(c); };
    CHECK(count_a[idx(PartClass::Head)] == count_b[idx(PartClass::Head)]);
    CHECK(count_a[idx(PartClass::Tail)] == count_b[idx(PartClass::Tail)]);
    CHECK(count_a[idx(PartClass::Background)] == count_b[idx(PartClass::Background)]);
    CHECK(count_a[idx(PartClass::FrontLeft)] == count_b[idx(PartClass::FrontRight)]);
    CHECK(count_a[idx(PartClass::FrontRight)] == count_b[idx(PartClass::FrontLeft)]);
    CHECK(count_a[idx(PartClass::RearLeft)] == count_b[idx(PartClass::RearRight)]);
    CHECK(count_a[idx(PartClass::RearRight)] == count_b[idx(PartClass::RearLeft)]);
  }
}

TEST_CASE("joints at or behind the camera are a render error") {
  SkeletonModel model = SkeletonModel::standardMouse();
  std::array<Vec3, kJointCount> joints = forwardKinematics(model, SkeletonPose{});
  joints[kNose].z = 650.0;
  CHECK_THROWS_AS(renderPose(model, joints, Camera::standardTopView(64)), std::runtime_error);
}

TEST_CASE("noise leaves sigma zero untouched and matches the requested sigma") {
  SkeletonModel model = SkeletonModel::standardMouse();
  Camera camera = Camera::standardTopView(64);
  DepthImage image = renderDepth(model, forwardKinematics(model, SkeletonPose{}), camera);

  Rng rng(47);
  DepthImage same = addNoise(image, 0.0, rng);
  CHECK(same.values == image.values);

  // Empirical std over repeated draws of one foreground pixel.
  int fx = -1, fy = -1;
  for (int y = 0; y < 64 && fx < 0; ++y) {
    for (int x = 0; x < 64; ++x) {
      if (image.foreground(x, y)) {
        fx = x;
        fy = y;
        break;
      }
    }
  }
  REQUIRE(fx >= 0);
  const int n = 10000;
  double sum = 0.0, sum_sq = 0.0;
  Rng noise_rng(48);
  for (int i = 0; i < n; ++i) {
    DepthImage noisy = addNoise(image, 3.0, noise_rng);
    double delta = noisy.at(fx, fy) - image.at(fx, fy);
    sum += delta;
    sum_sq += delta * delta;
  }
  double mean = sum / n;
  double std_dev = std::sqrt(sum_sq / n - mean * mean);
  CHECK(std_dev == doctest::Approx(3.0).epsilon(0.05));

  // Even huge noise never flips the masks.
  Rng big_rng(49);
  DepthImage big = addNoise(image, 500.0, big_rng);
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) {
      CHECK(big.foreground(x, y) == image.foreground(x, y));
      CHECK(big.at(x, y) > 0.0f);
    }
  }
}
