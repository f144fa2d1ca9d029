#pragma once

#include "mousepose/disc_training.hpp"
#include "mousepose/estimate.hpp"
#include "mousepose/ik.hpp"
#include "mousepose/pixel_dataset.hpp"

namespace mousepose {

// End-to-end synthetic joint-regression benchmark: render, train a baseline
// offset-regression forest, retrain it discriminatively, evaluate both on
// held-out images.
// Overhead camera for a given resolution; the focal keeps the mouse and its
// translation range inside the frame.
Camera makeCamera(int width, int height);

struct PoseBenchConfig {
  std::uint64_t seed = 0;
  int image_width = 64;
  int image_height = 64;
  int train_images = 5000;
  int test_images = 500;
  int train_pixels_per_image = 20;
  int disc_pixels_per_image = 40;
  int query_pixels = 200;
  TrainParams train{};
  DiscParams disc{};
  DepthFeatureConfig features{};
  PerturbationRanges ranges{};
  std::vector<double> noise_sigmas{0, 1, 2, 3, 4, 5};

  static PoseBenchConfig deskScale(std::uint64_t seed);
};

struct PoseEvalResult {
  std::array<double, kTopJointCount> per_joint{};  // mm, mean over images
  double mean = 0.0;                               // mean of the per-joint means
  int missing = 0;                                 // joint estimates missing anywhere
};

// Mean joint error of the forest over the scenes, with optional test-time
// depth noise.
PoseEvalResult evaluatePose(const Forest& forest, const SceneSet& scenes, const Camera& camera,
                            int query_pixels, double noise_sigma, std::uint64_t seed);

struct PoseBenchResult {
  Camera camera{};
  std::shared_ptr<const SceneSet> test_scenes;
  Forest baseline;
  Forest disc;
  PoseEvalResult baseline_eval{};
  PoseEvalResult disc_eval{};
  std::vector<std::pair<double, double>> noise_curve;  // (sigma, mean error) of disc
  RetrainLog log;
};

PoseBenchResult runPoseBench(const PoseBenchConfig& cfg);

// Per-pixel part-labeling benchmark at the paper's sigma = 16 depth noise.
struct LabelBenchConfig {
  std::uint64_t seed = 0;
  int image_width = 64;
  int image_height = 64;
  int train_images = 400;
  int disc_images = 400;
  int test_images = 100;
  int pixels_per_image = 250;
  double noise_sigma = 16.0;
  TrainParams train{};
  DiscParams disc{};
  DepthFeatureConfig features{};
  PerturbationRanges ranges{};

  static LabelBenchConfig deskScale(std::uint64_t seed);
};

struct LabelBenchResult {
  Camera camera{};
  std::shared_ptr<const SceneSet> test_scenes;
  Forest baseline;
  Forest disc;
  double baseline_accuracy = 0.0;
  double disc_accuracy = 0.0;
  ConfusionMatrix confusion{};  // of the retrained forest
  RetrainLog log;
};

LabelBenchResult runLabelBench(const LabelBenchConfig& cfg);

// IK round trip over sampled poses: run FK, keep the main joints and true
// paw positions, re-solve the limbs. Reports the worst bone-length and
// right-angle deviations plus limb-joint position errors.
struct IkRoundTrip {
  double max_bone_length_error_mm = 0.0;
  double max_hind_angle_error_rad = 0.0;
  double max_main_joint_shift_mm = 0.0;
  std::array<double, kJointCount> mean_position_error_mm{};  // limb joints only
  std::size_t poses = 0;
};
IkRoundTrip ikRoundTrip(const SkeletonModel& model, std::size_t pose_count, std::uint64_t seed);

}  // namespace mousepose
