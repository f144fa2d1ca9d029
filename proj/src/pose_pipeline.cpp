#include "mousepose/pose_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mousepose/parallel.hpp"
#include "mousepose/pose_library.hpp"

namespace mousepose {

Camera makeCamera(int width, int height) {
  Camera c;
  c.width = width;
  c.height = height;
  c.cx = width / 2.0;
  c.cy = height / 2.0;
  c.focal = 2.0 * std::max(width, height);
  return c;
}

PoseBenchConfig PoseBenchConfig::deskScale(std::uint64_t seed) {
  PoseBenchConfig cfg;
  cfg.seed = seed;
  cfg.train.num_trees = 7;
  cfg.train.m = 100;
  cfg.train.thresholds_per_feature = 5;
  cfg.train.leaf_capacity = 60;
  cfg.train.max_levels = 20;
  cfg.train.epsilon = defaultTopJointEpsilons();
  cfg.disc.m = 100;
  cfg.disc.leaf_capacity = 60;
  return cfg;
}

PoseEvalResult evaluatePose(const Forest& forest, const SceneSet& scenes, const Camera& camera,
                            int query_pixels, double noise_sigma, std::uint64_t seed) {
  std::vector<JointErrorReport> reports(scenes.size());
  parallelFor(scenes.size(), [&](std::size_t i) {
    const RenderedScene& scene = scenes[i];
    const DepthImage* image = &scene.depth;
    DepthImage noisy;
    if (noise_sigma > 0.0) {
      Rng rng(deriveSeed(seed, "eval-noise", i));
      noisy = addNoise(scene.depth, noise_sigma, rng);
      image = &noisy;
    }
    JointEstimate estimate =
        estimateJoints(forest, *image, camera, query_pixels, deriveSeed(seed, "eval-query", i));
    reports[i] = jointError(estimate, {scene.joints.data(), kTopJointCount});
  });

  PoseEvalResult result;
  std::array<std::int64_t, kTopJointCount> counts{};
  for (const JointErrorReport& report : reports) {
    result.missing += report.missing;
    for (int j = 0; j < kTopJointCount; ++j) {
      auto k = static_cast<std::size_t>(j);
      if (!std::isnan(report.per_joint[k])) {
        result.per_joint[k] += report.per_joint[k];
        ++counts[k];
      }
    }
  }
  double sum = 0.0;
  for (int j = 0; j < kTopJointCount; ++j) {
    auto k = static_cast<std::size_t>(j);
    result.per_joint[k] = counts[k] > 0 ? result.per_joint[k] / static_cast<double>(counts[k])
                                        : std::numeric_limits<double>::quiet_NaN();
    sum += result.per_joint[k];
  }
  result.mean = sum / kTopJointCount;
  return result;
}

PoseBenchResult runPoseBench(const PoseBenchConfig& cfg) {
  SkeletonModel model = SkeletonModel::standardMouse();
  PoseBenchResult result;
  result.camera = makeCamera(cfg.image_width, cfg.image_height);

  DepthFeatureConfig features = cfg.features;
  features.background_depth = result.camera.height_mm;

  auto train_scenes =
      renderScenes(model, cfg.ranges, result.camera, static_cast<std::size_t>(cfg.train_images),
                   0.0, deriveSeed(cfg.seed, "pose-train-scenes"));
  result.test_scenes =
      renderScenes(model, cfg.ranges, result.camera, static_cast<std::size_t>(cfg.test_images),
                   0.0, deriveSeed(cfg.seed, "pose-test-scenes"));

  std::array<double, kTopJointCount> epsilon = cfg.train.epsilon;
  auto train_problem =
      PixelProblem::makeRegression(train_scenes, result.camera, features, epsilon,
                                   cfg.train_pixels_per_image, deriveSeed(cfg.seed, "pose-dt"));
  TrainParams tp = cfg.train;
  tp.seed = deriveSeed(cfg.seed, "pose-baseline");
  result.baseline = trainForest(*train_problem, tp);

  auto disc_problem =
      PixelProblem::makeRegression(train_scenes, result.camera, features, epsilon,
                                   cfg.disc_pixels_per_image, deriveSeed(cfg.seed, "pose-dd"));
  DiscParams dp = cfg.disc;
  dp.seed = deriveSeed(cfg.seed, "pose-disc");
  result.disc =
      discTrainForest(result.baseline, *disc_problem, dp, DiscScoring::SubtreeMetric, &result.log);

  result.baseline_eval = evaluatePose(result.baseline, *result.test_scenes, result.camera,
                                      cfg.query_pixels, 0.0, deriveSeed(cfg.seed, "pose-eval-b"));
  result.disc_eval = evaluatePose(result.disc, *result.test_scenes, result.camera,
                                  cfg.query_pixels, 0.0, deriveSeed(cfg.seed, "pose-eval-d"));
  for (double sigma : cfg.noise_sigmas) {
    PoseEvalResult eval =
        evaluatePose(result.disc, *result.test_scenes, result.camera, cfg.query_pixels, sigma,
                     deriveSeed(cfg.seed, "pose-eval-noise"));
    result.noise_curve.emplace_back(sigma, eval.mean);
  }
  return result;
}

LabelBenchConfig LabelBenchConfig::deskScale(std::uint64_t seed) {
  LabelBenchConfig cfg;
  cfg.seed = seed;
  cfg.train.num_trees = 7;
  cfg.train.m = 100;
  cfg.train.thresholds_per_feature = 5;
  cfg.train.leaf_capacity = 60;
  cfg.train.max_levels = 13;
  cfg.disc.m = 100;
  cfg.disc.leaf_capacity = 60;
  return cfg;
}

LabelBenchResult runLabelBench(const LabelBenchConfig& cfg) {
  SkeletonModel model = SkeletonModel::standardMouse();
  LabelBenchResult result;
  result.camera = makeCamera(cfg.image_width, cfg.image_height);

  DepthFeatureConfig features = cfg.features;
  features.background_depth = result.camera.height_mm;

  auto train_scenes =
      renderScenes(model, cfg.ranges, result.camera, static_cast<std::size_t>(cfg.train_images),
                   cfg.noise_sigma, deriveSeed(cfg.seed, "label-train-scenes"));
  auto disc_scenes =
      renderScenes(model, cfg.ranges, result.camera, static_cast<std::size_t>(cfg.disc_images),
                   cfg.noise_sigma, deriveSeed(cfg.seed, "label-disc-scenes"));
  result.test_scenes =
      renderScenes(model, cfg.ranges, result.camera, static_cast<std::size_t>(cfg.test_images),
                   cfg.noise_sigma, deriveSeed(cfg.seed, "label-test-scenes"));

  auto train_problem =
      PixelProblem::makeClassification(train_scenes, result.camera, features,
                                       cfg.pixels_per_image, deriveSeed(cfg.seed, "label-dt"));
  TrainParams tp = cfg.train;
  tp.seed = deriveSeed(cfg.seed, "label-baseline");
  result.baseline = trainForest(*train_problem, tp);

  auto disc_problem =
      PixelProblem::makeClassification(disc_scenes, result.camera, features,
                                       cfg.pixels_per_image, deriveSeed(cfg.seed, "label-dd"));
  DiscParams dp = cfg.disc;
  dp.seed = deriveSeed(cfg.seed, "label-disc");
  result.disc =
      discTrainForest(result.baseline, *disc_problem, dp, DiscScoring::SubtreeMetric, &result.log);

  // Aggregate per-pixel accuracy and confusion over the whole test set.
  const SceneSet& tests = *result.test_scenes;
  std::vector<LabelImage> base_pred(tests.size()), disc_pred(tests.size());
  parallelFor(tests.size(), [&](std::size_t i) {
    base_pred[i] = partLabelImage(result.baseline, tests[i].depth);
    disc_pred[i] = partLabelImage(result.disc, tests[i].depth);
  });
  std::int64_t base_correct = 0, disc_correct = 0, total = 0;
  std::array<std::array<std::int64_t, kPartClassCount>, kPartClassCount> counts{};
  for (std::size_t i = 0; i < tests.size(); ++i) {
    const LabelImage& truth = tests[i].labels;
    for (int y = 0; y < truth.height; ++y) {
      for (int x = 0; x < truth.width; ++x) {
        if (!truth.foreground(x, y)) continue;
        ++total;
        if (base_pred[i].at(x, y) == truth.at(x, y)) ++base_correct;
        if (disc_pred[i].at(x, y) == truth.at(x, y)) ++disc_correct;
        counts[truth.at(x, y)][disc_pred[i].at(x, y)] += 1;
      }
    }
  }
  result.baseline_accuracy = static_cast<double>(base_correct) / static_cast<double>(total);
  result.disc_accuracy = static_cast<double>(disc_correct) / static_cast<double>(total);
  for (int t = 0; t < kPartClassCount; ++t) {
    auto k = static_cast<std::size_t>(t);
    std::int64_t row = 0;
    for (std::int64_t c : counts[k]) row += c;
    result.confusion.support[k] = row;
    if (row == 0) continue;
    for (int p = 0; p < kPartClassCount; ++p) {
      result.confusion.rows[k][static_cast<std::size_t>(p)] =
          static_cast<double>(counts[k][static_cast<std::size_t>(p)]) / static_cast<double>(row);
    }
  }
  return result;
}

IkRoundTrip ikRoundTrip(const SkeletonModel& model, std::size_t pose_count, std::uint64_t seed) {
  PoseLibrary library;
  PerturbationRanges ranges;
  std::vector<SkeletonPose> poses =
      samplePoses(model, library, ranges, pose_count, deriveSeed(seed, "ik-poses"));

  const int limb_joints[] = {kForeLeftUpper, kForeLeftLower, kForeRightUpper, kForeRightLower,
                             kHindLeftUpper, kHindLeftLower, kHindRightUpper, kHindRightLower,
                             kPawForeLeft,   kPawForeRight,  kPawHindLeft,    kPawHindRight};
  IkRoundTrip result;
  result.poses = poses.size();

  for (const SkeletonPose& pose : poses) {
    std::array<Vec3, kJointCount> truth = forwardKinematics(model, pose);
    std::array<Vec3, kMainJointCount> main;
    for (int j = 0; j < kMainJointCount; ++j) {
      main[static_cast<std::size_t>(j)] = truth[static_cast<std::size_t>(j)];
    }
    std::array<std::optional<Vec3>, kLimbCount> paws{
        truth[kPawForeLeft], truth[kPawForeRight], truth[kPawHindLeft], truth[kPawHindRight]};
    IkResult fused = ikFuse(model, main, paws);

    for (int j = 0; j < kMainJointCount; ++j) {
      auto k = static_cast<std::size_t>(j);
      result.max_main_joint_shift_mm =
          std::max(result.max_main_joint_shift_mm, distance(fused.joints[k], truth[k]));
    }
    for (int j : limb_joints) {
      auto k = static_cast<std::size_t>(j);
      double expected = pose.scale * model.boneLength(j);
      int parent = model.joints[k].parent;
      double actual = distance(fused.joints[k], fused.joints[static_cast<std::size_t>(parent)]);
      result.max_bone_length_error_mm =
          std::max(result.max_bone_length_error_mm, std::abs(actual - expected));
      result.mean_position_error_mm[k] += distance(fused.joints[k], truth[k]);
    }
    for (int upper : {kHindLeftUpper, kHindRightUpper}) {
      int lower = upper == kHindLeftUpper ? kHindLeftLower : kHindRightLower;
      int paw = upper == kHindLeftUpper ? kPawHindLeft : kPawHindRight;
      Vec3 a = fused.joints[static_cast<std::size_t>(upper)] -
               fused.joints[static_cast<std::size_t>(lower)];
      Vec3 b = fused.joints[static_cast<std::size_t>(paw)] -
               fused.joints[static_cast<std::size_t>(lower)];
      double angle = std::acos(std::clamp(dot(a, b) / (norm(a) * norm(b)), -1.0, 1.0));
      result.max_hind_angle_error_rad =
          std::max(result.max_hind_angle_error_rad, std::abs(angle - 1.5707963267948966));
    }
  }
  for (int j : limb_joints) {
    auto k = static_cast<std::size_t>(j);
    result.mean_position_error_mm[k] /= static_cast<double>(poses.size());
  }
  return result;
}

}  // namespace mousepose
