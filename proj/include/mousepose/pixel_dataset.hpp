#pragma once

#include <memory>

#include "mousepose/pose_library.hpp"
#include "mousepose/render.hpp"
#include "mousepose/train_problem.hpp"

namespace mousepose {

// One synthetic observation: depth and part labels with the ground truth
// that produced them.
struct RenderedScene {
  DepthImage depth;
  LabelImage labels;
  std::array<Vec3, kJointCount> joints{};
};

using SceneSet = std::vector<RenderedScene>;

// Renders count posed mice (parallel across images), optionally with depth
// noise. Deterministic by seed.
std::shared_ptr<const SceneSet> renderScenes(const SkeletonModel& model,
                                             const PerturbationRanges& ranges,
                                             const Camera& camera, std::size_t count,
                                             double noise_sigma, std::uint64_t seed);

struct PixelRow {
  std::int32_t image = 0;
  std::int16_t px = 0;
  std::int16_t py = 0;
  float depth = 0.0f;
};

// Uniform foreground pixel sample of one image, without replacement; all
// foreground pixels when fewer than wanted.
std::vector<PixelRow> samplePixels(const DepthImage& image, std::int32_t image_index,
                                   int per_image, std::uint64_t seed);

// Depth-feature training problems over a shared scene set. Pixel rows carry
// their observed depth; regression rows precompute the per-joint offsets
// from the pixel's back-projection to the 12 main joints.
class PixelProblem final : public TrainingProblem {
 public:
  // Classification over part labels.
  static std::unique_ptr<PixelProblem> makeClassification(
      std::shared_ptr<const SceneSet> scenes, const Camera& camera,
      const DepthFeatureConfig& features, int pixels_per_image, std::uint64_t seed);

  // Per-joint offset regression.
  static std::unique_ptr<PixelProblem> makeRegression(
      std::shared_ptr<const SceneSet> scenes, const Camera& camera,
      const DepthFeatureConfig& features, const std::array<double, kTopJointCount>& epsilon,
      int pixels_per_image, std::uint64_t seed);

  ForestMode mode() const override { return mode_; }
  FeatureFamily featureFamily() const override { return FeatureFamily::DepthOffset; }
  std::size_t size() const override { return rows_.size(); }
  std::unique_ptr<TrainingProblem> clone() const override;
  void keepRows(std::span<const std::int32_t> rows) override;
  void swapRows(std::size_t a, std::size_t b) override;
  void evalFeature(const FeatureDescriptor& feature, std::size_t begin, std::size_t end,
                   float* out) const override;
  void evalFeatureRows(const FeatureDescriptor& feature, std::span<const std::int32_t> rows,
                       float* out) const override;
  FeatureDescriptor sampleFeature(int level, Rng& rng) const override;
  void sampleThresholds(const FeatureDescriptor& feature, std::span<const float> values,
                        int count, Rng& rng, std::vector<double>& out) const override;
  int numClasses() const override { return mode_ == ForestMode::Classification ? kPartClassCount : 0; }
  const std::uint8_t* labels() const override {
    return labels_.empty() ? nullptr : labels_.data();
  }
  const JointOffsets* offsets() const override {
    return offsets_.empty() ? nullptr : offsets_.data();
  }
  const std::array<double, kTopJointCount>* epsilons() const override {
    return mode_ == ForestMode::Regression ? &epsilon_ : nullptr;
  }
  DepthFeatureConfig depthConfig() const override { return features_; }

  const DepthFeatureConfig& featureConfig() const { return features_; }
  const PixelRow& row(std::size_t i) const { return rows_[i]; }

 private:
  std::shared_ptr<const SceneSet> scenes_;
  DepthFeatureConfig features_{};
  ForestMode mode_ = ForestMode::Classification;
  std::array<double, kTopJointCount> epsilon_{};
  std::vector<PixelRow> rows_;
  std::vector<std::uint8_t> labels_;     // classification
  std::vector<JointOffsets> offsets_;    // regression
};

}  // namespace mousepose
