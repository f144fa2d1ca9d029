#pragma once

#include <span>

#include "mousepose/forest.hpp"
#include "mousepose/images.hpp"

namespace mousepose {

struct JointEstimate {
  struct Entry {
    Vec3 position{};
    bool low_confidence = false;
    bool missing = true;
  };
  std::array<Entry, kTopJointCount> joints{};
};

// Routes sampled foreground pixels through every tree and averages, per
// joint, the offset votes of leaves that hold an estimate. High-confidence
// votes win; low-confidence ones are used only when no tree offers better.
// Throws when the image has no foreground.
JointEstimate estimateJoints(const Forest& forest, const DepthImage& image, const Camera& camera,
                             int query_pixels, std::uint64_t seed);

struct JointErrorReport {
  std::array<double, kTopJointCount> per_joint{};  // mm; NaN when missing
  double mean = 0.0;                               // over the joints present
  int missing = 0;
};

JointErrorReport jointError(const JointEstimate& estimate,
                            std::span<const Vec3> true_joints);

// Per-pixel part labeling: average the leaf histograms across trees and take
// the argmax (ties to the lowest class id). Background pixels untouched.
LabelImage partLabelImage(const Forest& forest, const DepthImage& image);

struct ConfusionMatrix {
  std::array<std::array<double, kPartClassCount>, kPartClassCount> rows{};  // row-normalized
  std::array<std::int64_t, kPartClassCount> support{};  // truth pixels per class

  double diagonal(int cls) const { return rows[static_cast<std::size_t>(cls)][static_cast<std::size_t>(cls)]; }
};

// Row = truth class, column = predicted, normalized over foreground pixels.
// Throws when the foreground masks differ.
ConfusionMatrix confusionMatrix(const LabelImage& predicted, const LabelImage& truth);

// Fraction of foreground pixels labeled correctly.
double labelingAccuracy(const LabelImage& predicted, const LabelImage& truth);

}  // namespace mousepose
