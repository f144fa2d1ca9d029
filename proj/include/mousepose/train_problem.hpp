#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "mousepose/forest.hpp"
#include "mousepose/rng.hpp"
#include "mousepose/split_criteria.hpp"

namespace mousepose {

// Bridges a dataset and a feature family to the trainers. A problem owns a
// mutable row ordering: trainers partition rows in place so every tree node
// works on one contiguous range. Cloning yields an independent ordering over
// the same underlying data (one clone per tree, so trees can train in
// parallel).
class TrainingProblem {
 public:
  virtual ~TrainingProblem() = default;

  virtual ForestMode mode() const = 0;
  virtual FeatureFamily featureFamily() const = 0;
  virtual std::size_t size() const = 0;

  virtual std::unique_ptr<TrainingProblem> clone() const = 0;
  // Restricts the problem to the given rows (current positions), in order.
  virtual void keepRows(std::span<const std::int32_t> rows) = 0;
  virtual void swapRows(std::size_t a, std::size_t b) = 0;

  // Feature responses for the contiguous row range [begin, end).
  virtual void evalFeature(const FeatureDescriptor& feature, std::size_t begin, std::size_t end,
                           float* out) const = 0;
  // Feature responses for a gathered list of row positions.
  virtual void evalFeatureRows(const FeatureDescriptor& feature,
                               std::span<const std::int32_t> rows, float* out) const = 0;

  // One candidate split feature for a node at the given absolute level.
  virtual FeatureDescriptor sampleFeature(int level, Rng& rng) const = 0;
  // Candidate thresholds for a feature, given its responses on the node's
  // examples (Axis2D ignores them and draws from the 3-decimal grid;
  // DepthOffset draws uniformly over the empirical [min, max]).
  virtual void sampleThresholds(const FeatureDescriptor& feature, std::span<const float> values,
                                int count, Rng& rng, std::vector<double>& out) const = 0;
  // Whether sampleThresholds reads the values span (lets callers skip the
  // feature pass when it does not).
  virtual bool thresholdsNeedValues() const { return true; }
  // Evaluation parameters for DepthOffset features, copied into the trained
  // forest so saved models are self-contained.
  virtual DepthFeatureConfig depthConfig() const { return {}; }

  // Classification problems.
  virtual int numClasses() const { return 0; }
  virtual const std::uint8_t* labels() const { return nullptr; }

  // Regression problems.
  virtual const JointOffsets* offsets() const { return nullptr; }
  virtual const std::array<double, kTopJointCount>* epsilons() const { return nullptr; }
};

}  // namespace mousepose
