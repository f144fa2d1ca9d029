#pragma once

#include <optional>

#include "mousepose/train_problem.hpp"

namespace mousepose {

struct BestSplitResult {
  SplitTest test{};
  double gain = 0.0;
  int candidate_index = -1;
};

// Exhaustive argmax of the gain over an explicit candidate list (rows are
// positions into the problem). A candidate is valid only when both sides are
// non-empty and its gain is strictly positive; ties resolve to the lowest
// candidate index. Returns nullopt when no candidate is valid, in which case
// the caller makes a leaf.
std::optional<BestSplitResult> bestSplit(const TrainingProblem& problem,
                                         std::span<const std::int32_t> rows,
                                         std::span<const SplitTest> candidates);

// Gain of a single test on the given examples: entropy gain for
// classification, compactness gain for regression. Degenerate partitions
// score exactly 0.
double splitGain(const TrainingProblem& problem, std::span<const std::int32_t> rows,
                 const SplitTest& test);

// Leaf construction. Classification: normalized histogram, label = argmax
// (ties to the lowest class id). Regression: per-joint mean of within-radius
// offsets; low confidence when the top eigenvalue of their covariance
// reaches lambda_max.
LeafModel makeLeafClassification(std::span<const std::uint8_t> labels, int num_classes);
LeafModel makeLeafRegression(std::span<const JointOffsets> examples, double lambda_max);

// Grows a subtree over the problem rows [begin, end), whose root sits at the
// given absolute level, appending nodes to the tree arena. Returns the new
// subtree root. Rows end up permuted into per-leaf contiguous ranges.
std::int32_t growSubtree(Tree& tree, TrainingProblem& problem, std::size_t begin,
                         std::size_t end, int level, const TrainParams& params, Rng& rng);

// Grows one tree from the whole problem starting at start_level.
Tree growTree(TrainingProblem& problem, const TrainParams& params, int start_level, Rng& rng);

// Trains params.num_trees trees in parallel, each from an independent stream
// derived from params.seed and the tree index. bagging_fraction in (0, 1)
// gives each tree a without-replacement subsample of the data.
Forest trainForest(const TrainingProblem& data, const TrainParams& params);

// Physically partitions rows [begin, end) by the test (left = feature >
// threshold); returns the boundary position.
std::size_t partitionRange(TrainingProblem& problem, std::size_t begin, std::size_t end,
                           const SplitTest& test);

// Without-replacement subsample of [0, n), returned sorted.
std::vector<std::int32_t> sampleRowSubset(std::size_t n, std::size_t keep, Rng& rng);

}  // namespace mousepose
