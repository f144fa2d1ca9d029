#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "mousepose/geometry.hpp"

namespace mousepose {

// The twelve main-body joints estimable from the overhead camera
// (spine 1-8 including the two tail joints, ears 9-10, hips 11-12).
inline constexpr int kTopJointCount = 12;

enum class ForestMode : std::uint8_t { Classification, Regression };
enum class FeatureFamily : std::uint8_t { Axis2D, DepthOffset };
enum class Axis2D : std::uint8_t { X, Y };

// A split feature: either one coordinate of a 2D point, or a single-probe
// depth-difference feature parameterized by a 2D pixel offset. The Axis2D
// axis is fixed by the parity of the node level at construction time
// (even level -> X, odd -> Y).
struct FeatureDescriptor {
  FeatureFamily family = FeatureFamily::Axis2D;
  Axis2D axis = Axis2D::X;
  Vec2 offset{};  // pixels at the reference depth (DepthOffset only)
};

// Binary node test: go left when feature(x) > threshold.
struct SplitTest {
  FeatureDescriptor feature{};
  double threshold = 0.0;
};

// Single-probe depth-difference feature parameters. The pixel offset is
// scaled by reference_depth / d(x) so the probe covers a fixed physical
// footprint; probes off the image or onto the background read the
// background depth.
struct DepthFeatureConfig {
  double reference_depth = 570.0;   // mm at which the offset is exactly in pixels
  double max_offset_radius = 20.0;  // pixels
  double background_depth = 600.0;  // mm
};

// Per-joint payload of a regression leaf.
struct JointLeaf {
  Vec3f mean_offset{};       // mm; mean of the offsets within the proximity radius
  std::int32_t support = 0;  // number of offsets that contributed
  bool low_confidence = false;
};

struct LeafModel {
  // Classification: normalized class histogram and its argmax.
  std::vector<double> histogram;
  std::int32_t label = -1;
  // Regression: one entry per top-view joint.
  std::array<JointLeaf, kTopJointCount> joints{};
};

struct TreeNode {
  SplitTest test{};
  std::int32_t left = -1;  // < 0 marks a leaf
  std::int32_t right = -1;
  std::int32_t leaf = -1;  // index into Tree::leaves when a leaf

  bool isLeaf() const { return left < 0; }
};

// Node-arena binary tree. Replaced subtrees simply become unreachable;
// serialization writes the reachable nodes in preorder.
struct Tree {
  std::vector<TreeNode> nodes;
  std::vector<LeafModel> leaves;
  std::int32_t root = 0;

  std::int32_t addLeaf(LeafModel model) {
    leaves.push_back(std::move(model));
    nodes.push_back(TreeNode{{}, -1, -1, static_cast<std::int32_t>(leaves.size() - 1)});
    return static_cast<std::int32_t>(nodes.size() - 1);
  }

  std::int32_t addSplit(const SplitTest& test, std::int32_t left, std::int32_t right) {
    nodes.push_back(TreeNode{test, left, right, -1});
    return static_cast<std::int32_t>(nodes.size() - 1);
  }

  const LeafModel& leafAt(std::int32_t node) const { return leaves[nodes[node].leaf]; }
};

struct TrainParams {
  std::int32_t num_trees = 5;
  std::int32_t m = 50;                  // candidate features (DepthOffset) or thresholds (Axis2D) per node
  std::int32_t thresholds_per_feature = 1;  // thresholds tried per DepthOffset feature
  std::int32_t leaf_capacity = 60;      // l_n: fewer samples than this makes a leaf
  std::int32_t max_levels = 20;         // L: node levels 0..L-1
  double lambda_max = 100.0;            // mm^2 bound on the leaf offset covariance spectrum
  double bagging_fraction = 0.0;        // 0 disables per-tree subsampling
  double tau = 10.0;                    // reserved; not consumed by any operation
  std::uint64_t seed = 0;
  std::array<double, kTopJointCount> epsilon{};  // per-joint proximity radii, mm
};

// Paper defaults: 10 mm paws, 15 mm limbs and ears, 50 mm tail, 25 mm rest.
// Of the twelve top-view joints: 1-6 spine 25, 7-8 tail 50, 9-10 ears 15,
// 11-12 hips 25.
inline std::array<double, kTopJointCount> defaultTopJointEpsilons() {
  return {25, 25, 25, 25, 25, 25, 50, 50, 15, 15, 25, 25};
}

struct Forest {
  ForestMode mode = ForestMode::Classification;
  FeatureFamily features = FeatureFamily::Axis2D;
  std::int32_t num_classes = 0;             // classification only
  TrainParams params{};
  DepthFeatureConfig depth_features{};      // DepthOffset forests only
  std::vector<Tree> trees;
};

// Routes one example to a leaf; the feature evaluator maps a
// FeatureDescriptor to the example's feature response.
template <class FeatureFn>
std::int32_t route(const Tree& tree, FeatureFn&& feature) {
  std::int32_t node = tree.root;
  while (!tree.nodes[node].isLeaf()) {
    const TreeNode& n = tree.nodes[node];
    node = feature(n.test.feature) > n.test.threshold ? n.left : n.right;
  }
  return node;
}

// Majority vote over per-tree leaf labels; ties resolve to the lowest
// class id.
template <class FeatureFn>
std::int32_t predictClass(const Forest& forest, FeatureFn&& feature) {
  std::vector<int> votes(static_cast<std::size_t>(forest.num_classes), 0);
  for (const Tree& tree : forest.trees) {
    std::int32_t leaf = route(tree, feature);
    ++votes[static_cast<std::size_t>(tree.leafAt(leaf).label)];
  }
  int best = 0;
  for (int c = 1; c < forest.num_classes; ++c) {
    if (votes[static_cast<std::size_t>(c)] > votes[static_cast<std::size_t>(best)]) best = c;
  }
  return best;
}

// Depth (edges) of the subtree rooted at node.
int treeDepth(const Tree& tree, std::int32_t node);

// Number of nodes reachable from the root.
int reachableNodeCount(const Tree& tree);

}  // namespace mousepose
