#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "mousepose/forest_io.hpp"
#include "mousepose/gauss_bench.hpp"
#include "mousepose/training.hpp"

using namespace mousepose;

namespace {

std::vector<LabeledPoint2D> randomPoints(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<LabeledPoint2D> points;
  points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    points.push_back({rng.uniform(), rng.uniform(),
                      static_cast<std::uint8_t>(rng.uniformIndex(2))});
  }
  return points;
}

TrainParams gaussParams() {
  TrainParams p;
  p.num_trees = 1;
  p.m = 20;
  p.thresholds_per_feature = 1;
  p.leaf_capacity = 4;
  p.max_levels = 8;
  p.seed = 99;
  return p;
}

std::string forestBytes(const Forest& forest) {
  std::ostringstream out;
  saveForest(forest, out);
  return out.str();
}

JointOffsets regressionExample(Vec3 offset_joint0,
                               const std::array<double, kTopJointCount>& epsilon) {
  JointOffsets e;
  for (auto& o : e.offset) o = Vec3{900, 900, 900};
  e.offset[0] = offset_joint0;
  e.within_radius = withinRadiusMask(e.offset, epsilon);
  return e;
}

}  // namespace

TEST_CASE("classification leaf: histogram, argmax label, ties to lowest id") {
  std::vector<std::uint8_t> two_one{0, 0, 1};
  LeafModel leaf = makeLeafClassification(two_one, 2);
  CHECK(leaf.histogram[0] == doctest::Approx(2.0 / 3.0));
  CHECK(leaf.histogram[1] == doctest::Approx(1.0 / 3.0));
  CHECK(leaf.label == 0);

  std::vector<std::uint8_t> single{0};
  leaf = makeLeafClassification(single, 2);
  CHECK(leaf.histogram[0] == 1.0);
  CHECK(leaf.histogram[1] == 0.0);
  CHECK(leaf.label == 0);

  std::vector<std::uint8_t> tie{1, 0};
  leaf = makeLeafClassification(tie, 2);
  CHECK(leaf.label == 0);

  CHECK(std::abs(leaf.histogram[0] + leaf.histogram[1] - 1.0) < 1e-9);
}

TEST_CASE("regression leaf: exact mean and confident when offsets agree") {
  auto epsilon = defaultTopJointEpsilons();
  std::vector<JointOffsets> examples(4, regressionExample(Vec3{5, -3, 2}, epsilon));
  LeafModel leaf = makeLeafRegression(examples, 100.0);
  CHECK(leaf.joints[0].support == 4);
  CHECK(toVec3(leaf.joints[0].mean_offset).x == doctest::Approx(5.0));
  CHECK_FALSE(leaf.joints[0].low_confidence);
}

TEST_CASE("regression leaf: wide 1D spread trips the eigenvalue gate") {
  auto epsilon = defaultTopJointEpsilons();
  // +-15 mm along x (still inside the 25 mm radius): the population
  // covariance is diagonal with lambda1 = 15^2 = 225 mm^2 >= 100.
  std::vector<JointOffsets> examples{regressionExample(Vec3{-15, 0, 0}, epsilon),
                                     regressionExample(Vec3{15, 0, 0}, epsilon)};
  LeafModel leaf = makeLeafRegression(examples, 100.0);
  CHECK(leaf.joints[0].support == 2);
  CHECK(toVec3(leaf.joints[0].mean_offset).x == doctest::Approx(0.0));
  CHECK(leaf.joints[0].low_confidence);  // variance 225 >= 100
}

TEST_CASE("regression leaf: joints with no nearby offsets have support 0") {
  auto epsilon = defaultTopJointEpsilons();
  std::vector<JointOffsets> examples{regressionExample(Vec3{1, 0, 0}, epsilon)};
  LeafModel leaf = makeLeafRegression(examples, 100.0);
  CHECK(leaf.joints[0].support == 1);
  for (int j = 1; j < kTopJointCount; ++j) {
    CHECK(leaf.joints[static_cast<std::size_t>(j)].support == 0);
  }
}

TEST_CASE("growTree makes a single leaf when the data is too small") {
  std::vector<LabeledPoint2D> points = randomPoints(3, 1);
  GaussianProblem problem(points);
  TrainParams params = gaussParams();
  params.leaf_capacity = 10;
  Rng rng(1);
  Tree tree = growTree(problem, params, 0, rng);
  CHECK(tree.nodes[static_cast<std::size_t>(tree.root)].isLeaf());
}

TEST_CASE("growTree makes a single leaf when only one level is allowed") {
  std::vector<LabeledPoint2D> points = randomPoints(100, 2);
  GaussianProblem problem(points);
  TrainParams params = gaussParams();
  params.max_levels = 1;
  Rng rng(1);
  Tree tree = growTree(problem, params, 0, rng);
  CHECK(tree.nodes[static_cast<std::size_t>(tree.root)].isLeaf());
}

TEST_CASE("tree depth never exceeds the level budget") {
  std::vector<LabeledPoint2D> points = randomPoints(500, 3);
  for (int max_levels : {1, 2, 4, 6}) {
    GaussianProblem problem(points);
    TrainParams params = gaussParams();
    params.max_levels = max_levels;
    params.leaf_capacity = 2;
    Rng rng(5);
    Tree tree = growTree(problem, params, 0, rng);
    CHECK(treeDepth(tree, tree.root) <= max_levels);
  }
}

TEST_CASE("training is deterministic in (data, seed)") {
  std::vector<LabeledPoint2D> points = randomPoints(100, 4);
  TrainParams params = gaussParams();
  params.num_trees = 3;
  GaussianProblem a(points), b(points);
  Forest fa = trainForest(a, params);
  Forest fb = trainForest(b, params);
  CHECK(forestBytes(fa) == forestBytes(fb));

  params.seed = 100;
  Forest fc = trainForest(GaussianProblem(points), params);
  CHECK(forestBytes(fa) != forestBytes(fc));
}

TEST_CASE("a one-tree forest equals growTree with the derived stream") {
  std::vector<LabeledPoint2D> points = randomPoints(200, 5);
  TrainParams params = gaussParams();
  Forest forest = trainForest(GaussianProblem(points), params);
  REQUIRE(forest.trees.size() == 1);

  GaussianProblem problem(points);
  Rng rng(deriveSeed(params.seed, "tree", 0));
  Tree tree = growTree(problem, params, 0, rng);
  Forest manual = forest;
  manual.trees[0] = tree;
  CHECK(forestBytes(forest) == forestBytes(manual));
}

TEST_CASE("bestSplit returns the only candidate when it is valid") {
  std::vector<LabeledPoint2D> points{{0.2, 0, 0}, {0.8, 0, 1}};
  GaussianProblem problem(points);
  std::vector<std::int32_t> rows{0, 1};
  std::vector<SplitTest> candidates{{FeatureDescriptor{FeatureFamily::Axis2D, Axis2D::X, {}}, 0.5}};
  auto best = bestSplit(problem, rows, candidates);
  REQUIRE(best.has_value());
  CHECK(best->candidate_index == 0);
  CHECK(best->test.threshold == 0.5);
}

TEST_CASE("bestSplit ties break to the lowest candidate index") {
  std::vector<LabeledPoint2D> points{{0.2, 0, 0}, {0.8, 0, 1}};
  GaussianProblem problem(points);
  std::vector<std::int32_t> rows{0, 1};
  // Both thresholds produce the identical perfect partition.
  std::vector<SplitTest> candidates{
      {FeatureDescriptor{FeatureFamily::Axis2D, Axis2D::X, {}}, 0.4},
      {FeatureDescriptor{FeatureFamily::Axis2D, Axis2D::X, {}}, 0.5}};
  auto best = bestSplit(problem, rows, candidates);
  REQUIRE(best.has_value());
  CHECK(best->candidate_index == 0);
}

TEST_CASE("bestSplit signals no valid split on a pure set") {
  std::vector<LabeledPoint2D> points{{0.2, 0, 0}, {0.8, 0, 0}, {0.5, 0, 0}};
  GaussianProblem problem(points);
  std::vector<std::int32_t> rows{0, 1, 2};
  std::vector<SplitTest> candidates{
      {FeatureDescriptor{FeatureFamily::Axis2D, Axis2D::X, {}}, 0.4},
      {FeatureDescriptor{FeatureFamily::Axis2D, Axis2D::X, {}}, 0.6}};
  CHECK_FALSE(bestSplit(problem, rows, candidates).has_value());
}

TEST_CASE("bestSplit matches exhaustive enumeration on random sets") {
  Rng rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t n = 2 + rng.uniformIndex(31);
    std::vector<LabeledPoint2D> points = randomPoints(n, rng.next());
    GaussianProblem problem(points);
    std::vector<std::int32_t> rows(n);
    for (std::size_t i = 0; i < n; ++i) rows[i] = static_cast<std::int32_t>(i);
    std::vector<SplitTest> candidates;
    std::size_t num_candidates = 1 + rng.uniformIndex(10);
    for (std::size_t c = 0; c < num_candidates; ++c) {
      candidates.push_back({FeatureDescriptor{FeatureFamily::Axis2D,
                                              rng.bernoulli(0.5) ? Axis2D::X : Axis2D::Y, {}},
                            rng.uniformIndex(1000) / 1000.0});
    }
    // Independent enumeration through the one-candidate gain path.
    int oracle_index = -1;
    double oracle_gain = 0.0;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      double gain = splitGain(problem, rows, candidates[c]);
      if (gain > 0.0 && gain > oracle_gain) {
        oracle_gain = gain;
        oracle_index = static_cast<int>(c);
      }
    }
    auto best = bestSplit(problem, rows, candidates);
    if (oracle_index < 0) {
      CHECK_FALSE(best.has_value());
    } else {
      REQUIRE(best.has_value());
      CHECK(best->candidate_index == oracle_index);
      CHECK(best->gain == doctest::Approx(oracle_gain).epsilon(1e-14));
    }
  }
}

TEST_CASE("route follows the feature comparison") {
  Tree tree;
  std::int32_t left = tree.addLeaf(makeLeafClassification(std::vector<std::uint8_t>{0}, 2));
  std::int32_t right = tree.addLeaf(makeLeafClassification(std::vector<std::uint8_t>{1}, 2));
  tree.root = tree.addSplit({FeatureDescriptor{FeatureFamily::Axis2D, Axis2D::X, {}}, 0.5},
                            left, right);
  CHECK(route(tree, [](const FeatureDescriptor&) { return 0.7f; }) == left);
  CHECK(route(tree, [](const FeatureDescriptor&) { return 0.5f; }) == right);

  Tree single;
  single.root = single.addLeaf(makeLeafClassification(std::vector<std::uint8_t>{0}, 2));
  CHECK(route(single, [](const FeatureDescriptor&) { return 0.0f; }) == single.root);
}

TEST_CASE("route agrees with a naive recursive reference on random examples") {
  std::vector<LabeledPoint2D> points = randomPoints(400, 6);
  TrainParams params = gaussParams();
  Forest forest = trainForest(GaussianProblem(points), params);
  const Tree& tree = forest.trees[0];

  // Independent reference: recursive descent instead of the iterative loop.
  auto reference = [&](auto&& self, std::int32_t node, const LabeledPoint2D& p) -> std::int32_t {
    const TreeNode& n = tree.nodes[static_cast<std::size_t>(node)];
    if (n.isLeaf()) return node;
    float value = n.test.feature.axis == Axis2D::X ? static_cast<float>(p.x)
                                                   : static_cast<float>(p.y);
    return self(self, value > n.test.threshold ? n.left : n.right, p);
  };

  std::vector<LabeledPoint2D> queries = randomPoints(1000, 7);
  for (const LabeledPoint2D& q : queries) {
    auto feature = [&](const FeatureDescriptor& fd) {
      return fd.axis == Axis2D::X ? static_cast<float>(q.x) : static_cast<float>(q.y);
    };
    CHECK(route(tree, feature) == reference(reference, tree.root, q));
  }
}

TEST_CASE("predictClass majority vote with ties to the lowest class") {
  auto leafForest = [](std::vector<int> labels) {
    Forest forest;
    forest.mode = ForestMode::Classification;
    forest.num_classes = 2;
    for (int label : labels) {
      Tree tree;
      LeafModel leaf;
      leaf.histogram = {label == 0 ? 1.0 : 0.0, label == 1 ? 1.0 : 0.0};
      leaf.label = label;
      tree.root = tree.addLeaf(leaf);
      forest.trees.push_back(tree);
    }
    return forest;
  };
  auto zero = [](const FeatureDescriptor&) { return 0.0f; };
  CHECK(predictClass(leafForest({1}), zero) == 1);
  CHECK(predictClass(leafForest({0, 0, 1}), zero) == 0);
  CHECK(predictClass(leafForest({1, 0}), zero) == 0);  // tie -> lowest id
}

TEST_CASE("prediction is invariant to tree order for odd forests") {
  std::vector<LabeledPoint2D> points = randomPoints(300, 8);
  TrainParams params = gaussParams();
  params.num_trees = 5;
  Forest forest = trainForest(GaussianProblem(points), params);
  Forest shuffled = forest;
  std::rotate(shuffled.trees.begin(), shuffled.trees.begin() + 2, shuffled.trees.end());
  for (const LabeledPoint2D& q : randomPoints(200, 9)) {
    auto feature = [&](const FeatureDescriptor& fd) {
      return fd.axis == Axis2D::X ? static_cast<float>(q.x) : static_cast<float>(q.y);
    };
    CHECK(predictClass(forest, feature) == predictClass(shuffled, feature));
  }
}

TEST_CASE("bagging subsamples deterministically") {
  std::vector<LabeledPoint2D> points = randomPoints(200, 10);
  TrainParams params = gaussParams();
  params.bagging_fraction = 0.5;
  Forest a = trainForest(GaussianProblem(points), params);
  Forest b = trainForest(GaussianProblem(points), params);
  CHECK(forestBytes(a) == forestBytes(b));
  params.bagging_fraction = 0.0;
  Forest c = trainForest(GaussianProblem(points), params);
  CHECK(forestBytes(a) != forestBytes(c));
}
