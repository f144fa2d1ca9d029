#include <doctest.h>

#include <sstream>

#include "mousepose/forest_io.hpp"
#include "mousepose/gauss_bench.hpp"

using namespace mousepose;

namespace {

std::string forestBytes(const Forest& forest) {
  std::ostringstream out;
  saveForest(forest, out);
  return out.str();
}

SplitTest axisTest(Axis2D axis, double threshold) {
  return SplitTest{FeatureDescriptor{FeatureFamily::Axis2D, axis, {}}, threshold};
}

LeafModel classLeaf(int label) {
  LeafModel leaf;
  leaf.histogram = {label == 0 ? 1.0 : 0.0, label == 1 ? 1.0 : 0.0};
  leaf.label = label;
  return leaf;
}

// Depth-1 stump: x > threshold predicts `left_label`, else `right_label`.
Forest stumpForest(double threshold, int left_label, int right_label) {
  Forest forest;
  forest.mode = ForestMode::Classification;
  forest.features = FeatureFamily::Axis2D;
  forest.num_classes = 2;
  Tree tree;
  std::int32_t left = tree.addLeaf(classLeaf(left_label));
  std::int32_t right = tree.addLeaf(classLeaf(right_label));
  tree.root = tree.addSplit(axisTest(Axis2D::X, threshold), left, right);
  forest.trees.push_back(tree);
  return forest;
}

std::vector<LabeledPoint2D> randomPoints(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<LabeledPoint2D> points;
  for (std::size_t i = 0; i < n; ++i) {
    points.push_back({rng.uniform(), rng.uniform(),
                      static_cast<std::uint8_t>(rng.uniformIndex(2))});
  }
  return points;
}

JointOffsets offsetExample(Vec3 o, const std::array<double, kTopJointCount>& epsilon) {
  JointOffsets e;
  for (auto& v : e.offset) v = Vec3{900, 900, 900};
  e.offset[0] = o;
  e.within_radius = withinRadiusMask(e.offset, epsilon);
  return e;
}

// Minimal regression problem over explicit offsets; features are unused by
// the metric tests (single-leaf trees).
class FixedOffsetProblem final : public TrainingProblem {
 public:
  explicit FixedOffsetProblem(std::vector<JointOffsets> offsets)
      : offsets_(std::move(offsets)), epsilon_(defaultTopJointEpsilons()) {}

  ForestMode mode() const override { return ForestMode::Regression; }
  FeatureFamily featureFamily() const override { return FeatureFamily::Axis2D; }
  std::size_t size() const override { return offsets_.size(); }
  std::unique_ptr<TrainingProblem> clone() const override {
    return std::make_unique<FixedOffsetProblem>(*this);
  }
  void keepRows(std::span<const std::int32_t> rows) override {
    std::vector<JointOffsets> kept;
    for (std::int32_t r : rows) kept.push_back(offsets_[static_cast<std::size_t>(r)]);
    offsets_ = std::move(kept);
  }
  void swapRows(std::size_t a, std::size_t b) override { std::swap(offsets_[a], offsets_[b]); }
  void evalFeature(const FeatureDescriptor&, std::size_t begin, std::size_t end,
                   float* out) const override {
    for (std::size_t i = begin; i < end; ++i) out[i - begin] = 0.0f;
  }
  void evalFeatureRows(const FeatureDescriptor&, std::span<const std::int32_t> rows,
                       float* out) const override {
    for (std::size_t i = 0; i < rows.size(); ++i) out[i] = 0.0f;
  }
  FeatureDescriptor sampleFeature(int, Rng&) const override { return {}; }
  void sampleThresholds(const FeatureDescriptor&, std::span<const float>, int count, Rng&,
                        std::vector<double>& out) const override {
    out.assign(static_cast<std::size_t>(count), 0.0);
  }
  const JointOffsets* offsets() const override { return offsets_.data(); }
  const std::array<double, kTopJointCount>* epsilons() const override { return &epsilon_; }

 private:
  std::vector<JointOffsets> offsets_;
  std::array<double, kTopJointCount> epsilon_;
};

}  // namespace

TEST_CASE("classification metric counts correct predictions") {
  // Stump: x > 0.5 -> class 0, else class 1.
  Forest forest = stumpForest(0.5, 0, 1);

  std::vector<LabeledPoint2D> all_correct;
  for (int i = 0; i < 5; ++i) all_correct.push_back({0.8, 0.5, 0});
  for (int i = 0; i < 5; ++i) all_correct.push_back({0.2, 0.5, 1});
  CHECK(evalMetricClassification(forest.trees[0], GaussianProblem(all_correct)).value == 10.0);

  std::vector<LabeledPoint2D> all_wrong;
  for (int i = 0; i < 5; ++i) all_wrong.push_back({0.8, 0.5, 1});
  for (int i = 0; i < 5; ++i) all_wrong.push_back({0.2, 0.5, 0});
  CHECK(evalMetricClassification(forest.trees[0], GaussianProblem(all_wrong)).value == 0.0);

  // Hand-routed: seven of ten land on the correct side.
  std::vector<LabeledPoint2D> mixed{
      {0.9, 0, 0}, {0.8, 0, 0}, {0.7, 0, 0}, {0.6, 0, 0},          // 4 correct
      {0.1, 0, 1}, {0.2, 0, 1}, {0.3, 0, 1},                       // 3 correct
      {0.9, 0, 1}, {0.1, 0, 0}, {0.2, 0, 0}};                      // 3 wrong
  CHECK(evalMetricClassification(forest.trees[0], GaussianProblem(mixed)).value == 7.0);
}

TEST_CASE("regression metric is the guarded reciprocal of summed error") {
  auto epsilon = defaultTopJointEpsilons();
  // Single-leaf tree with a stored offset for joint 0 only.
  Forest forest;
  forest.mode = ForestMode::Regression;
  Tree tree;
  LeafModel leaf;
  leaf.joints[0].support = 1;
  leaf.joints[0].mean_offset = Vec3f{0, 0, 0};
  tree.root = tree.addLeaf(leaf);
  forest.trees.push_back(tree);

  // Every example misses joints 1..11 (support 0), contributing the sum of
  // their radii; example error for joint 0 is |mu - o|.
  double miss = 0.0;
  for (int j = 1; j < kTopJointCount; ++j) miss += epsilon[static_cast<std::size_t>(j)];

  SUBCASE("hand-summed two-example case") {
    // Per-example totals 4 mm and 6 mm from joint 0 alone, so build examples
    // with |o| = 4 and 6 and give the leaf every joint to avoid the penalty.
    Forest full = forest;
    for (int j = 0; j < kTopJointCount; ++j) {
      full.trees[0].leaves[0].joints[static_cast<std::size_t>(j)].support = 1;
      full.trees[0].leaves[0].joints[static_cast<std::size_t>(j)].mean_offset = Vec3f{900, 900, 900};
    }
    full.trees[0].leaves[0].joints[0].mean_offset = Vec3f{0, 0, 0};
    std::vector<JointOffsets> data{offsetExample(Vec3{4, 0, 0}, epsilon),
                                   offsetExample(Vec3{0, 6, 0}, epsilon)};
    // Joints 1..11: stored offset equals the true offset (900,900,900), so
    // they contribute zero error.
    FixedOffsetProblem problem(data);
    CHECK(evalMetricRegression(full.trees[0], problem).value ==
          doctest::Approx(0.1).epsilon(1e-9));
  }

  SUBCASE("zero error hits the sentinel regime") {
    Forest full = forest;
    for (int j = 0; j < kTopJointCount; ++j) {
      full.trees[0].leaves[0].joints[static_cast<std::size_t>(j)].support = 1;
      full.trees[0].leaves[0].joints[static_cast<std::size_t>(j)].mean_offset = Vec3f{900, 900, 900};
    }
    full.trees[0].leaves[0].joints[0].mean_offset = Vec3f{2, 0, 0};
    std::vector<JointOffsets> data{offsetExample(Vec3{2, 0, 0}, epsilon)};
    FixedOffsetProblem problem(data);
    CHECK(evalMetricRegression(full.trees[0], problem).value ==
          doctest::Approx(1e9).epsilon(1e-6));
  }

  SUBCASE("missing joints contribute their proximity radius") {
    std::vector<JointOffsets> data{offsetExample(Vec3{10, 0, 0}, epsilon)};
    FixedOffsetProblem problem(data);
    double expected = 1.0 / (10.0 + miss + 1e-9);
    CHECK(evalMetricRegression(forest.trees[0], problem).value ==
          doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("retraining leaves an empty-set subtree untouched") {
  // All disc points lie on x > 0.9's left side... route right empty: choose
  // points all with x > 0.95 so the right child receives nothing.
  Forest forest = stumpForest(0.95, 0, 1);
  std::vector<LabeledPoint2D> dd;
  for (int i = 0; i < 50; ++i) dd.push_back({0.96 + 0.0005 * i, 0.5, 0});
  DiscParams dp;
  dp.m = 0;  // incumbent only: the right child must survive untouched
  dp.leaf_capacity = 10;
  dp.subset_fraction = 1.0;
  dp.seed = 3;
  GaussianProblem problem(dd);
  RetrainLog log;
  Forest out = discTrainForest(forest, problem, dp, DiscScoring::SubtreeMetric, &log);
  // Right leaf (label 1) untouched; left leaf rebuilt... |S|=50 > l_n=10 at
  // a leaf grows a subtree, so instead verify the right child kept label 1.
  const Tree& tree = out.trees[0];
  const TreeNode& root = tree.nodes[static_cast<std::size_t>(tree.root)];
  REQUIRE_FALSE(root.isLeaf());
  CHECK(tree.leafAt(root.right).label == 1);
}

TEST_CASE("a data-starved split node shrinks to the majority leaf") {
  Forest forest = stumpForest(0.5, 0, 1);
  std::vector<LabeledPoint2D> dd{{0.8, 0, 1}, {0.7, 0, 1}, {0.2, 0, 0}};
  DiscParams dp;
  dp.m = 2;
  dp.leaf_capacity = 5;  // |S| = 3 <= 5 at the root split
  dp.subset_fraction = 1.0;
  dp.seed = 4;
  GaussianProblem problem(dd);
  RetrainLog log;
  Forest out = discTrainForest(forest, problem, dp, DiscScoring::SubtreeMetric, &log);
  const Tree& tree = out.trees[0];
  CHECK(tree.nodes[static_cast<std::size_t>(tree.root)].isLeaf());
  CHECK(tree.leafAt(tree.root).label == 1);  // majority of {1,1,0}
  REQUIRE(log.entries.size() == 1);
  CHECK((log.entries[0].action == DiscAction::Shrunk));
}

TEST_CASE("an oversubscribed leaf grows a subtree within the depth budget") {
  Forest forest;
  forest.mode = ForestMode::Classification;
  forest.features = FeatureFamily::Axis2D;
  forest.num_classes = 2;
  forest.params.max_levels = 4;
  forest.params.m = 10;
  forest.params.thresholds_per_feature = 1;
  Tree tree;
  tree.root = tree.addLeaf(classLeaf(0));
  forest.trees.push_back(tree);

  std::vector<LabeledPoint2D> dd = randomPoints(300, 12);
  DiscParams dp;
  dp.m = 5;
  dp.leaf_capacity = 8;
  dp.subset_fraction = 1.0;
  dp.seed = 5;
  GaussianProblem problem(dd);
  RetrainLog log;
  Forest out = discTrainForest(forest, problem, dp, DiscScoring::SubtreeMetric, &log);
  const Tree& grown = out.trees[0];
  CHECK_FALSE(grown.nodes[static_cast<std::size_t>(grown.root)].isLeaf());
  CHECK(treeDepth(grown, grown.root) <= forest.params.max_levels);
  REQUIRE(log.entries.size() == 1);
  CHECK((log.entries[0].action == DiscAction::Grown));
  CHECK(log.entries[0].best_score >= log.entries[0].incumbent_score);
}

TEST_CASE("installed threshold equals the exhaustive argmax over rescoring") {
  // Two-level hand-built tree over eight points; the retrained root must
  // install the best of {incumbent, three sampled thresholds} as scored by
  // routing the points through the subtree.
  Forest forest;
  forest.mode = ForestMode::Classification;
  forest.features = FeatureFamily::Axis2D;
  forest.num_classes = 2;
  forest.params.max_levels = 8;
  Tree tree;
  std::int32_t ll = tree.addLeaf(classLeaf(0));
  std::int32_t lr = tree.addLeaf(classLeaf(1));
  std::int32_t rl = tree.addLeaf(classLeaf(1));
  std::int32_t rr = tree.addLeaf(classLeaf(0));
  std::int32_t left = tree.addSplit(axisTest(Axis2D::Y, 0.5), ll, lr);
  std::int32_t right = tree.addSplit(axisTest(Axis2D::Y, 0.5), rl, rr);
  tree.root = tree.addSplit(axisTest(Axis2D::X, 0.4), left, right);
  forest.trees.push_back(tree);

  std::vector<LabeledPoint2D> dd{{0.10, 0.8, 1}, {0.20, 0.2, 0}, {0.35, 0.7, 1},
                                 {0.45, 0.3, 0}, {0.60, 0.8, 0}, {0.70, 0.2, 1},
                                 {0.85, 0.6, 0}, {0.95, 0.4, 1}};
  DiscParams dp;
  dp.m = 3;
  dp.leaf_capacity = 2;
  dp.subset_fraction = 1.0;
  dp.start_level = 0;
  dp.seed = 77;

  GaussianProblem problem(dd);
  RetrainLog log;
  Forest out = discTrainForest(forest, problem, dp, DiscScoring::SubtreeMetric, &log);

  // Reproduce the candidate list: the per-tree stream first samples nothing
  // for the subset (fraction 1), then draws one grid threshold per test.
  Rng rng(deriveSeed(dp.seed, "disc-tree", 0));
  std::vector<double> thresholds{forest.trees[0].nodes[static_cast<std::size_t>(
      forest.trees[0].root)].test.threshold};
  for (int k = 0; k < dp.m; ++k) {
    thresholds.push_back(static_cast<double>(rng.uniformIndex(1000)) / 1000.0);
  }

  // Independent scorer: route all points through the original subtree with
  // the candidate root threshold and count correct labels.
  auto scoreCandidate = [&](double threshold) {
    int correct = 0;
    for (const LabeledPoint2D& p : dd) {
      int node;
      if (p.x > threshold) node = left;
      else node = right;
      const Tree& t = forest.trees[0];
      int leaf = p.y > 0.5 ? t.nodes[static_cast<std::size_t>(node)].left
                           : t.nodes[static_cast<std::size_t>(node)].right;
      if (t.leafAt(leaf).label == p.label) ++correct;
    }
    return correct;
  };
  double best_threshold = thresholds[0];
  int best_score = scoreCandidate(thresholds[0]);
  for (double t : thresholds) {
    int s = scoreCandidate(t);
    if (s > best_score) {
      best_score = s;
      best_threshold = t;
    }
  }
  CHECK(out.trees[0].nodes[static_cast<std::size_t>(out.trees[0].root)].test.threshold ==
        doctest::Approx(best_threshold));
}

TEST_CASE("start level beyond the tree is a pure pass-through") {
  std::vector<LabeledPoint2D> points = randomPoints(300, 13);
  TrainParams tp;
  tp.num_trees = 2;
  tp.m = 10;
  tp.leaf_capacity = 8;
  tp.max_levels = 6;
  tp.seed = 6;
  Forest forest = trainForest(GaussianProblem(points), tp);

  DiscParams dp;
  dp.m = 10;
  dp.leaf_capacity = 8;
  dp.subset_fraction = 1.0;
  dp.start_level = tp.max_levels + 1;
  dp.seed = 7;
  GaussianProblem dd(randomPoints(300, 14));
  RetrainLog log;
  Forest out = discTrainForest(forest, dd, dp, DiscScoring::SubtreeMetric, &log);
  CHECK(forestBytes(out) == forestBytes(forest));
  CHECK(log.entries.empty());
}

TEST_CASE("retraining is deterministic and never lowers a rescored node") {
  std::vector<LabeledPoint2D> points = randomPoints(2000, 15);
  TrainParams tp;
  tp.num_trees = 3;
  tp.m = 20;
  tp.leaf_capacity = 10;
  tp.max_levels = 10;
  tp.seed = 8;
  Forest forest = trainForest(GaussianProblem(points), tp);

  DiscParams dp;
  dp.m = 15;
  dp.leaf_capacity = 10;
  dp.subset_fraction = 0.5;
  dp.seed = 9;
  GaussianProblem dd(randomPoints(2000, 16));
  RetrainLog log_a, log_b;
  Forest a = discTrainForest(forest, dd, dp, DiscScoring::SubtreeMetric, &log_a);
  Forest b = discTrainForest(forest, dd, dp, DiscScoring::SubtreeMetric, &log_b);
  CHECK(forestBytes(a) == forestBytes(b));
  CHECK(log_a.monotonicityViolations() == 0);
  CHECK(log_a.entries.size() == log_b.entries.size());

  // Shrink rule: no surviving split node saw |S| <= l_n.
  for (const RetrainLogEntry& e : log_a.entries) {
    if (e.action == DiscAction::Rescored) CHECK(e.set_size > dp.leaf_capacity);
  }
}

TEST_CASE("incumbent-only retraining keeps split structure") {
  std::vector<LabeledPoint2D> points = randomPoints(500, 17);
  TrainParams tp;
  tp.num_trees = 1;
  tp.m = 15;
  tp.leaf_capacity = 6;
  tp.max_levels = 7;
  tp.seed = 10;
  Forest forest = trainForest(GaussianProblem(points), tp);

  DiscParams dp;
  dp.m = 0;
  dp.leaf_capacity = 6;
  dp.subset_fraction = 1.0;
  dp.seed = 11;
  GaussianProblem dd(points);  // same data: every reachable node keeps its samples
  RetrainLog log;
  Forest out = discTrainForest(forest, dd, dp, DiscScoring::SubtreeMetric, &log);
  for (const RetrainLogEntry& e : log.entries) {
    if (e.action == DiscAction::Rescored) {
      CHECK(e.best_score == e.incumbent_score);
    }
  }
}

TEST_CASE("root metric is non-decreasing across iterations on reused data") {
  std::vector<LabeledPoint2D> points = randomPoints(1500, 18);
  TrainParams tp;
  tp.num_trees = 1;
  tp.m = 25;
  tp.leaf_capacity = 12;
  tp.max_levels = 9;
  tp.seed = 12;
  Forest forest = trainForest(GaussianProblem(points), tp);

  std::vector<LabeledPoint2D> dd = randomPoints(1500, 19);
  GaussianProblem dd_problem(dd);
  DiscParams dp;
  dp.m = 10;
  dp.leaf_capacity = 12;
  dp.subset_fraction = 1.0;  // D'_d == D_d every iteration
  dp.iterations = 3;
  dp.seed = 13;
  auto make_dataset = [&](int) -> std::unique_ptr<TrainingProblem> {
    return std::make_unique<GaussianProblem>(dd);
  };
  auto evaluate = [&](const Forest& f) {
    return evalMetricClassification(f.trees[0], dd_problem).value;
  };
  IterationResult result = discTrainIterations(forest, make_dataset, dp, evaluate);
  REQUIRE(result.trace.size() == 4);
  for (std::size_t i = 1; i < result.trace.size(); ++i) {
    CHECK(result.trace[i] >= result.trace[i - 1] - 1e-9);
  }
}

TEST_CASE("one iteration equals a single retraining pass") {
  std::vector<LabeledPoint2D> points = randomPoints(800, 20);
  TrainParams tp;
  tp.num_trees = 2;
  tp.m = 15;
  tp.leaf_capacity = 10;
  tp.max_levels = 8;
  tp.seed = 14;
  Forest forest = trainForest(GaussianProblem(points), tp);

  std::vector<LabeledPoint2D> dd = randomPoints(800, 21);
  DiscParams dp;
  dp.m = 10;
  dp.leaf_capacity = 10;
  dp.subset_fraction = 0.5;
  dp.iterations = 1;
  dp.seed = 15;

  IterationResult iterated = discTrainIterations(
      forest, [&](int) { return std::make_unique<GaussianProblem>(dd); }, dp,
      [](const Forest&) { return 0.0; });

  DiscParams single = dp;
  single.seed = deriveSeed(dp.seed, "iteration", 1);
  GaussianProblem dd_problem(dd);
  Forest direct = discTrainForest(forest, dd_problem, single, DiscScoring::SubtreeMetric);
  CHECK(forestBytes(iterated.forest) == forestBytes(direct));
  CHECK(iterated.trace.size() == 2);
}
