#include "mousepose/training.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mousepose/parallel.hpp"

namespace mousepose {

namespace {

constexpr int kMaxClasses = 16;

struct ClassCounts {
  std::array<std::int64_t, kMaxClasses> c{};
  std::int64_t total = 0;

  void add(std::uint8_t label) {
    ++c[label];
    ++total;
  }
  double entropyValue(int num_classes) const {
    return entropyOfCounts(std::span<const std::int64_t>(c.data(),
                                                         static_cast<std::size_t>(num_classes)),
                           total);
  }
};

// Index mappers so the same scoring code runs on contiguous ranges and on
// gathered row lists.
struct RangeIndex {
  std::size_t begin;
  std::size_t operator()(std::size_t i) const { return begin + i; }
};
struct GatherIndex {
  const std::int32_t* rows;
  std::size_t operator()(std::size_t i) const { return static_cast<std::size_t>(rows[i]); }
};

template <class Index>
double classificationGain(const std::uint8_t* labels, Index index, std::size_t n,
                          const float* values, double threshold, int num_classes,
                          const ClassCounts& parent, double parent_entropy) {
  ClassCounts left;
  for (std::size_t i = 0; i < n; ++i) {
    if (values[i] > threshold) left.add(labels[index(i)]);
  }
  std::int64_t n_left = left.total;
  std::int64_t n_right = parent.total - n_left;
  if (n_left == 0 || n_right == 0) return 0.0;
  ClassCounts right;
  for (int c = 0; c < num_classes; ++c) {
    right.c[static_cast<std::size_t>(c)] =
        parent.c[static_cast<std::size_t>(c)] - left.c[static_cast<std::size_t>(c)];
  }
  right.total = n_right;
  return partitionGain(parent_entropy, left.entropyValue(num_classes),
                       right.entropyValue(num_classes), static_cast<std::size_t>(n_left),
                       static_cast<std::size_t>(n_right));
}

struct JointAccum {
  std::array<Vec3, kTopJointCount> sum{};
  std::array<std::int64_t, kTopJointCount> count{};

  void add(const JointOffsets& e) {
    std::uint16_t m = e.within_radius;
    while (m) {
      int j = std::countr_zero(m);
      m &= static_cast<std::uint16_t>(m - 1);
      auto k = static_cast<std::size_t>(j);
      sum[k] += e.offset[k];
      ++count[k];
    }
  }
};

using JointMeans = std::array<Vec3, kTopJointCount>;

JointMeans meansOf(const JointAccum& acc) {
  JointMeans mean{};
  for (int j = 0; j < kTopJointCount; ++j) {
    auto k = static_cast<std::size_t>(j);
    if (acc.count[k] > 0) mean[k] = (1.0 / static_cast<double>(acc.count[k])) * acc.sum[k];
  }
  return mean;
}

double deviationOf(const JointOffsets& e, const JointMeans& mean) {
  double total = 0.0;
  std::uint16_t m = e.within_radius;
  while (m) {
    int j = std::countr_zero(m);
    m &= static_cast<std::uint16_t>(m - 1);
    auto k = static_cast<std::size_t>(j);
    total += distance(e.offset[k], mean[k]);
  }
  return total;
}

template <class Index>
double regressionGain(const JointOffsets* offsets, Index index, std::size_t n,
                      const float* values, double threshold, double parent_compactness) {
  JointAccum left_acc, right_acc;
  std::size_t n_left = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const JointOffsets& e = offsets[index(i)];
    if (values[i] > threshold) {
      left_acc.add(e);
      ++n_left;
    } else {
      right_acc.add(e);
    }
  }
  std::size_t n_right = n - n_left;
  if (n_left == 0 || n_right == 0) return 0.0;
  JointMeans left_mean = meansOf(left_acc);
  JointMeans right_mean = meansOf(right_acc);
  double left = 0.0, right = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const JointOffsets& e = offsets[index(i)];
    if (values[i] > threshold) {
      left += deviationOf(e, left_mean);
    } else {
      right += deviationOf(e, right_mean);
    }
  }
  return partitionGain(parent_compactness, left, right, n_left, n_right);
}

template <class Index>
double candidateGain(const TrainingProblem& problem, Index index, std::size_t n,
                     const float* values, double threshold, const ClassCounts* parent_counts,
                     double parent_score) {
  if (problem.mode() == ForestMode::Classification) {
    return classificationGain(problem.labels(), index, n, values, threshold,
                              problem.numClasses(), *parent_counts, parent_score);
  }
  return regressionGain(problem.offsets(), index, n, values, threshold, parent_score);
}

// Parent impurity plus cached class counts (classification).
template <class Index>
double parentScore(const TrainingProblem& problem, Index index, std::size_t n,
                   ClassCounts* counts_out) {
  if (problem.mode() == ForestMode::Classification) {
    const std::uint8_t* labels = problem.labels();
    ClassCounts counts;
    for (std::size_t i = 0; i < n; ++i) counts.add(labels[index(i)]);
    double e = counts.entropyValue(problem.numClasses());
    if (counts_out) *counts_out = counts;
    return e;
  }
  const JointOffsets* offsets = problem.offsets();
  JointAccum acc;
  for (std::size_t i = 0; i < n; ++i) acc.add(offsets[index(i)]);
  JointMeans mean = meansOf(acc);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += deviationOf(offsets[index(i)], mean);
  return total;
}

}  // namespace

std::optional<BestSplitResult> bestSplit(const TrainingProblem& problem,
                                         std::span<const std::int32_t> rows,
                                         std::span<const SplitTest> candidates) {
  if (candidates.empty()) throw std::invalid_argument("bestSplit: no candidates");
  if (rows.empty()) throw std::invalid_argument("bestSplit: empty example set");
  GatherIndex index{rows.data()};
  std::size_t n = rows.size();
  ClassCounts counts;
  double parent = parentScore(problem, index, n, &counts);
  std::vector<float> values(n);
  std::optional<BestSplitResult> best;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    problem.evalFeatureRows(candidates[k].feature, rows, values.data());
    double gain =
        candidateGain(problem, index, n, values.data(), candidates[k].threshold, &counts, parent);
    if (gain > 0.0 && (!best || gain > best->gain)) {
      best = BestSplitResult{candidates[k], gain, static_cast<int>(k)};
    }
  }
  return best;
}

double splitGain(const TrainingProblem& problem, std::span<const std::int32_t> rows,
                 const SplitTest& test) {
  if (rows.empty()) throw std::invalid_argument("splitGain: empty example set");
  GatherIndex index{rows.data()};
  std::size_t n = rows.size();
  ClassCounts counts;
  double parent = parentScore(problem, index, n, &counts);
  std::vector<float> values(n);
  problem.evalFeatureRows(test.feature, rows, values.data());
  return candidateGain(problem, index, n, values.data(), test.threshold, &counts, parent);
}

LeafModel makeLeafClassification(std::span<const std::uint8_t> labels, int num_classes) {
  if (labels.empty()) throw std::invalid_argument("makeLeafClassification: empty set");
  LeafModel leaf;
  leaf.histogram.assign(static_cast<std::size_t>(num_classes), 0.0);
  for (std::uint8_t l : labels) leaf.histogram[l] += 1.0;
  double inv = 1.0 / static_cast<double>(labels.size());
  int best = 0;
  for (int c = 0; c < num_classes; ++c) {
    auto k = static_cast<std::size_t>(c);
    leaf.histogram[k] *= inv;
    if (leaf.histogram[k] > leaf.histogram[static_cast<std::size_t>(best)]) best = c;
  }
  leaf.label = best;
  return leaf;
}

LeafModel makeLeafRegression(std::span<const JointOffsets> examples, double lambda_max) {
  if (examples.empty()) throw std::invalid_argument("makeLeafRegression: empty set");
  LeafModel leaf;
  for (int j = 0; j < kTopJointCount; ++j) {
    auto k = static_cast<std::size_t>(j);
    Vec3 sum{};
    std::int64_t count = 0;
    for (const JointOffsets& e : examples) {
      if (e.near(j)) {
        sum += e.offset[k];
        ++count;
      }
    }
    JointLeaf& out = leaf.joints[k];
    out.support = static_cast<std::int32_t>(count);
    if (count == 0) continue;
    Vec3 mean = (1.0 / static_cast<double>(count)) * sum;
    out.mean_offset = toVec3f(mean);
    // Population covariance of the within-radius offsets.
    double xx = 0, yy = 0, zz = 0, xy = 0, xz = 0, yz = 0;
    for (const JointOffsets& e : examples) {
      if (!e.near(j)) continue;
      Vec3 d = e.offset[k] - mean;
      xx += d.x * d.x;
      yy += d.y * d.y;
      zz += d.z * d.z;
      xy += d.x * d.y;
      xz += d.x * d.z;
      yz += d.y * d.z;
    }
    double inv = 1.0 / static_cast<double>(count);
    double lambda1 =
        largestEigenvalueSym3(xx * inv, yy * inv, zz * inv, xy * inv, xz * inv, yz * inv);
    out.low_confidence = lambda1 >= lambda_max;
  }
  return leaf;
}

std::size_t partitionRange(TrainingProblem& problem, std::size_t begin, std::size_t end,
                           const SplitTest& test) {
  std::size_t n = end - begin;
  std::vector<float> values(n);
  problem.evalFeature(test.feature, begin, end, values.data());
  std::size_t i = 0, j = n;
  while (i < j) {
    if (values[i] > test.threshold) {
      ++i;
    } else {
      --j;
      std::swap(values[i], values[j]);
      problem.swapRows(begin + i, begin + j);
    }
  }
  return begin + i;
}

namespace {

LeafModel makeLeafRange(const TrainingProblem& problem, std::size_t begin, std::size_t end,
                        double lambda_max) {
  std::size_t n = end - begin;
  if (problem.mode() == ForestMode::Classification) {
    return makeLeafClassification({problem.labels() + begin, n}, problem.numClasses());
  }
  return makeLeafRegression({problem.offsets() + begin, n}, lambda_max);
}

// Candidate scan over a node's contiguous range: m features, each with the
// problem's thresholds. Strict improvement keeps the lowest flat index on
// ties.
std::optional<SplitTest> scoreNode(TrainingProblem& problem, std::size_t begin, std::size_t end,
                                   int level, const TrainParams& params, Rng& rng,
                                   std::vector<float>& values, std::vector<double>& thresholds) {
  std::size_t n = end - begin;
  RangeIndex index{begin};
  ClassCounts counts;
  double parent = parentScore(problem, index, n, &counts);
  std::optional<SplitTest> best;
  double best_gain = 0.0;
  values.resize(n);
  for (int f = 0; f < params.m; ++f) {
    FeatureDescriptor feature = problem.sampleFeature(level, rng);
    problem.evalFeature(feature, begin, end, values.data());
    problem.sampleThresholds(feature, {values.data(), n}, params.thresholds_per_feature, rng,
                             thresholds);
    for (double threshold : thresholds) {
      double gain = candidateGain(problem, index, n, values.data(), threshold, &counts, parent);
      if (gain > 0.0 && gain > best_gain) {
        best_gain = gain;
        best = SplitTest{feature, threshold};
      }
    }
  }
  return best;
}

}  // namespace

std::int32_t growSubtree(Tree& tree, TrainingProblem& problem, std::size_t begin, std::size_t end,
                         int level, const TrainParams& params, Rng& rng) {
  std::vector<float> values;
  std::vector<double> thresholds;

  // Explicit recursion so scratch buffers are shared across the subtree.
  auto grow = [&](auto&& self, std::size_t b, std::size_t e, int lvl) -> std::int32_t {
    std::size_t n = e - b;
    if (lvl + 1 >= params.max_levels || n < static_cast<std::size_t>(params.leaf_capacity)) {
      return tree.addLeaf(makeLeafRange(problem, b, e, params.lambda_max));
    }
    std::optional<SplitTest> best = scoreNode(problem, b, e, lvl, params, rng, values, thresholds);
    if (!best) {
      return tree.addLeaf(makeLeafRange(problem, b, e, params.lambda_max));
    }
    std::size_t mid = partitionRange(problem, b, e, *best);
    if (mid == b || mid == e) {
      return tree.addLeaf(makeLeafRange(problem, b, e, params.lambda_max));
    }
    std::int32_t left = self(self, b, mid, lvl + 1);
    std::int32_t right = self(self, mid, e, lvl + 1);
    return tree.addSplit(*best, left, right);
  };
  return grow(grow, begin, end, level);
}

Tree growTree(TrainingProblem& problem, const TrainParams& params, int start_level, Rng& rng) {
  if (problem.size() == 0) throw std::invalid_argument("growTree: empty dataset");
  Tree tree;
  tree.root = growSubtree(tree, problem, 0, problem.size(), start_level, params, rng);
  return tree;
}

std::vector<std::int32_t> sampleRowSubset(std::size_t n, std::size_t keep, Rng& rng) {
  if (keep > n) keep = n;
  std::vector<std::int32_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  for (std::size_t i = 0; i < keep; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng.uniformIndex(n - i));
    std::swap(rows[i], rows[j]);
  }
  rows.resize(keep);
  std::sort(rows.begin(), rows.end());
  return rows;
}

Forest trainForest(const TrainingProblem& data, const TrainParams& params) {
  if (data.size() == 0) throw std::invalid_argument("trainForest: empty dataset");
  if (params.num_trees < 1) throw std::invalid_argument("trainForest: num_trees must be >= 1");
  Forest forest;
  forest.mode = data.mode();
  forest.features = data.featureFamily();
  forest.num_classes = data.numClasses();
  forest.params = params;
  forest.depth_features = data.depthConfig();
  forest.trees.resize(static_cast<std::size_t>(params.num_trees));
  parallelFor(static_cast<std::size_t>(params.num_trees), [&](std::size_t t) {
    Rng rng(deriveSeed(params.seed, "tree", t));
    std::unique_ptr<TrainingProblem> local = data.clone();
    if (params.bagging_fraction > 0.0 && params.bagging_fraction < 1.0) {
      std::size_t keep = static_cast<std::size_t>(
          std::llround(params.bagging_fraction * static_cast<double>(local->size())));
      if (keep == 0) keep = 1;
      std::vector<std::int32_t> rows = sampleRowSubset(local->size(), keep, rng);
      local->keepRows(rows);
    }
    forest.trees[t] = growTree(*local, params, 0, rng);
  });
  return forest;
}

}  // namespace mousepose
