#include "mousepose/disc_training.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "mousepose/parallel.hpp"

namespace mousepose {

namespace {

constexpr double kErrorGuard = 1e-9;

// Summed per-joint estimation error of one example under a regression leaf.
// A joint the leaf cannot estimate (support 0) contributes its proximity
// radius, so candidate tests cannot win by starving leaves of estimates.
double exampleError(const LeafModel& leaf, const JointOffsets& truth,
                    const std::array<double, kTopJointCount>& epsilon) {
  double err = 0.0;
  for (int j = 0; j < kTopJointCount; ++j) {
    auto k = static_cast<std::size_t>(j);
    const JointLeaf& jl = leaf.joints[k];
    if (jl.support > 0) {
      err += distance(toVec3(jl.mean_offset), truth.offset[k]);
    } else {
      err += epsilon[k];
    }
  }
  return err;
}

// Raw subtree performance restricted to the given examples: correct count
// (classification) or summed joint error (regression). override_test, when
// non-null, replaces the test at the subtree root only.
class SubtreeScorer {
 public:
  SubtreeScorer(const Tree& tree, const TrainingProblem& data)
      : tree_(tree),
        data_(data),
        classification_(data.mode() == ForestMode::Classification),
        labels_(data.labels()),
        offsets_(data.offsets()) {
    if (!classification_) epsilon_ = *data.epsilons();
  }

  double rawScore(std::int32_t node, std::span<std::int32_t> positions,
                  const SplitTest* override_test) {
    if (values_.size() < positions.size()) values_.resize(positions.size());
    return walk(node, positions, override_test);
  }

  // Higher-is-better metric from the raw accumulation.
  double toScore(double raw) const {
    return classification_ ? raw : 1.0 / (raw + kErrorGuard);
  }

 private:
  double walk(std::int32_t node, std::span<std::int32_t> positions,
              const SplitTest* override_test) {
    if (positions.empty()) return 0.0;
    const TreeNode& n = tree_.nodes[static_cast<std::size_t>(node)];
    if (n.isLeaf()) {
      const LeafModel& leaf = tree_.leafAt(node);
      double acc = 0.0;
      if (classification_) {
        for (std::int32_t pos : positions) {
          acc += labels_[pos] == leaf.label ? 1.0 : 0.0;
        }
      } else {
        for (std::int32_t pos : positions) {
          acc += exampleError(leaf, offsets_[pos], epsilon_);
        }
      }
      return acc;
    }
    const SplitTest& test = override_test ? *override_test : n.test;
    data_.evalFeatureRows(test.feature, positions, values_.data());
    std::size_t i = 0, j = positions.size();
    while (i < j) {
      if (values_[i] > test.threshold) {
        ++i;
      } else {
        --j;
        std::swap(values_[i], values_[j]);
        std::swap(positions[i], positions[j]);
      }
    }
    return walk(n.left, positions.subspan(0, i), nullptr) +
           walk(n.right, positions.subspan(i), nullptr);
  }

  const Tree& tree_;
  const TrainingProblem& data_;
  bool classification_;
  const std::uint8_t* labels_;
  const JointOffsets* offsets_;
  std::array<double, kTopJointCount> epsilon_{};
  std::vector<float> values_;
};

struct NodeScratch {
  std::vector<std::int32_t> positions;
  std::vector<float> values;
  std::vector<double> thresholds;
};

class DiscTreeTrainer {
 public:
  DiscTreeTrainer(Tree& tree, TrainingProblem& data, const DiscParams& params,
                  DiscScoring scoring, const TrainParams& base, std::int32_t tree_index,
                  std::vector<RetrainLogEntry>& log, Rng& rng)
      : tree_(tree),
        data_(data),
        params_(params),
        scoring_(scoring),
        tree_index_(tree_index),
        log_(log),
        rng_(rng),
        scorer_(tree, data) {
    grow_params_ = base;
    grow_params_.leaf_capacity = params.leaf_capacity;
  }

  void run() { visit(tree_.root, 0, 0, data_.size()); }

 private:
  // Metric of the current subtree configuration on rows [begin, end).
  double configScore(std::int32_t node, std::size_t begin, std::size_t end,
                     const SplitTest* override_test) {
    scratch_.positions.resize(end - begin);
    std::iota(scratch_.positions.begin(), scratch_.positions.end(),
              static_cast<std::int32_t>(begin));
    double raw = scorer_.rawScore(node, scratch_.positions, override_test);
    return scorer_.toScore(raw);
  }

  // Local-gain score of a test on rows [begin, end) (the control variant
  // that replaces the end-to-end metric with the training gain).
  double gainScore(const SplitTest& test, std::size_t begin, std::size_t end) {
    std::vector<std::int32_t> rows(end - begin);
    std::iota(rows.begin(), rows.end(), static_cast<std::int32_t>(begin));
    return splitGain(data_, rows, test);
  }

  double scoreTest(std::int32_t node, const SplitTest& test, std::size_t begin,
                   std::size_t end) {
    if (scoring_ == DiscScoring::SubtreeMetric) {
      return configScore(node, begin, end, &test);
    }
    return gainScore(test, begin, end);
  }

  void record(std::int32_t level, std::int64_t n, DiscAction action, double incumbent,
              double best) {
    log_.push_back(RetrainLogEntry{tree_index_, level, n, action, incumbent, best});
  }

  void visit(std::int32_t node, int level, std::size_t begin, std::size_t end) {
    std::size_t n = end - begin;
    if (n == 0) return;  // nothing routed here: leave the subtree untouched

    TreeNode& nd = tree_.nodes[static_cast<std::size_t>(node)];
    if (level < params_.start_level) {
      // Route through without modifying anything above the start level.
      if (nd.isLeaf()) return;
      std::size_t mid = partitionRange(data_, begin, end, nd.test);
      visit(nd.left, level + 1, begin, mid);
      visit(tree_.nodes[static_cast<std::size_t>(node)].right, level + 1, mid, end);
      return;
    }

    if (!nd.isLeaf()) {
      if (n <= static_cast<std::size_t>(params_.leaf_capacity)) {
        shrink(node, level, begin, end);
      } else {
        rescore(node, level, begin, end);
      }
    } else {
      if (n > static_cast<std::size_t>(params_.leaf_capacity)) {
        grow(node, level, begin, end);
      } else {
        rebuildLeaf(node, level, begin, end);
      }
    }
  }

  void shrink(std::int32_t node, int level, std::size_t begin, std::size_t end) {
    double before = configScore(node, begin, end, nullptr);
    LeafModel model = buildLeaf(begin, end);
    TreeNode& nd = tree_.nodes[static_cast<std::size_t>(node)];
    tree_.leaves.push_back(std::move(model));
    nd.left = -1;
    nd.right = -1;
    nd.leaf = static_cast<std::int32_t>(tree_.leaves.size() - 1);
    double after = configScore(node, begin, end, nullptr);
    record(level, static_cast<std::int64_t>(end - begin), DiscAction::Shrunk, before, after);
  }

  void grow(std::int32_t node, int level, std::size_t begin, std::size_t end) {
    double before = configScore(node, begin, end, nullptr);
    std::int32_t sub = growSubtree(tree_, data_, begin, end, level, grow_params_, rng_);
    tree_.nodes[static_cast<std::size_t>(node)] = tree_.nodes[static_cast<std::size_t>(sub)];
    double after = configScore(node, begin, end, nullptr);
    record(level, static_cast<std::int64_t>(end - begin), DiscAction::Grown, before, after);
  }

  void rebuildLeaf(std::int32_t node, int level, std::size_t begin, std::size_t end) {
    double before = configScore(node, begin, end, nullptr);
    LeafModel model = buildLeaf(begin, end);
    tree_.leaves[static_cast<std::size_t>(tree_.nodes[static_cast<std::size_t>(node)].leaf)] =
        std::move(model);
    double after = configScore(node, begin, end, nullptr);
    record(level, static_cast<std::int64_t>(end - begin), DiscAction::LeafRebuilt, before, after);
  }

  void rescore(std::int32_t node, int level, std::size_t begin, std::size_t end) {
    std::size_t n = end - begin;
    SplitTest incumbent = tree_.nodes[static_cast<std::size_t>(node)].test;
    double incumbent_score = scoreTest(node, incumbent, begin, end);

    SplitTest best_test = incumbent;
    double best_score = incumbent_score;
    bool have_best = params_.keep_incumbent;

    scratch_.values.resize(n);
    bool need_values = data_.thresholdsNeedValues();
    for (int k = 0; k < params_.m; ++k) {
      FeatureDescriptor feature = data_.sampleFeature(level, rng_);
      if (need_values) data_.evalFeature(feature, begin, end, scratch_.values.data());
      data_.sampleThresholds(feature, {scratch_.values.data(), n}, 1, rng_,
                             scratch_.thresholds);
      SplitTest test{feature, scratch_.thresholds.front()};
      double score = scoreTest(node, test, begin, end);
      if (!have_best || score > best_score) {
        best_test = test;
        best_score = score;
        have_best = true;
      }
    }

    if (have_best) tree_.nodes[static_cast<std::size_t>(node)].test = best_test;
    record(level, static_cast<std::int64_t>(n), DiscAction::Rescored, incumbent_score,
           have_best ? best_score : incumbent_score);

    std::size_t mid =
        partitionRange(data_, begin, end, tree_.nodes[static_cast<std::size_t>(node)].test);
    std::int32_t left = tree_.nodes[static_cast<std::size_t>(node)].left;
    std::int32_t right = tree_.nodes[static_cast<std::size_t>(node)].right;
    visit(left, level + 1, begin, mid);
    visit(right, level + 1, mid, end);
  }

  LeafModel buildLeaf(std::size_t begin, std::size_t end) {
    std::size_t n = end - begin;
    if (data_.mode() == ForestMode::Classification) {
      return makeLeafClassification({data_.labels() + begin, n}, data_.numClasses());
    }
    return makeLeafRegression({data_.offsets() + begin, n}, grow_params_.lambda_max);
  }

  Tree& tree_;
  TrainingProblem& data_;
  const DiscParams& params_;
  DiscScoring scoring_;
  TrainParams grow_params_;
  std::int32_t tree_index_;
  std::vector<RetrainLogEntry>& log_;
  Rng& rng_;
  SubtreeScorer scorer_;
  NodeScratch scratch_;
};

}  // namespace

int RetrainLog::monotonicityViolations() const {
  int count = 0;
  for (const RetrainLogEntry& e : entries) {
    if (e.action == DiscAction::Rescored && e.best_score < e.incumbent_score) ++count;
  }
  return count;
}

const char* toString(DiscAction action) {
  switch (action) {
    case DiscAction::Rescored: return "rescored";
    case DiscAction::Shrunk: return "shrunk";
    case DiscAction::Grown: return "grown";
    case DiscAction::LeafRebuilt: return "leaf-rebuilt";
  }
  return "?";
}

void RetrainLog::writeCsv(std::ostream& out) const {
  out << "tree,level,set_size,action,incumbent_score,best_score\n";
  char buffer[64];
  for (const RetrainLogEntry& e : entries) {
    out << e.tree << ',' << e.level << ',' << e.set_size << ',' << toString(e.action) << ',';
    std::snprintf(buffer, sizeof(buffer), "%.17g,%.17g\n", e.incumbent_score, e.best_score);
    out << buffer;
  }
}

MetricValue evalMetricClassification(const Tree& tree, const TrainingProblem& data) {
  if (data.mode() != ForestMode::Classification) {
    throw std::invalid_argument("evalMetricClassification: classification data required");
  }
  SubtreeScorer scorer(tree, data);
  std::vector<std::int32_t> positions(data.size());
  std::iota(positions.begin(), positions.end(), 0);
  return MetricValue{scorer.rawScore(tree.root, positions, nullptr)};
}

MetricValue evalMetricRegression(const Tree& tree, const TrainingProblem& data) {
  if (data.mode() != ForestMode::Regression) {
    throw std::invalid_argument("evalMetricRegression: regression data required");
  }
  SubtreeScorer scorer(tree, data);
  std::vector<std::int32_t> positions(data.size());
  std::iota(positions.begin(), positions.end(), 0);
  double raw = scorer.rawScore(tree.root, positions, nullptr);
  return MetricValue{1.0 / (raw + kErrorGuard)};
}

Forest discTrainForest(const Forest& forest, const TrainingProblem& data_d,
                       const DiscParams& params, DiscScoring scoring, RetrainLog* log) {
  if (forest.mode != data_d.mode() || forest.features != data_d.featureFamily()) {
    throw std::invalid_argument("discTrainForest: forest and dataset are incompatible");
  }
  if (data_d.size() == 0) throw std::invalid_argument("discTrainForest: empty dataset");

  Forest out = forest;
  std::vector<std::vector<RetrainLogEntry>> logs(out.trees.size());
  parallelFor(out.trees.size(), [&](std::size_t t) {
    Rng rng(deriveSeed(params.seed, "disc-tree", t));
    std::unique_ptr<TrainingProblem> subset = data_d.clone();
    if (params.subset_fraction < 1.0) {
      std::size_t keep = static_cast<std::size_t>(
          std::llround(params.subset_fraction * static_cast<double>(subset->size())));
      if (keep == 0) keep = 1;
      subset->keepRows(sampleRowSubset(subset->size(), keep, rng));
    }
    DiscTreeTrainer trainer(out.trees[t], *subset, params, scoring, forest.params,
                            static_cast<std::int32_t>(t), logs[t], rng);
    trainer.run();
  });
  if (log) {
    for (auto& entries : logs) {
      log->entries.insert(log->entries.end(), entries.begin(), entries.end());
    }
  }
  return out;
}

IterationResult discTrainIterations(
    const Forest& forest,
    const std::function<std::unique_ptr<TrainingProblem>(int iteration)>& make_dataset,
    const DiscParams& params, const std::function<double(const Forest&)>& evaluate,
    DiscScoring scoring, RetrainLog* log) {
  if (params.iterations < 1) throw std::invalid_argument("discTrainIterations: iterations >= 1");
  IterationResult result;
  result.forest = forest;
  result.trace.push_back(evaluate(result.forest));
  for (int it = 1; it <= params.iterations; ++it) {
    std::unique_ptr<TrainingProblem> data = make_dataset(it);
    DiscParams step = params;
    step.seed = deriveSeed(params.seed, "iteration", static_cast<std::uint64_t>(it));
    result.forest = discTrainForest(result.forest, *data, step, scoring, log);
    result.trace.push_back(evaluate(result.forest));
  }
  return result;
}

}  // namespace mousepose
