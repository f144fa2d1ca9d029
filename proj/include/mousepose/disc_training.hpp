#pragma once

#include <functional>
#include <iosfwd>
#include <string>

#include "mousepose/training.hpp"

namespace mousepose {

struct DiscParams {
  std::int32_t m = 50;              // candidate tests tried per node
  std::int32_t leaf_capacity = 60;  // l_n for shrink/grow, normally the baseline's
  double subset_fraction = 0.5;     // |D'_d| / |D_d| drawn per tree
  std::int32_t iterations = 1;
  std::int32_t start_level = 0;  // nodes above this level are only routed through
  bool keep_incumbent = true;    // incumbent test competes with the sampled ones
  std::uint64_t seed = 0;
};

// Higher is better for both modes: Eq-style correct-count for classification,
// reciprocal summed joint error for regression (1e9 in the perfect-fit regime
// via the 1e-9 guard).
struct MetricValue {
  double value = 0.0;
};

// How candidate tests are scored during retraining: by the end-to-end metric
// of the subtree, or by the local information gain (the §2.4.1 control
// variant).
enum class DiscScoring { SubtreeMetric, LocalGain };

enum class DiscAction : std::uint8_t { Rescored, Shrunk, Grown, LeafRebuilt };

struct RetrainLogEntry {
  std::int32_t tree = 0;
  std::int32_t level = 0;
  std::int64_t set_size = 0;
  DiscAction action = DiscAction::Rescored;
  double incumbent_score = 0.0;
  double best_score = 0.0;
};

struct RetrainLog {
  std::vector<RetrainLogEntry> entries;

  // Rescored nodes whose installed score fell below the incumbent's. Must be
  // zero whenever the incumbent competes.
  int monotonicityViolations() const;
  void writeCsv(std::ostream& out) const;
};

const char* toString(DiscAction action);

// Tree-level performance of a single tree over a whole dataset.
MetricValue evalMetricClassification(const Tree& tree, const TrainingProblem& data);
MetricValue evalMetricRegression(const Tree& tree, const TrainingProblem& data);

// Discriminatively retrains every tree of the forest against data_d, node
// at a time in preorder, with subtree shrink/grow. Each tree draws its own
// subset of data_d. base_params supplies the depth budget and the candidate
// scheme used by grow. Deterministic given (forest, data, params.seed).
Forest discTrainForest(const Forest& forest, const TrainingProblem& data_d,
                       const DiscParams& params, DiscScoring scoring = DiscScoring::SubtreeMetric,
                       RetrainLog* log = nullptr);

// Repeated retraining; iteration n starts from the forest of iteration n-1
// and a freshly made dataset. evaluate() is recorded before the first
// iteration and after each one, so the trace has iterations+1 entries.
struct IterationResult {
  Forest forest;
  std::vector<double> trace;
};
IterationResult discTrainIterations(
    const Forest& forest,
    const std::function<std::unique_ptr<TrainingProblem>(int iteration)>& make_dataset,
    const DiscParams& params, const std::function<double(const Forest&)>& evaluate,
    DiscScoring scoring = DiscScoring::SubtreeMetric, RetrainLog* log = nullptr);

}  // namespace mousepose
