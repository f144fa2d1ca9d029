#pragma once

#include <map>
#include <string>

#include "mousepose/gauss_bench.hpp"
#include "mousepose/pose_pipeline.hpp"

namespace mousepose {

// The repo-wide canonical seed; every quantitative band in the test suite is
// frozen against it.
inline constexpr std::uint64_t kCanonicalSeed = 20250607;

struct ExperimentConfig {
  std::string task = "gauss";  // gauss | pose | label
  std::string scale = "desk";  // desk | full
  std::uint64_t seed = kCanonicalSeed;
  std::string output_dir = "out";

  GaussBenchConfig gauss{};
  std::vector<std::string> gauss_ablations{"forestSize", "m", "leafSize", "startLevel",
                                           "iterations"};
  PoseBenchConfig pose{};
  LabelBenchConfig label{};

  static ExperimentConfig forTask(const std::string& task, const std::string& scale,
                                  std::uint64_t seed);
};

// JSON round trip; load merges the file over task defaults.
ExperimentConfig loadExperimentConfig(const std::string& path);
std::string experimentConfigJson(const ExperimentConfig& cfg);
void saveExperimentConfig(const ExperimentConfig& cfg, const std::string& path);

// Hash of the canonical config serialization.
std::uint64_t configHash(const ExperimentConfig& cfg);

// Plot-ready numeric table with provenance. The timestamp stays in memory
// (console logs only): persisted artifacts must be byte-identical across
// re-runs.
struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::uint64_t config_hash = 0;
  std::uint64_t data_hash = 0;
  std::string timestamp;
};

void writeCsv(const ResultTable& table, const std::string& path);

// Emits a table as the named paper figure's CSV, verifying the schema.
// Known ids: fig3..fig7 (Gauss ablations), fig11..fig15 (pose), fig26
// (labeling confusion).
void emitFigureData(const ResultTable& table, const std::string& figure_id,
                    const std::string& path);
const std::vector<std::string>& figureSchema(const std::string& figure_id);

struct ExperimentOutput {
  std::map<std::string, ResultTable> tables;  // keyed by figure/table name
  std::string summary_json;
};

// Runs the configured pipeline end to end and writes CSVs, a JSON summary,
// retraining logs, and model files under output_dir. Idempotent for a given
// config.
ExperimentOutput runExperiment(const ExperimentConfig& cfg);

}  // namespace mousepose
