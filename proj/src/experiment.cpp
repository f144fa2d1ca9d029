#include "mousepose/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "mousepose/forest_io.hpp"
#include "mousepose/parallel.hpp"

namespace mousepose {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* kGaussAblationIds[][2] = {
    {"forestSize", "fig3"}, {"m", "fig4"}, {"leafSize", "fig5"},
    {"startLevel", "fig6"}, {"iterations", "fig7"},
};

std::vector<double> defaultAblationGrid(AblationKind kind) {
  switch (kind) {
    case AblationKind::ForestSize: return {1, 3, 5, 7, 9, 11, 13, 15, 17, 19};
    case AblationKind::CandidateCount: return {10, 20, 40, 80, 160, 320, 640};
    case AblationKind::LeafSize: return {60, 240, 1000, 4000, 10000};
    case AblationKind::StartLevel: return {0, 2, 4, 6, 8};
    case AblationKind::Iterations: return {1, 2, 3, 4, 5};
  }
  return {};
}

GaussBenchConfig defaultGaussConfig(const std::string& scale) {
  GaussBenchConfig g;
  g.dataset_size = scale == "full" ? 1000000 : 100000;
  g.train.num_trees = 5;
  g.train.m = 50;
  g.train.thresholds_per_feature = 1;
  g.train.leaf_capacity = 60;
  g.train.max_levels = 20;
  g.disc.m = 50;
  g.disc.leaf_capacity = 60;
  g.disc.subset_fraction = 0.5;
  return g;
}

PoseBenchConfig defaultPoseConfig(const std::string& scale) {
  PoseBenchConfig p = PoseBenchConfig::deskScale(0);
  if (scale == "full") {
    p.image_width = 160;
    p.image_height = 120;
    p.train_images = 240000;
    p.test_images = 700;
  }
  return p;
}

LabelBenchConfig defaultLabelConfig(const std::string& scale) {
  LabelBenchConfig l = LabelBenchConfig::deskScale(0);
  if (scale == "full") {
    l.image_width = 160;
    l.image_height = 120;
    l.train_images = 360;
    l.disc_images = 360;
    l.test_images = 100;
    l.pixels_per_image = 1380;
  }
  return l;
}

json trainParamsJson(const TrainParams& p) {
  return json{{"num_trees", p.num_trees},
              {"m", p.m},
              {"thresholds_per_feature", p.thresholds_per_feature},
              {"leaf_capacity", p.leaf_capacity},
              {"max_levels", p.max_levels},
              {"lambda_max", p.lambda_max},
              {"bagging_fraction", p.bagging_fraction},
              {"tau", p.tau}};
}

void trainParamsFromJson(const json& j, TrainParams* p) {
  p->num_trees = j.value("num_trees", p->num_trees);
  p->m = j.value("m", p->m);
  p->thresholds_per_feature = j.value("thresholds_per_feature", p->thresholds_per_feature);
  p->leaf_capacity = j.value("leaf_capacity", p->leaf_capacity);
  p->max_levels = j.value("max_levels", p->max_levels);
  p->lambda_max = j.value("lambda_max", p->lambda_max);
  p->bagging_fraction = j.value("bagging_fraction", p->bagging_fraction);
  p->tau = j.value("tau", p->tau);
}

json discParamsJson(const DiscParams& p) {
  return json{{"m", p.m},
              {"leaf_capacity", p.leaf_capacity},
              {"subset_fraction", p.subset_fraction},
              {"iterations", p.iterations},
              {"start_level", p.start_level},
              {"keep_incumbent", p.keep_incumbent}};
}

void discParamsFromJson(const json& j, DiscParams* p) {
  p->m = j.value("m", p->m);
  p->leaf_capacity = j.value("leaf_capacity", p->leaf_capacity);
  p->subset_fraction = j.value("subset_fraction", p->subset_fraction);
  p->iterations = j.value("iterations", p->iterations);
  p->start_level = j.value("start_level", p->start_level);
  p->keep_incumbent = j.value("keep_incumbent", p->keep_incumbent);
}

TrainParams& activeTrain(ExperimentConfig& cfg) {
  if (cfg.task == "gauss") return cfg.gauss.train;
  if (cfg.task == "pose") return cfg.pose.train;
  return cfg.label.train;
}

DiscParams& activeDisc(ExperimentConfig& cfg) {
  if (cfg.task == "gauss") return cfg.gauss.disc;
  if (cfg.task == "pose") return cfg.pose.disc;
  return cfg.label.disc;
}

json configJson(const ExperimentConfig& cfg) {
  ExperimentConfig copy = cfg;
  json j;
  j["task"] = cfg.task;
  j["scale"] = cfg.scale;
  j["seed"] = cfg.seed;
  j["output_dir"] = cfg.output_dir;
  j["train"] = trainParamsJson(activeTrain(copy));
  j["disc"] = discParamsJson(activeDisc(copy));
  if (cfg.task == "gauss") {
    j["gauss"] = json{{"dataset_size", cfg.gauss.dataset_size},
                      {"ablations", cfg.gauss_ablations}};
  } else if (cfg.task == "pose") {
    j["pose"] = json{{"image_width", cfg.pose.image_width},
                     {"image_height", cfg.pose.image_height},
                     {"train_images", cfg.pose.train_images},
                     {"test_images", cfg.pose.test_images},
                     {"train_pixels_per_image", cfg.pose.train_pixels_per_image},
                     {"disc_pixels_per_image", cfg.pose.disc_pixels_per_image},
                     {"query_pixels", cfg.pose.query_pixels},
                     {"noise_sigmas", cfg.pose.noise_sigmas}};
  } else {
    j["label"] = json{{"image_width", cfg.label.image_width},
                      {"image_height", cfg.label.image_height},
                      {"train_images", cfg.label.train_images},
                      {"disc_images", cfg.label.disc_images},
                      {"test_images", cfg.label.test_images},
                      {"pixels_per_image", cfg.label.pixels_per_image},
                      {"noise_sigma", cfg.label.noise_sigma}};
  }
  return j;
}

std::string hex16(std::uint64_t v) {
  char buffer[20];
  std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(v));
  return buffer;
}

std::string formatValue(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.10g", v);
  return buffer;
}

std::uint64_t hashPoints(std::span<const LabeledPoint2D> points, std::uint64_t h) {
  for (const LabeledPoint2D& p : points) {
    h = fnv1a64(&p.x, sizeof(p.x), h);
    h = fnv1a64(&p.y, sizeof(p.y), h);
    h = fnv1a64(&p.label, sizeof(p.label), h);
  }
  return h;
}

std::uint64_t hashScenes(const SceneSet& scenes, std::uint64_t h) {
  for (const RenderedScene& scene : scenes) {
    h = fnv1a64(scene.depth.values.data(), scene.depth.values.size() * sizeof(float), h);
    h = fnv1a64(scene.joints.data(), scene.joints.size() * sizeof(Vec3), h);
  }
  return h;
}

ResultTable makeTable(std::vector<std::string> columns, std::uint64_t config_hash,
                      std::uint64_t data_hash) {
  ResultTable t;
  t.columns = std::move(columns);
  t.config_hash = config_hash;
  t.data_hash = data_hash;
  auto now = std::chrono::system_clock::now();
  t.timestamp = std::to_string(
      std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count());
  return t;
}

void writeText(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace

ExperimentConfig ExperimentConfig::forTask(const std::string& task, const std::string& scale,
                                           std::uint64_t seed) {
  if (task != "gauss" && task != "pose" && task != "label") {
    throw std::invalid_argument("unknown task '" + task + "'");
  }
  if (scale != "desk" && scale != "full") {
    throw std::invalid_argument("unknown scale '" + scale + "'");
  }
  ExperimentConfig cfg;
  cfg.task = task;
  cfg.scale = scale;
  cfg.seed = seed;
  cfg.gauss = defaultGaussConfig(scale);
  cfg.pose = defaultPoseConfig(scale);
  cfg.label = defaultLabelConfig(scale);
  return cfg;
}

ExperimentConfig loadExperimentConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": invalid JSON: " + e.what());
  }
  std::string task = j.value("task", "gauss");
  std::string scale = j.value("scale", "desk");
  ExperimentConfig cfg = ExperimentConfig::forTask(task, scale, j.value("seed", kCanonicalSeed));
  cfg.output_dir = j.value("output_dir", cfg.output_dir);
  if (j.contains("train")) trainParamsFromJson(j["train"], &activeTrain(cfg));
  if (j.contains("disc")) discParamsFromJson(j["disc"], &activeDisc(cfg));
  if (j.contains("gauss")) {
    const json& g = j["gauss"];
    cfg.gauss.dataset_size = g.value("dataset_size", cfg.gauss.dataset_size);
    if (g.contains("ablations")) {
      cfg.gauss_ablations = g["ablations"].get<std::vector<std::string>>();
    }
  }
  if (j.contains("pose")) {
    const json& p = j["pose"];
    cfg.pose.image_width = p.value("image_width", cfg.pose.image_width);
    cfg.pose.image_height = p.value("image_height", cfg.pose.image_height);
    cfg.pose.train_images = p.value("train_images", cfg.pose.train_images);
    cfg.pose.test_images = p.value("test_images", cfg.pose.test_images);
    cfg.pose.train_pixels_per_image =
        p.value("train_pixels_per_image", cfg.pose.train_pixels_per_image);
    cfg.pose.disc_pixels_per_image =
        p.value("disc_pixels_per_image", cfg.pose.disc_pixels_per_image);
    cfg.pose.query_pixels = p.value("query_pixels", cfg.pose.query_pixels);
    if (p.contains("noise_sigmas")) {
      cfg.pose.noise_sigmas = p["noise_sigmas"].get<std::vector<double>>();
    }
  }
  if (j.contains("label")) {
    const json& l = j["label"];
    cfg.label.image_width = l.value("image_width", cfg.label.image_width);
    cfg.label.image_height = l.value("image_height", cfg.label.image_height);
    cfg.label.train_images = l.value("train_images", cfg.label.train_images);
    cfg.label.disc_images = l.value("disc_images", cfg.label.disc_images);
    cfg.label.test_images = l.value("test_images", cfg.label.test_images);
    cfg.label.pixels_per_image = l.value("pixels_per_image", cfg.label.pixels_per_image);
    cfg.label.noise_sigma = l.value("noise_sigma", cfg.label.noise_sigma);
  }
  return cfg;
}

std::string experimentConfigJson(const ExperimentConfig& cfg) {
  return configJson(cfg).dump(2) + "\n";
}

void saveExperimentConfig(const ExperimentConfig& cfg, const std::string& path) {
  writeText(path, experimentConfigJson(cfg));
}

std::uint64_t configHash(const ExperimentConfig& cfg) {
  return fnv1a64(experimentConfigJson(cfg));
}

void writeCsv(const ResultTable& table, const std::string& path) {
  std::ostringstream out;
  out << "# config=" << hex16(table.config_hash) << " data=" << hex16(table.data_hash) << "\n";
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out << ',';
    out << table.columns[c];
  }
  out << "\n";
  for (const std::vector<double>& row : table.rows) {
    if (row.size() != table.columns.size()) {
      throw std::invalid_argument("writeCsv: incomplete row");
    }
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      out << formatValue(row[c]);
    }
    out << "\n";
  }
  writeText(path, out.str());
}

const std::vector<std::string>& figureSchema(const std::string& figure_id) {
  static const std::map<std::string, std::vector<std::string>> schemas = {
      {"fig3", {"forest_size", "baseline_acc", "disc_acc"}},
      {"fig4", {"m", "baseline_acc", "disc_acc"}},
      {"fig5", {"leaf_capacity", "baseline_acc", "disc_acc"}},
      {"fig6", {"start_level", "baseline_acc", "disc_acc"}},
      {"fig7", {"iteration", "accuracy"}},
      {"fig11", {"forest_size", "mean_joint_error_mm"}},
      {"fig12", {"m", "mean_joint_error_mm"}},
      {"fig13", {"joint", "baseline_error_mm", "disc_error_mm"}},
      {"fig14", {"joint", "ik_error_mm"}},
      {"fig15", {"noise_sigma", "mean_joint_error_mm"}},
      {"fig26", {"true_class", "pred_class", "fraction"}},
  };
  auto it = schemas.find(figure_id);
  if (it == schemas.end()) throw std::invalid_argument("unknown figure id '" + figure_id + "'");
  return it->second;
}

void emitFigureData(const ResultTable& table, const std::string& figure_id,
                    const std::string& path) {
  if (table.columns != figureSchema(figure_id)) {
    throw std::invalid_argument("table schema does not match " + figure_id);
  }
  writeCsv(table, path);
}

namespace {

ExperimentOutput runGauss(const ExperimentConfig& cfg, std::uint64_t config_hash) {
  GaussBenchConfig g = cfg.gauss;
  g.seed = cfg.seed;
  fs::path dir(cfg.output_dir);

  GaussDatasets data = makeGaussDatasets(g);
  std::uint64_t data_hash = hashPoints(data.train, fnv1a64("gauss"));
  data_hash = hashPoints(data.disc, data_hash);
  data_hash = hashPoints(data.eval, data_hash);
  {
    std::ofstream spec_out(dir / "mixture_spec.txt", std::ios::binary);
    writeMixtureSpec(data.spec, spec_out);
  }

  RetrainLog log;
  ControlResults control = runControlExperiment(g, data, &log);
  std::cout << "[gauss] baseline " << control.baseline_acc << " combined "
            << control.combined_baseline_acc << " variant " << control.variant_acc << " disc "
            << control.full_acc << "\n";

  TrainParams tp = g.train;
  tp.seed = deriveSeed(g.seed, "ablation-baseline");
  GaussianProblem train_problem(data.train);
  Forest baseline = trainForest(train_problem, tp);
  saveForest(baseline, (dir / "model_baseline.mpf").string());

  GaussianProblem disc_problem(data.disc);
  DiscParams dp = g.disc;
  dp.seed = deriveSeed(g.seed, "control-full");
  Forest disc = discTrainForest(baseline, disc_problem, dp, DiscScoring::SubtreeMetric, nullptr);
  saveForest(disc, (dir / "model_disc.mpf").string());

  ExperimentOutput out;
  json summary;
  summary["task"] = "gauss";
  summary["config_hash"] = hex16(config_hash);
  summary["data_hash"] = hex16(data_hash);
  summary["baseline_acc"] = control.baseline_acc;
  summary["disc_acc"] = control.full_acc;
  summary["combined_baseline_acc"] = control.combined_baseline_acc;
  summary["variant_acc"] = control.variant_acc;

  json ablation_summary;
  for (const std::string& name : cfg.gauss_ablations) {
    AblationKind kind;
    if (!ablationKindFromString(name, &kind)) {
      throw std::invalid_argument("unknown ablation kind '" + name + "'");
    }
    std::vector<double> grid = defaultAblationGrid(kind);
    std::vector<AblationRow> rows = runAblation(kind, grid, g, data, &log);
    const char* figure_id = nullptr;
    for (auto& entry : kGaussAblationIds) {
      if (name == entry[0]) figure_id = entry[1];
    }
    ResultTable table = makeTable(figureSchema(figure_id), config_hash, data_hash);
    for (const AblationRow& row : rows) {
      if (kind == AblationKind::Iterations) {
        table.rows.push_back({row.value, row.disc_acc});
      } else {
        table.rows.push_back({row.value, row.baseline_acc, row.disc_acc});
      }
    }
    if (kind == AblationKind::Iterations) {
      // Prepend the iteration-0 baseline row.
      table.rows.insert(table.rows.begin(), {0.0, rows.front().baseline_acc});
    }
    emitFigureData(table, figure_id, (dir / (std::string(figure_id) + ".csv")).string());
    out.tables[figure_id] = std::move(table);
    json rows_json = json::array();
    for (const AblationRow& row : rows) {
      rows_json.push_back({{"value", row.value},
                           {"baseline_acc", row.baseline_acc},
                           {"disc_acc", row.disc_acc}});
    }
    ablation_summary[name] = std::move(rows_json);
    std::cout << "[gauss] ablation " << name << " done\n";
  }
  summary["ablations"] = std::move(ablation_summary);
  summary["monotonicity_violations"] = log.monotonicityViolations();
  {
    std::ofstream log_out(dir / "retrain_log.csv", std::ios::binary);
    log.writeCsv(log_out);
  }
  out.summary_json = summary.dump(2) + "\n";
  return out;
}

ExperimentOutput runPoseTask(const ExperimentConfig& cfg, std::uint64_t config_hash) {
  PoseBenchConfig p = cfg.pose;
  p.seed = cfg.seed;
  fs::path dir(cfg.output_dir);

  PoseBenchResult result = runPoseBench(p);
  std::uint64_t data_hash = hashScenes(*result.test_scenes, fnv1a64("pose"));
  saveForest(result.baseline, (dir / "model_baseline.mpf").string());
  saveForest(result.disc, (dir / "model_disc.mpf").string());

  ExperimentOutput out;
  // Per-joint comparison (the discriminative-training effect figure).
  ResultTable fig13 = makeTable(figureSchema("fig13"), config_hash, data_hash);
  for (int j = 0; j < kTopJointCount; ++j) {
    auto k = static_cast<std::size_t>(j);
    fig13.rows.push_back(
        {static_cast<double>(j + 1), result.baseline_eval.per_joint[k],
         result.disc_eval.per_joint[k]});
  }
  emitFigureData(fig13, "fig13", (dir / "fig13.csv").string());

  ResultTable fig15 = makeTable(figureSchema("fig15"), config_hash, data_hash);
  for (auto [sigma, err] : result.noise_curve) fig15.rows.push_back({sigma, err});
  emitFigureData(fig15, "fig15", (dir / "fig15.csv").string());

  // Limb errors after IK fusion from estimated main joints and true paws.
  SkeletonModel model = SkeletonModel::standardMouse();
  const SceneSet& tests = *result.test_scenes;
  std::size_t ik_images = std::min<std::size_t>(tests.size(), 100);
  std::array<double, kJointCount> limb_error{};
  for (std::size_t i = 0; i < ik_images; ++i) {
    const RenderedScene& scene = tests[i];
    JointEstimate estimate = estimateJoints(result.disc, scene.depth, result.camera,
                                            p.query_pixels, deriveSeed(cfg.seed, "ik-mains", i));
    std::array<Vec3, kMainJointCount> main;
    for (int j = 0; j < kMainJointCount; ++j) {
      auto k = static_cast<std::size_t>(j);
      main[k] = estimate.joints[k].missing ? scene.joints[k] : estimate.joints[k].position;
    }
    std::array<std::optional<Vec3>, kLimbCount> paws{
        scene.joints[kPawForeLeft], scene.joints[kPawForeRight], scene.joints[kPawHindLeft],
        scene.joints[kPawHindRight]};
    IkResult fused = ikFuse(model, main, paws);
    for (int j = kForeLeftUpper; j < kJointCount; ++j) {
      auto k = static_cast<std::size_t>(j);
      limb_error[k] += distance(fused.joints[k], scene.joints[k]);
    }
  }
  ResultTable fig14 = makeTable(figureSchema("fig14"), config_hash, data_hash);
  for (int j = kForeLeftUpper; j < kJointCount; ++j) {
    auto k = static_cast<std::size_t>(j);
    fig14.rows.push_back(
        {static_cast<double>(j + 1), limb_error[k] / static_cast<double>(ik_images)});
  }
  emitFigureData(fig14, "fig14", (dir / "fig14.csv").string());

  {
    std::ofstream log_out(dir / "retrain_log.csv", std::ios::binary);
    result.log.writeCsv(log_out);
  }

  json summary;
  summary["task"] = "pose";
  summary["config_hash"] = hex16(config_hash);
  summary["data_hash"] = hex16(data_hash);
  summary["baseline_mean_error_mm"] = result.baseline_eval.mean;
  summary["disc_mean_error_mm"] = result.disc_eval.mean;
  summary["relative_improvement"] =
      (result.baseline_eval.mean - result.disc_eval.mean) / result.baseline_eval.mean;
  json noise = json::array();
  for (auto [sigma, err] : result.noise_curve) {
    noise.push_back({{"sigma", sigma}, {"mean_error_mm", err}});
  }
  summary["noise_curve"] = std::move(noise);
  summary["monotonicity_violations"] = result.log.monotonicityViolations();
  out.tables["fig13"] = std::move(fig13);
  out.tables["fig14"] = std::move(fig14);
  out.tables["fig15"] = std::move(fig15);
  out.summary_json = summary.dump(2) + "\n";
  std::cout << "[pose] baseline " << result.baseline_eval.mean << " mm, disc "
            << result.disc_eval.mean << " mm\n";
  return out;
}

ExperimentOutput runLabelTask(const ExperimentConfig& cfg, std::uint64_t config_hash) {
  LabelBenchConfig l = cfg.label;
  l.seed = cfg.seed;
  fs::path dir(cfg.output_dir);

  LabelBenchResult result = runLabelBench(l);
  std::uint64_t data_hash = hashScenes(*result.test_scenes, fnv1a64("label"));
  saveForest(result.baseline, (dir / "model_baseline.mpf").string());
  saveForest(result.disc, (dir / "model_disc.mpf").string());

  ResultTable fig26 = makeTable(figureSchema("fig26"), config_hash, data_hash);
  for (int t = 0; t < kPartClassCount; ++t) {
    for (int q = 0; q < kPartClassCount; ++q) {
      fig26.rows.push_back({static_cast<double>(t), static_cast<double>(q),
                            result.confusion.rows[static_cast<std::size_t>(t)]
                                                 [static_cast<std::size_t>(q)]});
    }
  }
  emitFigureData(fig26, "fig26", (dir / "fig26.csv").string());
  {
    std::ofstream log_out(dir / "retrain_log.csv", std::ios::binary);
    result.log.writeCsv(log_out);
  }

  json summary;
  summary["task"] = "label";
  summary["config_hash"] = hex16(config_hash);
  summary["data_hash"] = hex16(data_hash);
  summary["baseline_accuracy"] = result.baseline_accuracy;
  summary["disc_accuracy"] = result.disc_accuracy;
  json diag = json::array();
  for (int c = 0; c < kPartClassCount; ++c) diag.push_back(result.confusion.diagonal(c));
  summary["confusion_diagonal"] = std::move(diag);
  summary["monotonicity_violations"] = result.log.monotonicityViolations();

  ExperimentOutput out;
  out.tables["fig26"] = std::move(fig26);
  out.summary_json = summary.dump(2) + "\n";
  std::cout << "[label] baseline " << result.baseline_accuracy << " disc "
            << result.disc_accuracy << "\n";
  return out;
}

}  // namespace

ExperimentOutput runExperiment(const ExperimentConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  std::uint64_t config_hash = configHash(cfg);
  saveExperimentConfig(cfg, (fs::path(cfg.output_dir) / "config.json").string());

  auto started = std::chrono::system_clock::now();
  std::cout << "run " << cfg.task << " (" << cfg.scale << ") seed " << cfg.seed << " config "
            << hex16(config_hash) << " at "
            << std::chrono::duration_cast<std::chrono::seconds>(started.time_since_epoch()).count()
            << "\n";

  ExperimentOutput out;
  if (cfg.task == "gauss") {
    out = runGauss(cfg, config_hash);
  } else if (cfg.task == "pose") {
    out = runPoseTask(cfg, config_hash);
  } else if (cfg.task == "label") {
    out = runLabelTask(cfg, config_hash);
  } else {
    throw std::invalid_argument("unknown task '" + cfg.task + "'");
  }
  writeText((fs::path(cfg.output_dir) / "summary.json").string(), out.summary_json);
  return out;
}

}  // namespace mousepose
