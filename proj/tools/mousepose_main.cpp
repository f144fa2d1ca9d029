// Command-line front end: dataset generation, training, retraining,
// evaluation, ablation sweeps, model inspection and the IK demo.
//
// Exit codes: 0 ok, 1 usage error, 2 data/file error, 3 internal error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "mousepose/experiment.hpp"
#include "mousepose/forest_io.hpp"
#include "mousepose/image_io.hpp"
#include "mousepose/parallel.hpp"

namespace fs = std::filesystem;
using namespace mousepose;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

struct ConfigArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output;
  std::optional<std::string> scale;

  ExperimentConfig resolve(const std::string& task) const {
    ExperimentConfig cfg;
    if (!config_path.empty()) {
      cfg = loadExperimentConfig(config_path);
      if (cfg.task != task && !task.empty()) cfg = retask(cfg, task);
    } else {
      cfg = ExperimentConfig::forTask(task, scale.value_or("desk"), kCanonicalSeed);
    }
    if (seed) cfg.seed = *seed;
    if (output) cfg.output_dir = *output;
    if (scale && !config_path.empty()) {
      // Scale switches dataset sizes; rebuild defaults and re-apply the file.
      ExperimentConfig rebuilt = ExperimentConfig::forTask(cfg.task, *scale, cfg.seed);
      rebuilt.output_dir = cfg.output_dir;
      cfg = rebuilt;
    }
    return cfg;
  }

  static ExperimentConfig retask(ExperimentConfig cfg, const std::string& task) {
    cfg.task = task;
    return cfg;
  }
};

void addConfigFlags(CLI::App* cmd, ConfigArgs* args) {
  cmd->add_option("--config", args->config_path, "JSON experiment config");
  cmd->add_option("--seed", args->seed, "root seed override");
  cmd->add_option("--out", args->output, "output directory override");
  cmd->add_option("--scale", args->scale, "desk or full")
      ->check(CLI::IsMember({"desk", "full"}));
}

GaussBenchConfig gaussConfigOf(const ExperimentConfig& cfg) {
  GaussBenchConfig g = cfg.gauss;
  g.seed = cfg.seed;
  return g;
}

int runCli(int argc, char** argv) {
  CLI::App app{"mousepose: decision-forest training, discriminative retraining, and the "
               "synthetic mouse-pose experiment suite"};
  app.require_subcommand(1);

  // ---- run ----
  ConfigArgs run_args;
  std::string run_task = "gauss";
  CLI::App* run = app.add_subcommand("run", "run a full experiment from a config");
  run->add_option("--task", run_task, "gauss | pose | label")
      ->check(CLI::IsMember({"gauss", "pose", "label"}));
  addConfigFlags(run, &run_args);
  run->callback([&]() { runExperiment(run_args.resolve(run_task)); });

  // ---- gauss ----
  CLI::App* gauss = app.add_subcommand("gauss", "2D Gaussian benchmark");
  gauss->require_subcommand(1);

  ConfigArgs gauss_gen_args;
  std::string gauss_gen_out = "gauss_data";
  CLI::App* gauss_gen = gauss->add_subcommand("gen", "sample D_t, D_d, D_e and the mixture spec");
  addConfigFlags(gauss_gen, &gauss_gen_args);
  gauss_gen->add_option("--data-dir", gauss_gen_out, "dataset directory");
  gauss_gen->callback([&]() {
    ExperimentConfig cfg = gauss_gen_args.resolve("gauss");
    GaussDatasets data = makeGaussDatasets(gaussConfigOf(cfg));
    fs::create_directories(gauss_gen_out);
    std::ofstream spec_out(fs::path(gauss_gen_out) / "mixture_spec.txt", std::ios::binary);
    writeMixtureSpec(data.spec, spec_out);
    writePointsFile(data.train, (fs::path(gauss_gen_out) / "train.mpts").string());
    writePointsFile(data.disc, (fs::path(gauss_gen_out) / "disc.mpts").string());
    writePointsFile(data.eval, (fs::path(gauss_gen_out) / "eval.mpts").string());
    std::cout << "wrote " << gauss_gen_out << " (" << data.train.size() << " points each)\n";
  });

  ConfigArgs gauss_train_args;
  std::string gauss_train_data, gauss_train_model = "model_baseline.mpf";
  CLI::App* gauss_train = gauss->add_subcommand("train", "train the baseline forest");
  addConfigFlags(gauss_train, &gauss_train_args);
  gauss_train->add_option("--data", gauss_train_data, "points file (D_t)")->required();
  gauss_train->add_option("--model", gauss_train_model, "output model path");
  gauss_train->callback([&]() {
    ExperimentConfig cfg = gauss_train_args.resolve("gauss");
    GaussBenchConfig g = gaussConfigOf(cfg);
    std::vector<LabeledPoint2D> points = readPointsFile(gauss_train_data);
    GaussianProblem problem(points);
    TrainParams tp = g.train;
    tp.seed = deriveSeed(g.seed, "ablation-baseline");
    Forest forest = trainForest(problem, tp);
    saveForest(forest, gauss_train_model);
    std::cout << "trained " << forest.trees.size() << " trees -> " << gauss_train_model << "\n";
  });

  ConfigArgs gauss_disc_args;
  std::string gauss_disc_data, gauss_disc_in, gauss_disc_out = "model_disc.mpf";
  std::string gauss_disc_log;
  bool gauss_disc_variant = false;
  CLI::App* gauss_disc = gauss->add_subcommand("disc", "discriminatively retrain a forest");
  addConfigFlags(gauss_disc, &gauss_disc_args);
  gauss_disc->add_option("--data", gauss_disc_data, "points file (D_d)")->required();
  gauss_disc->add_option("--model", gauss_disc_in, "baseline model")->required();
  gauss_disc->add_option("--out", gauss_disc_out, "retrained model path");
  gauss_disc->add_option("--log", gauss_disc_log, "retraining log CSV");
  gauss_disc->add_flag("--local-gain", gauss_disc_variant,
                       "score candidates by local gain instead of the subtree metric");
  gauss_disc->callback([&]() {
    ExperimentConfig cfg = gauss_disc_args.resolve("gauss");
    GaussBenchConfig g = gaussConfigOf(cfg);
    Forest baseline = loadForest(gauss_disc_in);
    std::vector<LabeledPoint2D> points = readPointsFile(gauss_disc_data);
    GaussianProblem problem(points);
    DiscParams dp = g.disc;
    dp.seed = deriveSeed(g.seed, "control-full");
    RetrainLog log;
    Forest disc = discTrainForest(
        baseline, problem, dp,
        gauss_disc_variant ? DiscScoring::LocalGain : DiscScoring::SubtreeMetric, &log);
    saveForest(disc, gauss_disc_out);
    if (!gauss_disc_log.empty()) {
      std::ofstream log_out(gauss_disc_log, std::ios::binary);
      log.writeCsv(log_out);
    }
    std::cout << "retrained -> " << gauss_disc_out << " (monotonicity violations "
              << log.monotonicityViolations() << ")\n";
  });

  std::string gauss_eval_data, gauss_eval_model;
  CLI::App* gauss_eval = gauss->add_subcommand("eval", "classification accuracy on a points file");
  gauss_eval->add_option("--data", gauss_eval_data, "points file (D_e)")->required();
  gauss_eval->add_option("--model", gauss_eval_model, "model path")->required();
  gauss_eval->callback([&]() {
    Forest forest = loadForest(gauss_eval_model);
    std::vector<LabeledPoint2D> points = readPointsFile(gauss_eval_data);
    std::cout << "accuracy " << accuracy(forest, points) << "\n";
  });

  ConfigArgs gauss_ablate_args;
  std::string gauss_ablate_kind = "forestSize";
  CLI::App* gauss_ablate = gauss->add_subcommand("ablate", "run one parameter sweep");
  addConfigFlags(gauss_ablate, &gauss_ablate_args);
  gauss_ablate->add_option("--kind", gauss_ablate_kind,
                           "forestSize | m | leafSize | startLevel | iterations")
      ->check(CLI::IsMember({"forestSize", "m", "leafSize", "startLevel", "iterations"}));
  gauss_ablate->callback([&]() {
    ExperimentConfig cfg = gauss_ablate_args.resolve("gauss");
    cfg.gauss_ablations = {gauss_ablate_kind};
    runExperiment(cfg);
  });

  // ---- pose ----
  CLI::App* pose = app.add_subcommand("pose", "synthetic joint-regression experiments");
  pose->require_subcommand(1);

  ConfigArgs pose_run_args;
  for (const char* name : {"train", "disc", "eval"}) {
    CLI::App* sub = pose->add_subcommand(
        name, std::string("pose pipeline (") + name + " is part of one deterministic run)");
    addConfigFlags(sub, &pose_run_args);
    if (std::string(name) == "eval") {
      static double noise = 0.0;
      sub->add_option("--noise", noise, "test-time depth noise sigma (mm)");
      sub->callback([&]() {
        ExperimentConfig cfg = pose_run_args.resolve("pose");
        cfg.pose.noise_sigmas = {noise};
        runExperiment(cfg);
      });
    } else {
      sub->callback([&]() { runExperiment(pose_run_args.resolve("pose")); });
    }
  }

  ConfigArgs pose_gen_args;
  std::string pose_gen_dir = "pose_data";
  int pose_gen_count = 10;
  double pose_gen_noise = 0.0;
  CLI::App* pose_gen = pose->add_subcommand("gen", "render depth/label/truth files");
  addConfigFlags(pose_gen, &pose_gen_args);
  pose_gen->add_option("--data-dir", pose_gen_dir, "output directory");
  pose_gen->add_option("--count", pose_gen_count, "number of images");
  pose_gen->add_option("--noise", pose_gen_noise, "depth noise sigma (mm)");
  pose_gen->callback([&]() {
    ExperimentConfig cfg = pose_gen_args.resolve("pose");
    SkeletonModel model = SkeletonModel::standardMouse();
    Camera camera = makeCamera(cfg.pose.image_width, cfg.pose.image_height);
    auto scenes = renderScenes(model, PerturbationRanges{}, camera,
                               static_cast<std::size_t>(pose_gen_count), pose_gen_noise,
                               deriveSeed(cfg.seed, "pose-gen"));
    fs::create_directories(pose_gen_dir);
    for (std::size_t i = 0; i < scenes->size(); ++i) {
      const RenderedScene& scene = (*scenes)[i];
      fs::path base = fs::path(pose_gen_dir) / ("scene_" + std::to_string(i));
      saveDepthImage(scene.depth, base.string() + ".mpd");
      saveLabelImage(scene.labels, base.string() + ".mpl");
      saveTruthSidecar(TruthSidecar{camera, scene.joints}, base.string() + ".truth");
    }
    std::cout << "wrote " << scenes->size() << " scenes to " << pose_gen_dir << "\n";
  });

  // ---- label ----
  CLI::App* label = app.add_subcommand("label", "per-pixel part labeling experiments");
  label->require_subcommand(1);
  ConfigArgs label_args;
  for (const char* name : {"train", "eval"}) {
    CLI::App* sub = label->add_subcommand(
        name, std::string("labeling pipeline (") + name + " is part of one deterministic run)");
    addConfigFlags(sub, &label_args);
    sub->callback([&]() { runExperiment(label_args.resolve("label")); });
  }

  // ---- ik ----
  CLI::App* ik = app.add_subcommand("ik", "inverse-kinematics utilities");
  std::uint64_t ik_seed = kCanonicalSeed;
  std::size_t ik_count = 5;
  CLI::App* ik_demo = ik->add_subcommand("demo", "FK -> strip limbs -> re-solve round trip");
  ik_demo->add_option("--seed", ik_seed, "pose seed");
  ik_demo->add_option("--count", ik_count, "poses to solve");
  ik_demo->callback([&]() {
    SkeletonModel model = SkeletonModel::standardMouse();
    IkRoundTrip trip = ikRoundTrip(model, ik_count, ik_seed);
    std::cout << "poses " << trip.poses << "\n"
              << "max bone length error  " << trip.max_bone_length_error_mm << " mm\n"
              << "max hind angle error   " << trip.max_hind_angle_error_rad << " rad\n"
              << "max main joint shift   " << trip.max_main_joint_shift_mm << " mm\n";
    const char* names[] = {"fore-left upper", "fore-left lower",  "fore-right upper",
                           "fore-right lower", "hind-left upper",  "hind-left lower",
                           "hind-right upper", "hind-right lower", "paw fore-left",
                           "paw fore-right",   "paw hind-left",    "paw hind-right"};
    const int joints[] = {kForeLeftUpper, kForeLeftLower, kForeRightUpper, kForeRightLower,
                          kHindLeftUpper, kHindLeftLower, kHindRightUpper, kHindRightLower,
                          kPawForeLeft,   kPawForeRight,  kPawHindLeft,    kPawHindRight};
    for (int i = 0; i < 12; ++i) {
      std::cout << "  " << names[i] << " position error "
                << trip.mean_position_error_mm[static_cast<std::size_t>(joints[i])] << " mm\n";
    }
  });

  // ---- model ----
  CLI::App* model_cmd = app.add_subcommand("model", "forest file utilities");
  model_cmd->require_subcommand(1);

  std::string model_load_path;
  CLI::App* model_load = model_cmd->add_subcommand("load", "validate a model file");
  model_load->add_option("path", model_load_path, "model file")->required();
  model_load->callback([&]() {
    Forest forest = loadForest(model_load_path);
    std::cout << "ok: " << forest.trees.size() << " trees, "
              << (forest.mode == ForestMode::Classification ? "classification" : "regression")
              << "\n";
  });

  std::string model_inspect_path;
  CLI::App* model_inspect = model_cmd->add_subcommand("inspect", "print model statistics");
  model_inspect->add_option("path", model_inspect_path, "model file")->required();
  model_inspect->callback([&]() {
    Forest forest = loadForest(model_inspect_path);
    std::cout << "mode      "
              << (forest.mode == ForestMode::Classification ? "classification" : "regression")
              << "\nfeatures  "
              << (forest.features == FeatureFamily::Axis2D ? "axis2d" : "depth")
              << "\ntrees     " << forest.trees.size() << "\nclasses   " << forest.num_classes
              << "\n";
    for (std::size_t t = 0; t < forest.trees.size(); ++t) {
      const Tree& tree = forest.trees[t];
      std::cout << "tree " << t << ": " << reachableNodeCount(tree) << " nodes, depth "
                << treeDepth(tree, tree.root) << "\n";
    }
  });

  std::string model_save_in, model_save_out;
  CLI::App* model_save = model_cmd->add_subcommand("save", "re-save a model canonically");
  model_save->add_option("input", model_save_in, "model file")->required();
  model_save->add_option("output", model_save_out, "destination")->required();
  model_save->callback([&]() {
    saveForest(loadForest(model_save_in), model_save_out);
    std::cout << "wrote " << model_save_out << "\n";
  });

  CLI11_PARSE(app, argc, argv);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return runCli(argc, argv);
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
