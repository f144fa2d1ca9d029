#include "mousepose/pixel_dataset.hpp"

#include <algorithm>
#include <iostream>
#include <stdexcept>

#include "mousepose/parallel.hpp"
#include "mousepose/training.hpp"

namespace mousepose {

std::shared_ptr<const SceneSet> renderScenes(const SkeletonModel& model,
                                             const PerturbationRanges& ranges,
                                             const Camera& camera, std::size_t count,
                                             double noise_sigma, std::uint64_t seed) {
  PoseLibrary library;
  std::vector<SkeletonPose> poses =
      samplePoses(model, library, ranges, count, deriveSeed(seed, "scene-poses"));
  auto scenes = std::make_shared<SceneSet>(count);
  parallelFor(count, [&](std::size_t i) {
    RenderedScene& scene = (*scenes)[i];
    scene.joints = forwardKinematics(model, poses[i]);
    RenderResult render = renderPose(model, scene.joints, camera);
    scene.labels = std::move(render.labels);
    if (noise_sigma > 0.0) {
      Rng noise(deriveSeed(seed, "scene-noise", i));
      scene.depth = addNoise(render.depth, noise_sigma, noise);
    } else {
      scene.depth = std::move(render.depth);
    }
  });
  return scenes;
}

std::vector<PixelRow> samplePixels(const DepthImage& image, std::int32_t image_index,
                                   int per_image, std::uint64_t seed) {
  if (per_image < 1) throw std::invalid_argument("samplePixels: per_image must be >= 1");
  std::vector<std::int32_t> foreground;
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      if (image.foreground(x, y)) foreground.push_back(y * image.width + x);
    }
  }
  std::vector<PixelRow> rows;
  if (foreground.empty()) return rows;

  Rng rng(deriveSeed(seed, "pixels", static_cast<std::uint64_t>(image_index)));
  std::vector<std::int32_t> picks;
  if (foreground.size() <= static_cast<std::size_t>(per_image)) {
    picks.resize(foreground.size());
    for (std::size_t i = 0; i < picks.size(); ++i) picks[i] = static_cast<std::int32_t>(i);
  } else {
    picks = sampleRowSubset(foreground.size(), static_cast<std::size_t>(per_image), rng);
  }
  rows.reserve(picks.size());
  for (std::int32_t pick : picks) {
    std::int32_t flat = foreground[static_cast<std::size_t>(pick)];
    PixelRow row;
    row.image = image_index;
    row.px = static_cast<std::int16_t>(flat % image.width);
    row.py = static_cast<std::int16_t>(flat / image.width);
    row.depth = image.at(row.px, row.py);
    rows.push_back(row);
  }
  return rows;
}

namespace {

std::vector<PixelRow> sampleAll(const SceneSet& scenes, int per_image, std::uint64_t seed) {
  std::vector<PixelRow> rows;
  int skipped = 0;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    std::vector<PixelRow> image_rows =
        samplePixels(scenes[i].depth, static_cast<std::int32_t>(i), per_image, seed);
    if (image_rows.empty()) {
      ++skipped;
      continue;
    }
    rows.insert(rows.end(), image_rows.begin(), image_rows.end());
  }
  if (skipped > 0) {
    std::cerr << "samplePixels: skipped " << skipped << " image(s) with empty foreground\n";
  }
  return rows;
}

}  // namespace

std::unique_ptr<PixelProblem> PixelProblem::makeClassification(
    std::shared_ptr<const SceneSet> scenes, const Camera&, const DepthFeatureConfig& features,
    int pixels_per_image, std::uint64_t seed) {
  auto problem = std::unique_ptr<PixelProblem>(new PixelProblem());
  problem->scenes_ = std::move(scenes);
  problem->features_ = features;
  problem->mode_ = ForestMode::Classification;
  problem->rows_ = sampleAll(*problem->scenes_, pixels_per_image, seed);
  problem->labels_.reserve(problem->rows_.size());
  for (const PixelRow& row : problem->rows_) {
    std::uint8_t label = (*problem->scenes_)[static_cast<std::size_t>(row.image)].labels.at(
        row.px, row.py);
    if (label >= kPartClassCount) {
      throw std::logic_error("sampled pixel outside the label foreground");
    }
    problem->labels_.push_back(label);
  }
  return problem;
}

std::unique_ptr<PixelProblem> PixelProblem::makeRegression(
    std::shared_ptr<const SceneSet> scenes, const Camera& camera,
    const DepthFeatureConfig& features, const std::array<double, kTopJointCount>& epsilon,
    int pixels_per_image, std::uint64_t seed) {
  auto problem = std::unique_ptr<PixelProblem>(new PixelProblem());
  problem->scenes_ = std::move(scenes);
  problem->features_ = features;
  problem->mode_ = ForestMode::Regression;
  problem->epsilon_ = epsilon;
  problem->rows_ = sampleAll(*problem->scenes_, pixels_per_image, seed);
  problem->offsets_.reserve(problem->rows_.size());
  for (const PixelRow& row : problem->rows_) {
    const RenderedScene& scene = (*problem->scenes_)[static_cast<std::size_t>(row.image)];
    Vec3 world = backproject(camera, row.px + 0.5, row.py + 0.5, row.depth);
    JointOffsets offsets;
    for (int j = 0; j < kTopJointCount; ++j) {
      offsets.offset[static_cast<std::size_t>(j)] = scene.joints[static_cast<std::size_t>(j)] - world;
    }
    offsets.within_radius = withinRadiusMask(offsets.offset, epsilon);
    problem->offsets_.push_back(offsets);
  }
  return problem;
}

std::unique_ptr<TrainingProblem> PixelProblem::clone() const {
  return std::unique_ptr<PixelProblem>(new PixelProblem(*this));
}

void PixelProblem::keepRows(std::span<const std::int32_t> rows) {
  std::vector<PixelRow> new_rows;
  new_rows.reserve(rows.size());
  std::vector<std::uint8_t> new_labels;
  std::vector<JointOffsets> new_offsets;
  for (std::int32_t r : rows) {
    auto i = static_cast<std::size_t>(r);
    new_rows.push_back(rows_[i]);
    if (!labels_.empty()) new_labels.push_back(labels_[i]);
    if (!offsets_.empty()) new_offsets.push_back(offsets_[i]);
  }
  rows_ = std::move(new_rows);
  labels_ = std::move(new_labels);
  offsets_ = std::move(new_offsets);
}

void PixelProblem::swapRows(std::size_t a, std::size_t b) {
  std::swap(rows_[a], rows_[b]);
  if (!labels_.empty()) std::swap(labels_[a], labels_[b]);
  if (!offsets_.empty()) std::swap(offsets_[a], offsets_[b]);
}

void PixelProblem::evalFeature(const FeatureDescriptor& feature, std::size_t begin,
                               std::size_t end, float* out) const {
  const SceneSet& scenes = *scenes_;
  for (std::size_t i = begin; i < end; ++i) {
    const PixelRow& row = rows_[i];
    out[i - begin] = depthFeature(scenes[static_cast<std::size_t>(row.image)].depth, row.px,
                                  row.py, row.depth, feature.offset, features_);
  }
}

void PixelProblem::evalFeatureRows(const FeatureDescriptor& feature,
                                   std::span<const std::int32_t> rows, float* out) const {
  const SceneSet& scenes = *scenes_;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const PixelRow& row = rows_[static_cast<std::size_t>(rows[i])];
    out[i] = depthFeature(scenes[static_cast<std::size_t>(row.image)].depth, row.px, row.py,
                          row.depth, feature.offset, features_);
  }
}

FeatureDescriptor PixelProblem::sampleFeature(int, Rng& rng) const {
  FeatureDescriptor fd;
  fd.family = FeatureFamily::DepthOffset;
  double r = features_.max_offset_radius;
  fd.offset = Vec2{rng.uniform(-r, r), rng.uniform(-r, r)};
  return fd;
}

void PixelProblem::sampleThresholds(const FeatureDescriptor&, std::span<const float> values,
                                    int count, Rng& rng, std::vector<double>& out) const {
  float lo = values.front(), hi = values.front();
  for (float v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  out.clear();
  for (int i = 0; i < count; ++i) out.push_back(rng.uniform(lo, hi));
}

}  // namespace mousepose
