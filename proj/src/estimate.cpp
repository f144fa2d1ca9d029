#include "mousepose/estimate.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "mousepose/training.hpp"

namespace mousepose {

namespace {

float pixelFeature(const Forest& forest, const DepthImage& image, int px, int py, float depth,
                   const FeatureDescriptor& fd) {
  return depthFeature(image, px, py, depth, fd.offset, forest.depth_features);
}

}  // namespace

JointEstimate estimateJoints(const Forest& forest, const DepthImage& image, const Camera& camera,
                             int query_pixels, std::uint64_t seed) {
  if (forest.mode != ForestMode::Regression) {
    throw std::invalid_argument("estimateJoints: regression forest required");
  }
  std::vector<std::int32_t> foreground;
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      if (image.foreground(x, y)) foreground.push_back(y * image.width + x);
    }
  }
  if (foreground.empty()) throw std::runtime_error("estimateJoints: empty foreground");

  std::vector<std::int32_t> picks;
  if (foreground.size() <= static_cast<std::size_t>(query_pixels)) {
    picks.assign(foreground.begin(), foreground.end());
  } else {
    Rng rng(deriveSeed(seed, "query-pixels"));
    for (std::int32_t i :
         sampleRowSubset(foreground.size(), static_cast<std::size_t>(query_pixels), rng)) {
      picks.push_back(foreground[static_cast<std::size_t>(i)]);
    }
  }

  std::array<Vec3, kTopJointCount> high_sum{}, low_sum{};
  std::array<std::int64_t, kTopJointCount> high_n{}, low_n{};
  for (std::int32_t flat : picks) {
    int px = flat % image.width;
    int py = flat / image.width;
    float depth = image.at(px, py);
    Vec3 world = backproject(camera, px + 0.5, py + 0.5, depth);
    for (const Tree& tree : forest.trees) {
      std::int32_t leaf = route(tree, [&](const FeatureDescriptor& fd) {
        return pixelFeature(forest, image, px, py, depth, fd);
      });
      const LeafModel& model = tree.leafAt(leaf);
      for (int j = 0; j < kTopJointCount; ++j) {
        auto k = static_cast<std::size_t>(j);
        const JointLeaf& jl = model.joints[k];
        if (jl.support <= 0) continue;
        Vec3 candidate = world + toVec3(jl.mean_offset);
        if (jl.low_confidence) {
          low_sum[k] += candidate;
          ++low_n[k];
        } else {
          high_sum[k] += candidate;
          ++high_n[k];
        }
      }
    }
  }

  JointEstimate estimate;
  for (int j = 0; j < kTopJointCount; ++j) {
    auto k = static_cast<std::size_t>(j);
    JointEstimate::Entry& entry = estimate.joints[k];
    if (high_n[k] > 0) {
      entry.position = (1.0 / static_cast<double>(high_n[k])) * high_sum[k];
      entry.low_confidence = false;
      entry.missing = false;
    } else if (low_n[k] > 0) {
      entry.position = (1.0 / static_cast<double>(low_n[k])) * low_sum[k];
      entry.low_confidence = true;
      entry.missing = false;
    }
  }
  return estimate;
}

JointErrorReport jointError(const JointEstimate& estimate, std::span<const Vec3> true_joints) {
  if (true_joints.size() < kTopJointCount) {
    throw std::invalid_argument("jointError: need the 12 main joints");
  }
  JointErrorReport report;
  double sum = 0.0;
  int present = 0;
  for (int j = 0; j < kTopJointCount; ++j) {
    auto k = static_cast<std::size_t>(j);
    if (estimate.joints[k].missing) {
      report.per_joint[k] = std::numeric_limits<double>::quiet_NaN();
      ++report.missing;
      continue;
    }
    double err = distance(estimate.joints[k].position, true_joints[k]);
    report.per_joint[k] = err;
    sum += err;
    ++present;
  }
  report.mean = present > 0 ? sum / present : std::numeric_limits<double>::quiet_NaN();
  return report;
}

LabelImage partLabelImage(const Forest& forest, const DepthImage& image) {
  if (forest.mode != ForestMode::Classification) {
    throw std::invalid_argument("partLabelImage: classification forest required");
  }
  LabelImage out;
  out.width = image.width;
  out.height = image.height;
  out.values.assign(image.values.size(), static_cast<std::uint8_t>(PartClass::Background));
  std::vector<double> histogram(static_cast<std::size_t>(forest.num_classes));
  for (int py = 0; py < image.height; ++py) {
    for (int px = 0; px < image.width; ++px) {
      if (!image.foreground(px, py)) continue;
      float depth = image.at(px, py);
      std::fill(histogram.begin(), histogram.end(), 0.0);
      for (const Tree& tree : forest.trees) {
        std::int32_t leaf = route(tree, [&](const FeatureDescriptor& fd) {
          return pixelFeature(forest, image, px, py, depth, fd);
        });
        const LeafModel& model = tree.leafAt(leaf);
        for (int c = 0; c < forest.num_classes; ++c) {
          histogram[static_cast<std::size_t>(c)] += model.histogram[static_cast<std::size_t>(c)];
        }
      }
      int best = 0;
      for (int c = 1; c < forest.num_classes; ++c) {
        if (histogram[static_cast<std::size_t>(c)] > histogram[static_cast<std::size_t>(best)]) {
          best = c;
        }
      }
      out.at(px, py) = static_cast<std::uint8_t>(best);
    }
  }
  return out;
}

ConfusionMatrix confusionMatrix(const LabelImage& predicted, const LabelImage& truth) {
  if (predicted.width != truth.width || predicted.height != truth.height) {
    throw std::invalid_argument("confusionMatrix: image sizes differ");
  }
  std::array<std::array<std::int64_t, kPartClassCount>, kPartClassCount> counts{};
  for (int y = 0; y < truth.height; ++y) {
    for (int x = 0; x < truth.width; ++x) {
      bool fg_truth = truth.foreground(x, y);
      bool fg_pred = predicted.foreground(x, y);
      if (fg_truth != fg_pred) {
        throw std::invalid_argument("confusionMatrix: foreground masks differ");
      }
      if (!fg_truth) continue;
      counts[truth.at(x, y)][predicted.at(x, y)] += 1;
    }
  }
  ConfusionMatrix m;
  for (int t = 0; t < kPartClassCount; ++t) {
    auto k = static_cast<std::size_t>(t);
    std::int64_t row_total = 0;
    for (std::int64_t c : counts[k]) row_total += c;
    m.support[k] = row_total;
    if (row_total == 0) continue;  // zero-support row stays zero and is flagged by support
    for (int p = 0; p < kPartClassCount; ++p) {
      m.rows[k][static_cast<std::size_t>(p)] =
          static_cast<double>(counts[k][static_cast<std::size_t>(p)]) /
          static_cast<double>(row_total);
    }
  }
  return m;
}

double labelingAccuracy(const LabelImage& predicted, const LabelImage& truth) {
  std::int64_t total = 0, correct = 0;
  for (int y = 0; y < truth.height; ++y) {
    for (int x = 0; x < truth.width; ++x) {
      if (!truth.foreground(x, y)) continue;
      ++total;
      if (predicted.at(x, y) == truth.at(x, y)) ++correct;
    }
  }
  if (total == 0) throw std::invalid_argument("labelingAccuracy: empty foreground");
  return static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace mousepose
