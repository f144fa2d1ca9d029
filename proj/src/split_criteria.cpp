#include "mousepose/split_criteria.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace mousepose {

std::uint16_t withinRadiusMask(const std::array<Vec3, kTopJointCount>& offsets,
                               const std::array<double, kTopJointCount>& epsilon) {
  std::uint16_t mask = 0;
  for (int j = 0; j < kTopJointCount; ++j) {
    double sq = squaredNorm(offsets[static_cast<std::size_t>(j)]);
    double eps = epsilon[static_cast<std::size_t>(j)];
    if (sq < eps * eps) mask |= static_cast<std::uint16_t>(1u << j);
  }
  return mask;
}

double entropyOfCounts(std::span<const std::int64_t> counts, std::int64_t total) {
  double e = 0.0;
  double inv = 1.0 / static_cast<double>(total);
  for (std::int64_t c : counts) {
    if (c > 0) {
      double p = static_cast<double>(c) * inv;
      e -= p * std::log(p);
    }
  }
  return e;
}

double entropy(std::span<const std::uint8_t> labels, int num_classes) {
  if (labels.empty()) throw std::invalid_argument("entropy of an empty set is undefined");
  std::vector<std::int64_t> counts(static_cast<std::size_t>(num_classes), 0);
  for (std::uint8_t l : labels) ++counts[l];
  return entropyOfCounts(counts, static_cast<std::int64_t>(labels.size()));
}

double compactness(std::span<const JointOffsets> examples) {
  std::array<Vec3, kTopJointCount> sum{};
  std::array<std::int64_t, kTopJointCount> count{};
  for (const JointOffsets& e : examples) {
    for (int j = 0; j < kTopJointCount; ++j) {
      if (e.near(j)) {
        sum[static_cast<std::size_t>(j)] += e.offset[static_cast<std::size_t>(j)];
        ++count[static_cast<std::size_t>(j)];
      }
    }
  }
  std::array<Vec3, kTopJointCount> mean{};
  for (int j = 0; j < kTopJointCount; ++j) {
    auto k = static_cast<std::size_t>(j);
    if (count[k] > 0) mean[k] = (1.0 / static_cast<double>(count[k])) * sum[k];
  }
  double total = 0.0;
  for (const JointOffsets& e : examples) {
    for (int j = 0; j < kTopJointCount; ++j) {
      auto k = static_cast<std::size_t>(j);
      if (e.near(j)) total += distance(e.offset[k], mean[k]);
    }
  }
  return total;
}

double partitionGain(double parent, double left, double right, std::size_t n_left,
                     std::size_t n_right) {
  if (n_left == 0 || n_right == 0) return 0.0;
  double n = static_cast<double>(n_left + n_right);
  return parent - (static_cast<double>(n_left) / n) * left -
         (static_cast<double>(n_right) / n) * right;
}

}  // namespace mousepose
