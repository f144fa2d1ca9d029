#pragma once

#include <cstdint>
#include <span>

#include "mousepose/forest.hpp"

namespace mousepose {

// Per-example regression target: ground-truth offsets from the pixel's
// back-projected 3D position to each top-view joint, plus a bitmask of
// the joints whose offset lies within the proximity radius epsilon_j.
struct JointOffsets {
  std::array<Vec3, kTopJointCount> offset{};
  std::uint16_t within_radius = 0;

  bool near(int joint) const { return (within_radius >> joint) & 1u; }
};

std::uint16_t withinRadiusMask(const std::array<Vec3, kTopJointCount>& offsets,
                               const std::array<double, kTopJointCount>& epsilon);

// Shannon entropy of a label multiset, natural log. Throws std::invalid_argument
// on an empty set.
double entropy(std::span<const std::uint8_t> labels, int num_classes);

// Entropy from precomputed class counts; total must be > 0.
double entropyOfCounts(std::span<const std::int64_t> counts, std::int64_t total);

// Compactness of a set of pixel examples (the regression impurity):
// sum over joints of within-radius offset deviations from the per-joint
// mean offset. Zero iff every within-radius group is one repeated vector.
double compactness(std::span<const JointOffsets> examples);

// Information gain of a proposed partition, shared by both modes:
// E(S) - |Sl|/|S| E(Sl) - |Sr|/|S| E(Sr). A degenerate partition (either
// side empty) scores exactly 0 so it is never preferred over any
// informative split.
double partitionGain(double parent, double left, double right, std::size_t n_left,
                     std::size_t n_right);

}  // namespace mousepose
