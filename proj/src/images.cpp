#include "mousepose/images.hpp"

#include <algorithm>
#include <stdexcept>

namespace mousepose {

DepthImage addNoise(const DepthImage& image, double sigma, Rng& rng) {
  if (sigma < 0.0) throw std::invalid_argument("addNoise: sigma must be >= 0");
  DepthImage out = image;
  if (sigma == 0.0) return out;
  float ceiling = image.background_mm - 0.5f;
  for (float& v : out.values) {
    if (v < image.background_mm) {
      v = std::clamp(static_cast<float>(v + rng.normal(0.0, sigma)), 1.0f, ceiling);
    }
  }
  return out;
}

}  // namespace mousepose
