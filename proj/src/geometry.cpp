#include "mousepose/geometry.hpp"

#include <algorithm>

namespace mousepose {

double largestEigenvalueSym3(double a00, double a11, double a22, double a01, double a02,
                             double a12) {
  double p1 = a01 * a01 + a02 * a02 + a12 * a12;
  if (p1 == 0.0) {
    return std::max({a00, a11, a22});  // already diagonal
  }
  double q = (a00 + a11 + a22) / 3.0;
  double b00 = a00 - q, b11 = a11 - q, b22 = a22 - q;
  double p2 = b00 * b00 + b11 * b11 + b22 * b22 + 2.0 * p1;
  double p = std::sqrt(p2 / 6.0);
  // r = det(B / p) / 2, clamped into [-1, 1] against rounding.
  double inv = 1.0 / p;
  double c00 = b00 * inv, c11 = b11 * inv, c22 = b22 * inv;
  double c01 = a01 * inv, c02 = a02 * inv, c12 = a12 * inv;
  double det = c00 * (c11 * c22 - c12 * c12) - c01 * (c01 * c22 - c12 * c02) +
               c02 * (c01 * c12 - c11 * c02);
  double r = std::clamp(det / 2.0, -1.0, 1.0);
  double phi = std::acos(r) / 3.0;
  return q + 2.0 * p * std::cos(phi);
}

}  // namespace mousepose
