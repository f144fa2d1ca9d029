#pragma once

#include <array>
#include <cmath>

namespace mousepose {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
};

inline Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
inline Vec3 operator-(Vec3 a) { return {-a.x, -a.y, -a.z}; }

inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(Vec3 a, Vec3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double squaredNorm(Vec3 a) { return dot(a, a); }
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }
inline Vec3 normalized(Vec3 a) {
  double n = norm(a);
  return n > 0.0 ? (1.0 / n) * a : Vec3{};
}
inline double distance(Vec3 a, Vec3 b) { return norm(a - b); }

// Single-precision 3-vector for bulk storage (per-pixel offsets).
struct Vec3f {
  float x = 0.0f;
  float y = 0.0f;
  float z = 0.0f;
};

inline Vec3 toVec3(Vec3f v) { return {v.x, v.y, v.z}; }
inline Vec3f toVec3f(Vec3 v) {
  return {static_cast<float>(v.x), static_cast<float>(v.y), static_cast<float>(v.z)};
}

// Column-major 3x3 matrix; columns are the images of the basis vectors.
struct Mat3 {
  std::array<Vec3, 3> col{Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};

  static Mat3 identity() { return Mat3{}; }

  static Mat3 fromColumns(Vec3 c0, Vec3 c1, Vec3 c2) { return Mat3{{c0, c1, c2}}; }

  static Mat3 rotationX(double a) {
    double c = std::cos(a), s = std::sin(a);
    return fromColumns({1, 0, 0}, {0, c, s}, {0, -s, c});
  }
  static Mat3 rotationY(double a) {
    double c = std::cos(a), s = std::sin(a);
    return fromColumns({c, 0, -s}, {0, 1, 0}, {s, 0, c});
  }
  static Mat3 rotationZ(double a) {
    double c = std::cos(a), s = std::sin(a);
    return fromColumns({c, s, 0}, {-s, c, 0}, {0, 0, 1});
  }
};

inline Vec3 operator*(const Mat3& m, Vec3 v) {
  return v.x * m.col[0] + v.y * m.col[1] + v.z * m.col[2];
}

inline Mat3 operator*(const Mat3& a, const Mat3& b) {
  return Mat3::fromColumns(a * b.col[0], a * b.col[1], a * b.col[2]);
}

inline Mat3 transpose(const Mat3& m) {
  return Mat3::fromColumns({m.col[0].x, m.col[1].x, m.col[2].x},
                           {m.col[0].y, m.col[1].y, m.col[2].y},
                           {m.col[0].z, m.col[1].z, m.col[2].z});
}

// Intrinsic rotation Rz(yaw) * Ry(pitch) * Rx(roll).
inline Mat3 rotationZYX(double roll, double pitch, double yaw) {
  return Mat3::rotationZ(yaw) * Mat3::rotationY(pitch) * Mat3::rotationX(roll);
}

// Largest eigenvalue of a symmetric 3x3 matrix, by the trigonometric
// closed form (Smith, Comm. ACM 1961). Input given as unique entries.
double largestEigenvalueSym3(double a00, double a11, double a22, double a01, double a02,
                             double a12);

}  // namespace mousepose
