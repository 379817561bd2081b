#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace noslip {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Thrown when a solver or event search cannot produce a trustworthy result.
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Planar vectors. Lab frame: x horizontal, y vertical.

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
};

constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }
constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
// 2D scalar cross product; positive when b is counterclockwise of a.
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
constexpr double norm2(Vec2 v) { return dot(v, v); }

inline Vec2 normalized(Vec2 v) {
  const double n = norm(v);
  if (n <= 0.0) throw std::invalid_argument("normalized: zero vector");
  return v / n;
}

// Rotations by a quarter turn; ccw sends (1,0) to (0,1).
constexpr Vec2 perp_ccw(Vec2 v) { return {-v.y, v.x}; }
constexpr Vec2 perp_cw(Vec2 v) { return {v.y, -v.x}; }

inline Vec2 rotate(Vec2 v, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

// ---------------------------------------------------------------------------
// 3x3 matrices acting on (rotational, tangential, normal) velocity triples.

struct Vec3 {
  double rot = 0.0;
  double tan = 0.0;
  double nrm = 0.0;
};

inline double norm(const Vec3& v) {
  return std::sqrt(v.rot * v.rot + v.tan * v.tan + v.nrm * v.nrm);
}

struct Mat3 {
  double m[3][3] = {};

  static constexpr Mat3 identity() {
    Mat3 r;
    r.m[0][0] = r.m[1][1] = r.m[2][2] = 1.0;
    return r;
  }

  Vec3 apply(const Vec3& v) const {
    return {m[0][0] * v.rot + m[0][1] * v.tan + m[0][2] * v.nrm,
            m[1][0] * v.rot + m[1][1] * v.tan + m[1][2] * v.nrm,
            m[2][0] * v.rot + m[2][1] * v.tan + m[2][2] * v.nrm};
  }

  Mat3 operator*(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) r.m[i][j] += m[i][k] * o.m[k][j];
    return r;
  }
};

} // namespace noslip
