#pragma once

#include <algorithm>
#include <cmath>

namespace finsler_hj {

// Plain 2-vector. Used for points, velocities and gradients alike.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2& operator-=(const Vec2& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr Vec2& operator*=(double s) {
    x *= s;
    y *= s;
    return *this;
  }
  friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
constexpr Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }
constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
constexpr Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }

constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }

// 2x2 matrix, row-major. Most uses are symmetric.
struct Mat2 {
  double xx = 0.0;
  double xy = 0.0;
  double yx = 0.0;
  double yy = 0.0;

  static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static constexpr Mat2 diagonal(double a, double b) { return {a, 0.0, 0.0, b}; }

  constexpr Mat2& operator+=(const Mat2& o) {
    xx += o.xx;
    xy += o.xy;
    yx += o.yx;
    yy += o.yy;
    return *this;
  }
  constexpr Mat2& operator*=(double s) {
    xx *= s;
    xy *= s;
    yx *= s;
    yy *= s;
    return *this;
  }
  friend constexpr bool operator==(const Mat2&, const Mat2&) = default;
};

constexpr Mat2 operator+(Mat2 a, const Mat2& b) { return a += b; }
constexpr Mat2 operator-(const Mat2& a, const Mat2& b) {
  return {a.xx - b.xx, a.xy - b.xy, a.yx - b.yx, a.yy - b.yy};
}
constexpr Mat2 operator*(double s, Mat2 a) { return a *= s; }
constexpr Mat2 operator*(Mat2 a, double s) { return a *= s; }
constexpr Vec2 operator*(const Mat2& m, const Vec2& v) {
  return {m.xx * v.x + m.xy * v.y, m.yx * v.x + m.yy * v.y};
}

constexpr Mat2 outer(const Vec2& a, const Vec2& b) {
  return {a.x * b.x, a.x * b.y, a.y * b.x, a.y * b.y};
}
constexpr double det(const Mat2& m) { return m.xx * m.yy - m.xy * m.yx; }
constexpr double trace(const Mat2& m) { return m.xx + m.yy; }
constexpr Mat2 inverse(const Mat2& m) {
  const double d = det(m);
  return {m.yy / d, -m.xy / d, -m.yx / d, m.xx / d};
}
constexpr double quadratic_form(const Mat2& m, const Vec2& v) { return dot(v, m * v); }

// Eigenvalues of the symmetric part, ascending.
inline std::pair<double, double> symmetric_eigenvalues(const Mat2& m) {
  const double a = m.xx;
  const double d = m.yy;
  const double b = 0.5 * (m.xy + m.yx);
  const double mean = 0.5 * (a + d);
  const double rad = std::hypot(0.5 * (a - d), b);
  return {mean - rad, mean + rad};
}

// Symmetric part with negative eigenvalues clipped to zero.
inline Mat2 clip_to_psd(const Mat2& m) {
  const double a = m.xx;
  const double d = m.yy;
  const double b = 0.5 * (m.xy + m.yx);
  const auto [lo, hi] = symmetric_eigenvalues(m);
  if (lo >= 0.0) return {a, b, b, d};
  if (hi <= 0.0) return {};
  // Rank one: keep the eigenvector of `hi`.
  Vec2 v = std::abs(b) > 1e-300 ? Vec2{hi - d, b} : (a >= d ? Vec2{1.0, 0.0} : Vec2{0.0, 1.0});
  const double n = norm(v);
  v = v / n;
  return hi * outer(v, v);
}

}  // namespace finsler_hj
