// Minimal forward-mode scalars for exact derivative propagation. Jet2 carries
// a value with its first and second time derivative; Grad3 carries a value
// with partials w.r.t. three chosen coordinates. Production code uses these
// instead of finite differences.
#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace flatplan::detail {

struct Jet2 {
  double f = 0.0;   // value
  double d = 0.0;   // first time derivative
  double dd = 0.0;  // second time derivative

  Jet2() = default;
  Jet2(double v) : f(v) {}
  Jet2(double v, double v1, double v2) : f(v), d(v1), dd(v2) {}
};

inline Jet2 operator+(const Jet2& a, const Jet2& b) { return {a.f + b.f, a.d + b.d, a.dd + b.dd}; }
inline Jet2 operator-(const Jet2& a, const Jet2& b) { return {a.f - b.f, a.d - b.d, a.dd - b.dd}; }
inline Jet2 operator-(const Jet2& a) { return {-a.f, -a.d, -a.dd}; }
inline Jet2 operator*(const Jet2& a, const Jet2& b) {
  return {a.f * b.f, a.f * b.d + a.d * b.f, a.f * b.dd + 2.0 * a.d * b.d + a.dd * b.f};
}
inline Jet2 operator/(const Jet2& a, const Jet2& b) {
  const double inv = 1.0 / b.f;
  const double q = a.f * inv;
  const double qd = (a.d - q * b.d) * inv;
  const double qdd = (a.dd - 2.0 * qd * b.d - q * b.dd) * inv;
  return {q, qd, qdd};
}
inline Jet2 sqrt(const Jet2& a) {
  const double s = std::sqrt(a.f);
  const double sd = 0.5 * a.d / s;
  return {s, sd, (0.5 * a.dd - sd * sd) / s};
}
inline Jet2 atan2(const Jet2& y, const Jet2& x) {
  const double m = x.f * x.f + y.f * y.f;
  const double n = x.f * y.d - y.f * x.d;
  const double nd = x.f * y.dd - y.f * x.dd;
  const double md = 2.0 * (x.f * x.d + y.f * y.d);
  const double td = n / m;
  return {std::atan2(y.f, x.f), td, (nd - td * md) / m};
}

struct Grad3 {
  double f = 0.0;
  Eigen::Vector3d g = Eigen::Vector3d::Zero();

  Grad3() = default;
  Grad3(double v) : f(v) {}
  Grad3(double v, const Eigen::Vector3d& grad) : f(v), g(grad) {}
  static Grad3 seed(double v, int slot) {
    Grad3 out(v);
    out.g[slot] = 1.0;
    return out;
  }
};

inline Grad3 operator+(const Grad3& a, const Grad3& b) { return {a.f + b.f, a.g + b.g}; }
inline Grad3 operator-(const Grad3& a, const Grad3& b) { return {a.f - b.f, a.g - b.g}; }
inline Grad3 operator-(const Grad3& a) { return {-a.f, -a.g}; }
inline Grad3 operator*(const Grad3& a, const Grad3& b) {
  return {a.f * b.f, a.f * b.g + b.f * a.g};
}
inline Grad3 sin(const Grad3& a) { return {std::sin(a.f), std::cos(a.f) * a.g}; }
inline Grad3 cos(const Grad3& a) { return {std::cos(a.f), -std::sin(a.f) * a.g}; }

}  // namespace flatplan::detail
