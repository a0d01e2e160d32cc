#pragma once

#include <Eigen/Dense>
#include <cstring>

namespace flatplan {

using Vec3 = Eigen::Vector3d;
using Vec12 = Eigen::Matrix<double, 12, 1>;
using Mat12 = Eigen::Matrix<double, 12, 12>;

/// State of the flat (quadruple-integrator) model, stored as one 12-vector
/// ordered [p, v, a, j]. Entry 3*k + axis holds the k-th time derivative of
/// the payload position on that axis, matching the integrator-chain block
/// structure of the linear model.
struct FlatState {
  Vec12 x = Vec12::Zero();

  FlatState() = default;
  explicit FlatState(const Vec12& v) : x(v) {}

  Eigen::Ref<const Vec3> position() const { return x.segment<3>(0); }
  Eigen::Ref<const Vec3> velocity() const { return x.segment<3>(3); }
  Eigen::Ref<const Vec3> acceleration() const { return x.segment<3>(6); }
  Eigen::Ref<const Vec3> jerk() const { return x.segment<3>(9); }

  Eigen::Ref<Vec3> position() { return x.segment<3>(0); }
  Eigen::Ref<Vec3> velocity() { return x.segment<3>(3); }
  Eigen::Ref<Vec3> acceleration() { return x.segment<3>(6); }
  Eigen::Ref<Vec3> jerk() { return x.segment<3>(9); }

  bool finite() const { return x.allFinite(); }

  /// Rest state: position p, all derivatives zero.
  static FlatState rest(const Vec3& p) {
    FlatState s;
    s.position() = p;
    return s;
  }
};

/// Coincident-state test used for degenerate steering edges. This is exact
/// bitwise equality so that c(dt) = dt cannot pick up a spurious dt_min cost.
inline bool bitwise_equal(const FlatState& a, const FlatState& b) {
  return std::memcmp(a.x.data(), b.x.data(), sizeof(double) * 12) == 0;
}

/// Per-axis input weight (diagonal of R in the quadratic input penalty).
struct SteeringWeights {
  Vec3 r = Vec3::Constant(0.1);

  bool valid() const { return (r.array() > 0.0).all(); }
};

/// Search bracket for the arrival-time optimization. Below ~1e-3 s the
/// Gramian is numerically singular at this model's scale.
struct SteeringBounds {
  double dt_min = 1e-3;
  double dt_max = 60.0;

  bool valid() const { return dt_min > 0.0 && dt_min < dt_max; }
};

}  // namespace flatplan
