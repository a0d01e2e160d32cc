#pragma once

#include <numbers>
#include <string>
#include <vector>

#include "flatplan/flat_state.hpp"

namespace flatplan::crane {

using Vec5 = Eigen::Matrix<double, 5, 1>;
using Vec10 = Eigen::Matrix<double, 10, 1>;
using Mat5 = Eigen::Matrix<double, 5, 5>;

struct CraneParams {
  double payload_mass = 1.0;        // kg
  double trolley_mass = 5.0;        // kg
  double bridge_mass = 10.0;        // kg
  double suspension_height = 1.0;   // h0, m
  double gravity = 9.81;            // m/s^2
  double payload_radius = 0.05;     // collision sphere around the CoM, m
};

/// Generalized coordinates q = [s_x, s_y, s_z, alpha, beta] and velocities.
/// s_z is the payload height the hoist would give at zero sway (h0 - l);
/// alpha and beta are the rope angles in the zy- and zx-plane.
struct CraneState {
  Vec5 q = Vec5::Zero();
  Vec5 qdot = Vec5::Zero();

  Vec10 to_vector() const {
    Vec10 z;
    z << q, qdot;
    return z;
  }
  static CraneState from_vector(const Vec10& z) {
    CraneState s;
    s.q = z.head<5>();
    s.qdot = z.tail<5>();
    return s;
  }
};

struct ControlInput {
  Vec3 u = Vec3::Zero();  // driving forces in x, y, z, newtons
};

/// Flat output with its time derivatives up to order 4.
struct FlatSample {
  Vec3 p = Vec3::Zero();
  Vec3 d1 = Vec3::Zero();
  Vec3 d2 = Vec3::Zero();
  Vec3 d3 = Vec3::Zero();
  Vec3 d4 = Vec3::Zero();

  static FlatSample from(const FlatState& s, const Vec3& snap = Vec3::Zero()) {
    FlatSample f;
    f.p = s.position();
    f.d1 = s.velocity();
    f.d2 = s.acceleration();
    f.d3 = s.jerk();
    f.d4 = snap;
    return f;
  }
};

struct FeasibilityBounds {
  Vec10 z_lo, z_hi;
  Vec3 u_lo, u_hi;
  double sway_max = 2.0 * std::numbers::pi / 180.0;  // rad

  /// Laboratory-scale defaults consistent with a ~2.5 m workspace.
  static FeasibilityBounds defaults();
};

struct BoundViolation {
  std::string name;
  double value = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double margin = 0.0;  // distance beyond the violated bound
};

struct BoundsReport {
  bool feasible = true;
  std::vector<BoundViolation> violations;
};

/// Configuration from a flat sample via the thrust vector t = p'' + g e_z.
/// Throws RopeInverted if t_z <= 0 and RopeSlack if the implied rope length
/// is non-positive.
Vec5 flat_to_configuration(const FlatSample& fs, const CraneParams& params);

/// Full kinematic state; velocities by exact chain rule through the
/// configuration map (second-order jets, no finite differences).
CraneState flat_to_state(const FlatSample& fs, const CraneParams& params);

/// Inverse dynamics along the flat trajectory. The two unactuated rows of
/// the Euler-Lagrange vector must vanish; a residual above 1e-6 signals an
/// inconsistent model and throws UnactuatedResidual.
ControlInput flat_to_input(const FlatSample& fs, const CraneParams& params);

/// State-space dynamics zdot = [qdot; M^-1([u;0] - C qdot - g)].
Vec10 dynamics(const CraneState& z, const ControlInput& u, const CraneParams& params);

Mat5 mass_matrix(const Vec5& q, const CraneParams& params);
Mat5 coriolis_matrix(const Vec5& q, const Vec5& qdot, const CraneParams& params);
Vec5 gravity_vector(const Vec5& q, const CraneParams& params);

/// Payload CoM position from generalized coordinates.
Vec3 forward_kinematics(const Vec5& q, const CraneParams& params);

/// Kinetic plus potential energy (conserved for u = 0).
double total_energy(const CraneState& z, const CraneParams& params);

BoundsReport check_bounds(const CraneState& z, const ControlInput& u,
                          const FeasibilityBounds& b);

}  // namespace flatplan::crane
