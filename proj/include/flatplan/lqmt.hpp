#pragma once

#include <array>
#include <vector>

#include "flatplan/flat_state.hpp"

namespace flatplan::lqmt {

inline constexpr int kDefaultScanSamples = 512;

/// One sample along a solved steering edge.
struct EdgeSample {
  double t = 0.0;
  FlatState state;
  Vec3 snap = Vec3::Zero();  // u_l = p^(4)
};

/// Solution of one linear-quadratic-minimum-time edge between two flat
/// states. The trajectory is a degree-7 polynomial per axis in the local
/// time s = t - t0 with s in [0, dt_star]; states and inputs are evaluated
/// from it in closed form.
struct SteeringSolution {
  double dt_star = 0.0;   // optimal transit time
  double cost = 0.0;      // dt_star + quadratic input penalty
  Vec12 d_vec = Vec12::Zero();       // boundary mismatch d = x1 - exp(A dt) x0
  Vec12 costate_t1 = Vec12::Zero();  // lambda*(t1) = -G^{-1} d
  FlatState x0, x1;

  // chain coefficients per axis: [p0, v0, a0, j0, u0, u1, u2, u3] where
  // u(s) = u0 + u1 s + u2 s^2 + u3 s^3 is the snap input and the state
  // follows by integrating the chain from the initial values
  std::array<std::array<double, 8>, 3> coef{};

  FlatState state_at(double t) const;
  Vec3 input_at(double t) const;
  /// Position and time derivatives 1..4 at t (what the flatness layer needs).
  std::array<Vec3, 5> derivatives_at(double t) const;
};

/// exp(A dt) of the 12-dim integrator chain in closed form (A is nilpotent
/// of index 4, so the series terminates at dt^3/3!).
Mat12 state_transition(double dt);

/// Continuous reachability Gramian G(t0, t1) with t1 - t0 = dt. Axis blocks
/// decouple for diagonal R; each entry is a monomial in dt.
Mat12 gramian(double dt, const SteeringWeights& w);

/// Edge cost at a fixed transit time: c = dt + 1/2 d^T G^{-1}(dt) d. The
/// linear solve goes through a symmetric factorization of the diagonally
/// equilibrated Gramian block; no explicit inverse is formed.
double cost_at(const FlatState& x0, const FlatState& x1, double dt,
               const SteeringWeights& w);

/// Global minimizer of cost_at over [dt_min, dt_max]: coarse logarithmic
/// grid scan, then safeguarded bisection/Newton polishing of the centered
/// finite-difference derivative of c.
double optimal_arrival_time(const FlatState& x0, const FlatState& x1,
                            const SteeringWeights& w, const SteeringBounds& b,
                            int scan_samples = kDefaultScanSamples);

/// Full edge solve. Bitwise-coincident states return the degenerate
/// zero-cost, zero-duration edge.
SteeringSolution steer(const FlatState& x0, const FlatState& x1,
                       const SteeringWeights& w, const SteeringBounds& b,
                       int scan_samples = kDefaultScanSamples);

/// Samples at t0, t0+step, ..., t1 (t1 always included, no duplicates).
std::vector<EdgeSample> sample_edge(const SteeringSolution& sol, double step);

}  // namespace flatplan::lqmt
