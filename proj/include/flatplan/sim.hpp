#pragma once

#include <functional>
#include <vector>

#include "flatplan/crane.hpp"
#include "flatplan/lqmt.hpp"

namespace flatplan::sim {

struct SimResult {
  std::vector<double> t;
  std::vector<crane::CraneState> states;
  std::vector<crane::ControlInput> inputs;
  std::vector<crane::CraneState> predicted;  // flatness-predicted states (validate only)
  double max_state_error = 0.0;
};

/// Piecewise evaluator over a chain of steering edges on a global timeline.
class FlatTrajectory {
 public:
  explicit FlatTrajectory(std::vector<lqmt::SteeringSolution> edges);

  double duration() const { return duration_; }
  crane::FlatSample sample(double t) const;

 private:
  std::vector<lqmt::SteeringSolution> edges_;
  std::vector<double> start_times_;
  double duration_ = 0.0;
};

/// Classical fixed-step RK4; inputs are evaluated at the stage times. The
/// step is T/ceil(T/dt) so the grid is uniform.
SimResult integrate(const crane::CraneState& z0,
                    const std::function<crane::ControlInput(double)>& input_fn,
                    const crane::CraneParams& params, double dt, double T);

/// Open-loop consistency certificate: feedforward from the flat map, forward
/// simulation of the nonlinear dynamics, max deviation from the
/// flatness-predicted states. Integration steps align with edge junctions,
/// where the snap input jumps.
SimResult validate_flat_trajectory(const std::vector<lqmt::SteeringSolution>& edges,
                                   const crane::CraneParams& params, double dt);

}  // namespace flatplan::sim
