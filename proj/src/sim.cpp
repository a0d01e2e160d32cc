#include "flatplan/sim.hpp"

#include <algorithm>
#include <cmath>

#include "flatplan/errors.hpp"

namespace flatplan::sim {

FlatTrajectory::FlatTrajectory(std::vector<lqmt::SteeringSolution> edges)
    : edges_(std::move(edges)) {
  start_times_.reserve(edges_.size());
  for (const auto& e : edges_) {
    start_times_.push_back(duration_);
    duration_ += e.dt_star;
  }
}

crane::FlatSample FlatTrajectory::sample(double t) const {
  if (edges_.empty()) raise(ErrorCode::kNoSolution, "FlatTrajectory: empty edge list");
  t = std::clamp(t, 0.0, duration_);
  // last edge starting at or before t (ties resolve to the later edge)
  std::size_t idx = std::upper_bound(start_times_.begin(), start_times_.end(), t) -
                    start_times_.begin();
  idx = idx == 0 ? 0 : idx - 1;
  const auto& e = edges_[idx];
  const double local = std::clamp(t - start_times_[idx], 0.0, e.dt_star);
  const auto d = e.derivatives_at(local);
  crane::FlatSample fs;
  fs.p = d[0];
  fs.d1 = d[1];
  fs.d2 = d[2];
  fs.d3 = d[3];
  fs.d4 = d[4];
  return fs;
}

SimResult integrate(const crane::CraneState& z0,
                    const std::function<crane::ControlInput(double)>& input_fn,
                    const crane::CraneParams& params, double dt, double T) {
  if (!(dt > 0.0) || T < dt)
    raise(ErrorCode::kNonPositiveStep, "integrate: need dt > 0 and T >= dt");
  const int n = int(std::ceil(T / dt - 1e-12));
  const double h = T / n;

  SimResult result;
  result.t.reserve(n + 1);
  result.states.reserve(n + 1);
  result.inputs.reserve(n + 1);

  crane::Vec10 z = z0.to_vector();
  auto f = [&](const crane::Vec10& zv, double time) {
    return crane::dynamics(crane::CraneState::from_vector(zv), input_fn(time), params);
  };
  for (int i = 0; i <= n; ++i) {
    const double time = i * h;
    result.t.push_back(time);
    result.states.push_back(crane::CraneState::from_vector(z));
    result.inputs.push_back(input_fn(time));
    if (i == n) break;
    const crane::Vec10 k1 = f(z, time);
    const crane::Vec10 k2 = f(z + 0.5 * h * k1, time + 0.5 * h);
    const crane::Vec10 k3 = f(z + 0.5 * h * k2, time + 0.5 * h);
    const crane::Vec10 k4 = f(z + h * k3, time + h);
    z += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return result;
}

SimResult validate_flat_trajectory(const std::vector<lqmt::SteeringSolution>& edges,
                                   const crane::CraneParams& params, double dt) {
  if (edges.empty()) raise(ErrorCode::kNoSolution, "validate: empty trajectory");
  const FlatTrajectory traj(edges);

  SimResult result;
  result.t.push_back(0.0);
  result.states.push_back(crane::flat_to_state(traj.sample(0.0), params));
  result.inputs.push_back(crane::flat_to_input(traj.sample(0.0), params));

  // integrate edge by edge so that steps align with the junctions, where the
  // snap input is discontinuous; straddling a jump would poison the certificate
  double offset = 0.0;
  crane::CraneState z = result.states.front();
  for (const auto& edge : edges) {
    if (edge.dt_star <= 0.0) continue;
    auto input_fn = [&](double local) {
      const auto d = edge.derivatives_at(local);
      crane::FlatSample fs;
      fs.p = d[0];
      fs.d1 = d[1];
      fs.d2 = d[2];
      fs.d3 = d[3];
      fs.d4 = d[4];
      return crane::flat_to_input(fs, params);
    };
    const SimResult leg =
        integrate(z, input_fn, params, std::min(dt, edge.dt_star), edge.dt_star);
    for (std::size_t i = 1; i < leg.t.size(); ++i) {
      result.t.push_back(offset + leg.t[i]);
      result.states.push_back(leg.states[i]);
      result.inputs.push_back(leg.inputs[i]);
    }
    z = leg.states.back();
    offset += edge.dt_star;
  }

  result.predicted.reserve(result.t.size());
  for (std::size_t i = 0; i < result.t.size(); ++i) {
    const auto pred = crane::flat_to_state(traj.sample(result.t[i]), params);
    result.predicted.push_back(pred);
    const double err =
        (result.states[i].to_vector() - pred.to_vector()).cwiseAbs().maxCoeff();
    result.max_state_error = std::max(result.max_state_error, err);
  }
  return result;
}

}  // namespace flatplan::sim
