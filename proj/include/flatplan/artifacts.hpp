#pragma once

#include <string>
#include <vector>

#include "flatplan/planner.hpp"
#include "flatplan/sim.hpp"

namespace flatplan {

/// Locale-independent shortest-round-trip formatting (std::to_chars).
std::string format_double(double v);

/// Trajectory CSV at a fixed output step: time, the 12 flat components, the
/// 10 crane states and the 3 inputs per row. Column order is stable.
std::string trajectory_csv(const std::vector<lqmt::SteeringSolution>& edges,
                           const crane::CraneParams& params, double output_step);

/// Run statistics as JSON. With redact_timing the wall-clock fields are
/// zeroed so reruns with the same seed are byte-identical.
std::string stats_json(const PlanResult& result, std::uint64_t seed, int workers,
                       bool redact_timing);

/// Simulation/validation CSV: time, simulated states and inputs, predicted
/// states, per-row state error.
std::string sim_csv(const sim::SimResult& result);

void write_file(const std::string& path, const std::string& content);

}  // namespace flatplan
