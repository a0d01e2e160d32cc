#include "flatplan/artifacts.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <json.hpp>

#include "flatplan/errors.hpp"

namespace flatplan {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string trajectory_csv(const std::vector<lqmt::SteeringSolution>& edges,
                           const crane::CraneParams& params, double output_step) {
  if (!(output_step > 0.0)) raise(ErrorCode::kNonPositiveStep, "trajectory_csv: bad step");
  const sim::FlatTrajectory traj(edges);

  std::string out =
      "t,p_x,p_y,p_z,v_x,v_y,v_z,a_x,a_y,a_z,j_x,j_y,j_z,"
      "s_x,s_y,s_z,alpha,beta,ds_x,ds_y,ds_z,dalpha,dbeta,u1,u2,u3\n";
  const double duration = traj.duration();
  const int n = std::max(0, int(std::ceil(duration / output_step - 1e-9)));
  for (int i = 0; i <= n; ++i) {
    const double t = std::min(i * output_step, duration);
    const auto fs = traj.sample(t);
    const auto z = crane::flat_to_state(fs, params);
    const auto u = crane::flat_to_input(fs, params);
    out += format_double(t);
    const Vec3 flat[4] = {fs.p, fs.d1, fs.d2, fs.d3};
    for (const auto& block : flat)
      for (int k = 0; k < 3; ++k) out += "," + format_double(block[k]);
    for (int k = 0; k < 5; ++k) out += "," + format_double(z.q[k]);
    for (int k = 0; k < 5; ++k) out += "," + format_double(z.qdot[k]);
    for (int k = 0; k < 3; ++k) out += "," + format_double(u.u[k]);
    out += "\n";
  }
  return out;
}

std::string stats_json(const PlanResult& result, std::uint64_t seed, int workers,
                       bool redact_timing) {
  nlohmann::ordered_json j;
  j["status"] = result.status == PlanStatus::kSuccess ? "success" : "no_solution";
  j["j_star"] = std::isfinite(result.total_cost) ? nlohmann::ordered_json(result.total_cost)
                                                 : nlohmann::ordered_json(nullptr);
  j["t_star_s"] = result.travel_time;
  j["tree_size"] = result.tree.alive_count();
  j["iterations"] = result.stats.iterations;
  j["samples_drawn"] = result.stats.samples_drawn;
  j["samples_rejected"] = result.stats.samples_rejected;
  j["inserts"] = result.stats.inserts;
  j["rewires"] = result.stats.rewires;
  j["pruned_nodes"] = result.stats.pruned_nodes;
  j["audit_failures"] = result.stats.audit_failures;
  j["seed"] = seed;
  j["workers"] = workers;
  j["wall_time_s"] = redact_timing ? 0.0 : result.stats.wall_time_s;
  j["first_solution_wall_s"] = redact_timing ? 0.0 : result.stats.first_solution_wall_s;
  j["replan_used_sampling"] = result.stats.replan_used_sampling;
  j["j_star_history"] = nlohmann::ordered_json::array();
  for (const auto& h : result.stats.history)
    j["j_star_history"].push_back({{"iteration", h.iteration},
                                   {"wall_s", redact_timing ? 0.0 : h.wall_s},
                                   {"j_star", h.j_star}});
  return j.dump(2) + "\n";
}

std::string sim_csv(const sim::SimResult& result) {
  std::string out = "t";
  const char* kState[10] = {"s_x", "s_y", "s_z", "alpha", "beta",
                            "ds_x", "ds_y", "ds_z", "dalpha", "dbeta"};
  for (const auto* name : kState) out += std::string(",") + name;
  out += ",u1,u2,u3";
  for (const auto* name : kState) out += std::string(",pred_") + name;
  out += ",state_error\n";
  for (std::size_t i = 0; i < result.t.size(); ++i) {
    out += format_double(result.t[i]);
    const auto z = result.states[i].to_vector();
    for (int k = 0; k < 10; ++k) out += "," + format_double(z[k]);
    for (int k = 0; k < 3; ++k) out += "," + format_double(result.inputs[i].u[k]);
    const auto p = result.predicted.empty() ? z : result.predicted[i].to_vector();
    for (int k = 0; k < 10; ++k) out += "," + format_double(p[k]);
    out += "," + format_double((z - p).cwiseAbs().maxCoeff());
    out += "\n";
  }
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCode::kParseError, "cannot write " + path);
  out << content;
}

}  // namespace flatplan
