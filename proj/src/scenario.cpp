#include "flatplan/scenario.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "flatplan/errors.hpp"

namespace flatplan {

namespace {

using json = nlohmann::ordered_json;

template <int N>
Eigen::Matrix<double, N, 1> parse_vec(const json& j, const std::string& key) {
  if (!j.contains(key) || !j[key].is_array() || j[key].size() != N)
    raise(ErrorCode::kParseError, "scenario: expected array '" + key + "' of size " + std::to_string(N));
  Eigen::Matrix<double, N, 1> v;
  for (int i = 0; i < N; ++i) {
    if (!j[key][i].is_number()) raise(ErrorCode::kParseError, "scenario: non-numeric entry in '" + key + "'");
    v[i] = j[key][i].get<double>();
  }
  return v;
}

template <int N>
json dump_vec(const Eigen::Matrix<double, N, 1>& v) {
  json arr = json::array();
  for (int i = 0; i < N; ++i) arr.push_back(v[i]);
  return arr;
}

FlatState parse_endpoint(const json& j, const std::string& key) {
  if (!j.contains(key)) raise(ErrorCode::kParseError, "scenario: missing '" + key + "'");
  const json& e = j[key];
  FlatState s;
  s.position() = parse_vec<3>(e, "position_m");
  if (e.contains("velocity_mps")) s.velocity() = parse_vec<3>(e, "velocity_mps");
  if (e.contains("acceleration_mps2")) s.acceleration() = parse_vec<3>(e, "acceleration_mps2");
  if (e.contains("jerk_mps3")) s.jerk() = parse_vec<3>(e, "jerk_mps3");
  return s;
}

json dump_endpoint(const FlatState& s) {
  json e;
  e["position_m"] = dump_vec<3>(s.position());
  e["velocity_mps"] = dump_vec<3>(s.velocity());
  e["acceleration_mps2"] = dump_vec<3>(s.acceleration());
  e["jerk_mps3"] = dump_vec<3>(s.jerk());
  return e;
}

double parse_number(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) raise(ErrorCode::kParseError, "scenario: '" + key + "' must be a number");
  return j[key].get<double>();
}

}  // namespace

Scenario Scenario::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    raise(ErrorCode::kParseError, std::string("scenario: invalid JSON: ") + e.what());
  }

  Scenario s;
  if (!j.contains("workspace")) raise(ErrorCode::kParseError, "scenario: missing 'workspace'");
  s.workspace.lo = parse_vec<3>(j["workspace"], "lo_m");
  s.workspace.hi = parse_vec<3>(j["workspace"], "hi_m");

  if (j.contains("obstacles")) {
    if (!j["obstacles"].is_array()) raise(ErrorCode::kParseError, "scenario: 'obstacles' must be an array");
    for (const auto& o : j["obstacles"]) {
      world::Aabb box;
      box.origin = parse_vec<3>(o, "origin_m");
      box.size = parse_vec<3>(o, "size_m");
      s.obstacles.push_back(box);
    }
  }

  s.start = parse_endpoint(j, "start");
  s.target = parse_endpoint(j, "target");

  if (j.contains("crane")) {
    const json& c = j["crane"];
    s.crane_params.payload_mass = parse_number(c, "payload_mass_kg", s.crane_params.payload_mass);
    s.crane_params.trolley_mass = parse_number(c, "trolley_mass_kg", s.crane_params.trolley_mass);
    s.crane_params.bridge_mass = parse_number(c, "bridge_mass_kg", s.crane_params.bridge_mass);
    s.crane_params.suspension_height =
        parse_number(c, "suspension_height_m", s.crane_params.suspension_height);
    s.crane_params.gravity = parse_number(c, "gravity_mps2", s.crane_params.gravity);
    s.crane_params.payload_radius =
        parse_number(c, "payload_radius_m", s.crane_params.payload_radius);
  }

  if (j.contains("bounds")) {
    const json& b = j["bounds"];
    if (b.contains("state_lo")) s.bounds.z_lo = parse_vec<10>(b, "state_lo");
    if (b.contains("state_hi")) s.bounds.z_hi = parse_vec<10>(b, "state_hi");
    if (b.contains("input_lo_n")) s.bounds.u_lo = parse_vec<3>(b, "input_lo_n");
    if (b.contains("input_hi_n")) s.bounds.u_hi = parse_vec<3>(b, "input_hi_n");
    s.bounds.sway_max = parse_number(b, "sway_max_rad", s.bounds.sway_max);
  }

  s.voxel_resolution = parse_number(j, "voxel_resolution_m", s.voxel_resolution);
  s.margin = parse_number(j, "collision_margin_m", s.margin);
  s.validate();
  return s;
}

Scenario Scenario::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::kParseError, "scenario: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

std::string Scenario::to_json() const {
  json j;
  j["workspace"]["lo_m"] = dump_vec<3>(workspace.lo);
  j["workspace"]["hi_m"] = dump_vec<3>(workspace.hi);
  j["obstacles"] = json::array();
  for (const auto& box : obstacles) {
    json o;
    o["origin_m"] = dump_vec<3>(box.origin);
    o["size_m"] = dump_vec<3>(box.size);
    j["obstacles"].push_back(o);
  }
  j["start"] = dump_endpoint(start);
  j["target"] = dump_endpoint(target);
  j["crane"]["payload_mass_kg"] = crane_params.payload_mass;
  j["crane"]["trolley_mass_kg"] = crane_params.trolley_mass;
  j["crane"]["bridge_mass_kg"] = crane_params.bridge_mass;
  j["crane"]["suspension_height_m"] = crane_params.suspension_height;
  j["crane"]["gravity_mps2"] = crane_params.gravity;
  j["crane"]["payload_radius_m"] = crane_params.payload_radius;
  j["bounds"]["state_lo"] = dump_vec<10>(bounds.z_lo);
  j["bounds"]["state_hi"] = dump_vec<10>(bounds.z_hi);
  j["bounds"]["input_lo_n"] = dump_vec<3>(bounds.u_lo);
  j["bounds"]["input_hi_n"] = dump_vec<3>(bounds.u_hi);
  j["bounds"]["sway_max_rad"] = bounds.sway_max;
  j["voxel_resolution_m"] = voxel_resolution;
  j["collision_margin_m"] = margin;
  return j.dump(2) + "\n";
}

void Scenario::to_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) raise(ErrorCode::kParseError, "scenario: cannot write " + path);
  out << to_json();
}

void Scenario::validate() const {
  if (!workspace.valid()) raise(ErrorCode::kParseError, "scenario: degenerate workspace");
  if (!(voxel_resolution > 0.0)) raise(ErrorCode::kParseError, "scenario: non-positive resolution");
  if (margin < 0.0) raise(ErrorCode::kParseError, "scenario: negative margin");
  for (const auto& box : obstacles)
    if (!(box.size.array() > 0.0).all())
      raise(ErrorCode::kParseError, "scenario: obstacle with non-positive size");
  auto inside = [&](const FlatState& s) {
    return (s.position().array() >= workspace.lo.array()).all() &&
           (s.position().array() <= workspace.hi.array()).all();
  };
  if (!start.finite() || !inside(start)) raise(ErrorCode::kParseError, "scenario: start outside workspace");
  if (!target.finite() || !inside(target)) raise(ErrorCode::kParseError, "scenario: target outside workspace");
  if (!((bounds.z_lo.array() < bounds.z_hi.array()).all() &&
        (bounds.u_lo.array() < bounds.u_hi.array()).all() && bounds.sway_max > 0.0))
    raise(ErrorCode::kParseError, "scenario: malformed bounds");
}

}  // namespace flatplan
