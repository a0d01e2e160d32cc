#pragma once

#include <string>
#include <vector>

#include "flatplan/crane.hpp"
#include "flatplan/world.hpp"

namespace flatplan {

/// Planning problem description, loadable from JSON. Field names carry
/// units; start/target derivative fields are optional and default to rest.
struct Scenario {
  world::Workspace workspace;
  std::vector<world::Aabb> obstacles;
  FlatState start;
  FlatState target;
  crane::CraneParams crane_params;
  crane::FeasibilityBounds bounds = crane::FeasibilityBounds::defaults();
  double voxel_resolution = 0.01;
  double margin = 0.02;

  static Scenario from_json(const std::string& text);
  static Scenario from_file(const std::string& path);
  std::string to_json() const;
  void to_file(const std::string& path) const;

  /// Throws ParseError when invariants are violated (workspace degenerate,
  /// endpoints outside, malformed bounds).
  void validate() const;
};

}  // namespace flatplan
