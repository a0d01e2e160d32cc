#pragma once

#include <string>

#include "flatplan/planner.hpp"

namespace flatplan {

inline constexpr int kTreeDumpVersion = 1;

/// Versioned JSON dump of a trajectory tree: header (seed, weights, start,
/// target, J*) plus a node table (id, state, cost-to-come, heuristic,
/// parent, mask) in ascending id order. Children are rebuilt on load.
std::string dump_tree(const TrajectoryTree& tree);
void dump_tree_file(const TrajectoryTree& tree, const std::string& path);

/// Throws IncompatibleDump on version or schema mismatch.
TrajectoryTree load_tree(const std::string& text);
TrajectoryTree load_tree_file(const std::string& path);

}  // namespace flatplan
