#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "flatplan/crane.hpp"
#include "flatplan/lqmt.hpp"
#include "flatplan/scenario.hpp"
#include "flatplan/world.hpp"

namespace flatplan {

struct TreeNode {
  FlatState x;
  double cost_to_come = 0.0;
  double heuristic = 0.0;   // obstacle-free steer cost to the target
  double edge_cost = 0.0;   // cost of the edge from the parent
  int parent = -1;
  std::vector<int> children;
  bool mask = true;   // 0 iff cost_to_come exceeds the incumbent J*
  bool alive = true;  // tombstoned by branch-and-bound removal
};

struct TrajectoryTree {
  std::vector<TreeNode> nodes;
  int root = 0;
  FlatState start;
  FlatState target;
  SteeringWeights weights;
  double best_cost = std::numeric_limits<double>::infinity();  // J*
  int best_leaf = -1;
  double best_target_edge_cost = std::numeric_limits<double>::infinity();
  std::uint64_t rng_seed = 0;
  std::uint64_t pruned_total = 0;  // lifetime count of removed nodes

  std::size_t alive_count() const {
    std::size_t n = 0;
    for (const auto& node : nodes) n += node.alive;
    return n;
  }
};

struct PlannerConfig {
  double t_plan = 30.0;          // wall-clock budget, seconds
  std::uint64_t max_iters = 0;   // deterministic iteration budget, 0 = unlimited
  int workers = 1;
  std::uint64_t seed = 0;
  SteeringWeights weights;
  SteeringBounds steer_bounds;
  double edge_sample_dt = 0.02;  // feasibility sampling step along edges
  int scan_samples = lqmt::kDefaultScanSamples;
  int sample_rejection_limit = 10000;
  double sample_acc_max = 0.0;   // > 0 enables full 12-D sampling
  double sample_jerk_max = 0.0;
  std::uint64_t expansion_budget = 0;  // find_parent pops, 0 = whole unmasked tree
  bool enable_informed = true;
  bool enable_pruning = true;
  bool informed_use_direct_cost = false;  // informed check with direct steer cost
  bool prune_on_fhat = false;             // stricter prune on cost-to-come + heuristic
  bool push_parent_on_failure = false;    // literal queue-propagation reading
  double replan_budget = 1.0;    // seconds
  double stop_at_cost = 0.0;     // > 0: stop once J* drops to this
  std::uint64_t audit_interval = 0;  // tree audits every N operations, 0 = off
};

struct HistoryEntry {
  std::uint64_t iteration = 0;
  double wall_s = 0.0;
  double j_star = 0.0;
};

struct PlanStats {
  std::uint64_t iterations = 0;
  std::uint64_t samples_drawn = 0;
  std::uint64_t samples_rejected = 0;
  std::uint64_t inserts = 0;
  std::uint64_t rewires = 0;
  std::uint64_t pruned_nodes = 0;
  double wall_time_s = 0.0;
  double first_solution_wall_s = 0.0;
  bool replan_used_sampling = false;
  std::uint64_t audit_failures = 0;
  std::vector<HistoryEntry> history;  // J* improvements
};

enum class PlanStatus { kSuccess, kNoSolution };

struct PlanResult {
  PlanStatus status = PlanStatus::kNoSolution;
  std::vector<lqmt::SteeringSolution> edges;  // root -> target
  double total_cost = std::numeric_limits<double>::infinity();
  double travel_time = 0.0;
  TrajectoryTree tree;
  PlanStats stats;
};

struct AuditReport {
  bool ok = true;
  std::vector<std::string> problems;
};

/// Sampling-based trajectory planner over the flat model: anytime tree
/// construction with an analytic steering primitive, informed sample
/// rejection, branch-and-bound pruning, parallel tree stacks, and
/// warm-start replanning.
class Planner {
 public:
  Planner(const Scenario& scenario, const PlannerConfig& config);

  PlanResult plan();
  PlanResult replan(TrajectoryTree tree, const FlatState& new_target);

  /// Uniform position over free voxels (rejection sampling with clearance),
  /// velocities uniform within bounds, higher derivatives per config.
  FlatState sample_free(std::mt19937_64& rng) const;

  struct ParentCandidate {
    int id = -1;
    lqmt::SteeringSolution edge;
    double cost_to_come = 0.0;  // through-parent cost of the new node
  };

  /// Best-first search over unmasked nodes keyed by cost-to-come plus steer
  /// cost; returns the first (hence cheapest) feasible connection. The key
  /// is monotone along tree paths, so this is the global optimum. Children
  /// are enqueued when the popped node's edge fails. An optional cost cap
  /// abandons the search once no connection below it can exist.
  std::optional<ParentCandidate> find_parent(
      const TrajectoryTree& tree, const FlatState& x_new,
      double cost_cap = std::numeric_limits<double>::infinity()) const;

  /// Adds the node; cost-to-come is parent's plus edge cost, heuristic the
  /// obstacle-free steer cost to the target (computed when NaN is passed).
  int insert(TrajectoryTree& tree, const FlatState& x_new, int parent,
             const lqmt::SteeringSolution& edge,
             double heuristic = std::numeric_limits<double>::quiet_NaN()) const;

  /// Reparents unmasked nodes through the new node when that lowers their
  /// cost-to-come (edges re-checked); propagates the decrease through the
  /// affected subtrees. Returns the number of adopted nodes.
  int rewire(TrajectoryTree& tree, int new_id) const;

  /// Attempts the exact-state connection to the target; on improvement
  /// updates J*, the best leaf, and prunes. Returns true on improvement.
  bool try_connect_target(TrajectoryTree& tree, int new_id) const;

  /// Recomputes masks against J* and deletes fully-masked subtrees (the
  /// best-cost chain is kept). Returns the number of deleted nodes.
  int prune(TrajectoryTree& tree, double j_star) const;

  /// Merges worker trees: keeps the best tree as base, re-homes unmasked
  /// foreign nodes through find_parent, re-prunes under the best J*.
  TrajectoryTree merge(std::vector<TrajectoryTree> trees) const;

  /// Orders the best chain root->target, re-solving every edge.
  PlanResult extract_trajectory(TrajectoryTree tree) const;

  /// Eq-style feasibility bundle for one edge: crane bounds at every sample
  /// plus the sound collision check.
  bool edge_feasible(const lqmt::SteeringSolution& edge) const;

  /// Obstacle-free LQMT cost to the target.
  double heuristic_cost(const FlatState& x, const FlatState& target) const;

  AuditReport audit(const TrajectoryTree& tree) const;

  const world::DistanceField& field() const { return field_; }
  const Scenario& scenario() const { return scenario_; }
  const PlannerConfig& config() const { return config_; }

  static std::uint64_t worker_seed(std::uint64_t base, int worker) {
    return base + std::uint64_t(worker) * 0x9E3779B9ull;
  }

 private:
  struct LoopBudget {
    double deadline_s = 0.0;  // relative to loop start
    std::uint64_t max_iters = 0;
    double stop_at_cost = 0.0;
  };

  TrajectoryTree make_tree(std::uint64_t seed) const;
  void check_endpoint(const FlatState& x, const char* label) const;
  void run_loop(TrajectoryTree& tree, std::mt19937_64& rng, PlanStats& stats,
                const LoopBudget& budget) const;
  void refresh_masks(TrajectoryTree& tree) const;
  bool node_masked_value(const TrajectoryTree& tree, const TreeNode& node) const;
  void maybe_audit(const TrajectoryTree& tree, PlanStats& stats,
                   std::uint64_t& ops_since_audit, std::uint64_t new_ops) const;

  Scenario scenario_;
  PlannerConfig config_;
  world::DistanceField field_;
};

}  // namespace flatplan
