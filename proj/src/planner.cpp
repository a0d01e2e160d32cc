#include "flatplan/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <queue>
#include <thread>
#include <tuple>

#include "flatplan/errors.hpp"

namespace flatplan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool is_ancestor(const TrajectoryTree& tree, int candidate, int node) {
  for (int cur = node; cur >= 0; cur = tree.nodes[cur].parent)
    if (cur == candidate) return true;
  return false;
}

void detach_from_parent(TrajectoryTree& tree, int id) {
  const int parent = tree.nodes[id].parent;
  if (parent < 0) return;
  auto& siblings = tree.nodes[parent].children;
  siblings.erase(std::remove(siblings.begin(), siblings.end(), id), siblings.end());
}

}  // namespace

Planner::Planner(const Scenario& scenario, const PlannerConfig& config)
    : scenario_(scenario), config_(config) {
  scenario_.validate();
  if (!config_.weights.valid() || !config_.steer_bounds.valid())
    raise(ErrorCode::kParseError, "planner: invalid steering weights or bounds");
  field_ = world::edt(
      world::rasterize(scenario_.obstacles, scenario_.workspace, scenario_.voxel_resolution));
}

double Planner::heuristic_cost(const FlatState& x, const FlatState& target) const {
  if (bitwise_equal(x, target)) return 0.0;
  return lqmt::steer(x, target, config_.weights, config_.steer_bounds, config_.scan_samples)
      .cost;
}

FlatState Planner::sample_free(std::mt19937_64& rng) const {
  const auto& ws = scenario_.workspace;
  const double inflate = scenario_.crane_params.payload_radius + scenario_.margin;
  std::uniform_real_distribution<double> ux(ws.lo[0], ws.hi[0]);
  std::uniform_real_distribution<double> uy(ws.lo[1], ws.hi[1]);
  std::uniform_real_distribution<double> uz(ws.lo[2], ws.hi[2]);

  FlatState s;
  bool found = false;
  for (int attempt = 0; attempt < config_.sample_rejection_limit; ++attempt) {
    const Vec3 p(ux(rng), uy(rng), uz(rng));
    if (world::clearance(field_, p) >= inflate) {
      s.position() = p;
      found = true;
      break;
    }
  }
  if (!found) raise(ErrorCode::kNoFreeSpace, "sample_free: rejection limit exhausted");

  for (int i = 0; i < 3; ++i) {
    std::uniform_real_distribution<double> uv(scenario_.bounds.z_lo[5 + i],
                                              scenario_.bounds.z_hi[5 + i]);
    s.x[3 + i] = uv(rng);
  }
  if (config_.sample_acc_max > 0.0) {
    std::uniform_real_distribution<double> ua(-config_.sample_acc_max, config_.sample_acc_max);
    for (int i = 0; i < 3; ++i) s.x[6 + i] = ua(rng);
  }
  if (config_.sample_jerk_max > 0.0) {
    std::uniform_real_distribution<double> uj(-config_.sample_jerk_max, config_.sample_jerk_max);
    for (int i = 0; i < 3; ++i) s.x[9 + i] = uj(rng);
  }
  return s;
}

bool Planner::edge_feasible(const lqmt::SteeringSolution& edge) const {
  const auto samples = lqmt::sample_edge(edge, config_.edge_sample_dt);
  if (!world::edge_collision_free(field_, samples, scenario_.crane_params.payload_radius,
                                  scenario_.margin))
    return false;
  for (const auto& sample : samples) {
    try {
      const auto fs = crane::FlatSample::from(sample.state, sample.snap);
      const auto z = crane::flat_to_state(fs, scenario_.crane_params);
      const auto u = crane::flat_to_input(fs, scenario_.crane_params);
      if (!crane::check_bounds(z, u, scenario_.bounds).feasible) return false;
    } catch (const PlanningError&) {
      return false;  // rope inverted/slack along the edge
    }
  }
  return true;
}

std::optional<Planner::ParentCandidate> Planner::find_parent(const TrajectoryTree& tree,
                                                             const FlatState& x_new,
                                                             double cost_cap) const {
  // entries: (key, node id, exact). Lazy entries carry the admissible lower
  // bound cost_to_come; exact entries the true cost_to_come + steer cost.
  using Entry = std::tuple<double, int, bool>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> queue;
  std::vector<std::uint8_t> pushed(tree.nodes.size(), 0);
  std::vector<std::unique_ptr<lqmt::SteeringSolution>> solved(tree.nodes.size());

  queue.emplace(tree.nodes[tree.root].cost_to_come, tree.root, false);
  pushed[tree.root] = 1;
  std::uint64_t exact_pops = 0;

  auto push_children = [&](int id) {
    for (int child : tree.nodes[id].children)
      if (tree.nodes[child].alive && !pushed[child]) {
        pushed[child] = 1;
        queue.emplace(tree.nodes[child].cost_to_come, child, false);
      }
  };
  auto push_parent = [&](int id) {
    const int parent = tree.nodes[id].parent;
    if (parent >= 0 && tree.nodes[parent].alive && !pushed[parent]) {
      pushed[parent] = 1;
      queue.emplace(tree.nodes[parent].cost_to_come, parent, false);
    }
  };

  while (!queue.empty()) {
    const auto [key, id, exact] = queue.top();
    queue.pop();
    if (key >= cost_cap) return std::nullopt;  // keys are monotone
    const TreeNode& node = tree.nodes[id];
    if (!node.alive) continue;

    if (!exact) {
      if (!node.mask) {
        push_children(id);  // masked nodes are not candidates but do not block descent
        continue;
      }
      auto sol = std::make_unique<lqmt::SteeringSolution>(lqmt::steer(
          node.x, x_new, config_.weights, config_.steer_bounds, config_.scan_samples));
      const double exact_key = node.cost_to_come + sol->cost;
      solved[id] = std::move(sol);
      queue.emplace(exact_key, id, true);
      continue;
    }

    if (config_.expansion_budget > 0 && exact_pops >= config_.expansion_budget)
      return std::nullopt;
    ++exact_pops;
    if (edge_feasible(*solved[id]))
      return ParentCandidate{id, *solved[id], key};
    // queue propagation on failure: descend by default, the literal
    // parent-push reading is kept behind a flag
    if (config_.push_parent_on_failure)
      push_parent(id);
    else
      push_children(id);
  }
  return std::nullopt;
}

int Planner::insert(TrajectoryTree& tree, const FlatState& x_new, int parent,
                    const lqmt::SteeringSolution& edge, double heuristic) const {
  TreeNode node;
  node.x = x_new;
  node.parent = parent;
  node.edge_cost = edge.cost;
  node.cost_to_come = tree.nodes[parent].cost_to_come + edge.cost;
  node.heuristic = std::isnan(heuristic) ? heuristic_cost(x_new, tree.target) : heuristic;
  node.mask = !node_masked_value(tree, node);
  const int id = int(tree.nodes.size());
  tree.nodes.push_back(std::move(node));
  tree.nodes[parent].children.push_back(id);
  return id;
}

bool Planner::node_masked_value(const TrajectoryTree& tree, const TreeNode& node) const {
  if (!std::isfinite(tree.best_cost)) return false;
  const double measure =
      config_.prune_on_fhat ? node.cost_to_come + node.heuristic : node.cost_to_come;
  return measure > tree.best_cost;
}

void Planner::refresh_masks(TrajectoryTree& tree) const {
  for (auto& node : tree.nodes)
    if (node.alive) node.mask = !node_masked_value(tree, node);
}

int Planner::rewire(TrajectoryTree& tree, int new_id) const {
  const double ctc_new = tree.nodes[new_id].cost_to_come;
  int adopted = 0;
  bool chain_touched = false;
  for (int id = 0; id < int(tree.nodes.size()); ++id) {
    if (id == new_id || id == tree.root) continue;
    TreeNode& node = tree.nodes[id];
    if (!node.alive || !node.mask) continue;
    const auto sol = lqmt::steer(tree.nodes[new_id].x, node.x, config_.weights,
                                 config_.steer_bounds, config_.scan_samples);
    if (!(ctc_new + sol.cost < node.cost_to_come)) continue;
    if (is_ancestor(tree, id, new_id)) continue;  // would create a cycle
    if (!edge_feasible(sol)) continue;

    detach_from_parent(tree, id);
    node.parent = new_id;
    node.edge_cost = sol.cost;
    tree.nodes[new_id].children.push_back(id);
    // propagate the exact cost recomputation through the subtree
    std::vector<int> stack{id};
    while (!stack.empty()) {
      const int cur = stack.back();
      stack.pop_back();
      TreeNode& n = tree.nodes[cur];
      n.cost_to_come = tree.nodes[n.parent].cost_to_come + n.edge_cost;
      if (cur == tree.best_leaf) chain_touched = true;
      for (int child : n.children)
        if (tree.nodes[child].alive) stack.push_back(child);
    }
    ++adopted;
  }
  if (adopted > 0 && std::isfinite(tree.best_cost)) {
    if (chain_touched) {
      const double updated =
          tree.nodes[tree.best_leaf].cost_to_come + tree.best_target_edge_cost;
      tree.best_cost = std::min(tree.best_cost, updated);
    }
    if (config_.enable_pruning)
      prune(tree, tree.best_cost);
    else
      refresh_masks(tree);
  }
  return adopted;
}

bool Planner::try_connect_target(TrajectoryTree& tree, int new_id) const {
  const TreeNode& node = tree.nodes[new_id];
  const auto sol = lqmt::steer(node.x, tree.target, config_.weights, config_.steer_bounds,
                               config_.scan_samples);
  const double j_temp = node.cost_to_come + sol.cost;
  if (!(j_temp < tree.best_cost)) return false;
  if (!edge_feasible(sol)) return false;
  tree.best_cost = j_temp;
  tree.best_leaf = new_id;
  tree.best_target_edge_cost = sol.cost;
  if (config_.enable_pruning) prune(tree, tree.best_cost);
  return true;
}

int Planner::prune(TrajectoryTree& tree, double j_star) const {
  if (!std::isfinite(j_star)) return 0;
  for (auto& node : tree.nodes)
    if (node.alive)
      node.mask = !(config_.prune_on_fhat ? node.cost_to_come + node.heuristic > j_star
                                          : node.cost_to_come > j_star);

  std::vector<std::uint8_t> keep(tree.nodes.size(), 0);
  for (int id = 0; id < int(tree.nodes.size()); ++id)
    if (tree.nodes[id].alive && tree.nodes[id].mask) keep[id] = 1;
  // the best-cost chain survives regardless
  for (int cur = tree.best_leaf; cur >= 0; cur = tree.nodes[cur].parent) keep[cur] = 1;
  // masked nodes with a surviving descendant stay (two-stage removal)
  std::vector<int> order;
  order.reserve(tree.nodes.size());
  std::vector<int> stack{tree.root};
  while (!stack.empty()) {
    const int cur = stack.back();
    stack.pop_back();
    order.push_back(cur);
    for (int child : tree.nodes[cur].children)
      if (tree.nodes[child].alive) stack.push_back(child);
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    if (!keep[*it])
      for (int child : tree.nodes[*it].children)
        if (tree.nodes[child].alive && keep[child]) {
          keep[*it] = 1;
          break;
        }

  int removed = 0;
  for (int id = 0; id < int(tree.nodes.size()); ++id) {
    TreeNode& node = tree.nodes[id];
    if (!node.alive || keep[id]) continue;
    if (node.parent >= 0 && tree.nodes[node.parent].alive && keep[node.parent])
      detach_from_parent(tree, id);
    node.alive = false;
    node.children.clear();
    ++removed;
  }
  tree.pruned_total += removed;
  return removed;
}

TrajectoryTree Planner::make_tree(std::uint64_t seed) const {
  TrajectoryTree tree;
  tree.start = scenario_.start;
  tree.target = scenario_.target;
  tree.weights = config_.weights;
  tree.rng_seed = seed;
  TreeNode root;
  root.x = scenario_.start;
  root.heuristic = heuristic_cost(scenario_.start, scenario_.target);
  tree.nodes.push_back(std::move(root));
  return tree;
}

void Planner::check_endpoint(const FlatState& x, const char* label) const {
  const double inflate = scenario_.crane_params.payload_radius + scenario_.margin;
  try {
    if (world::clearance(field_, x.position()) < inflate)
      raise(ErrorCode::kInfeasibleEndpoints,
            std::string("planner: ") + label + " is in collision");
    const auto fs = crane::FlatSample::from(x);
    const auto z = crane::flat_to_state(fs, scenario_.crane_params);
    const auto u = crane::flat_to_input(fs, scenario_.crane_params);
    if (!crane::check_bounds(z, u, scenario_.bounds).feasible)
      raise(ErrorCode::kInfeasibleEndpoints,
            std::string("planner: ") + label + " violates state/input bounds");
  } catch (const PlanningError& e) {
    if (e.code() == ErrorCode::kInfeasibleEndpoints) throw;
    raise(ErrorCode::kInfeasibleEndpoints,
          std::string("planner: ") + label + " infeasible: " + e.what());
  }
}

void Planner::maybe_audit(const TrajectoryTree& tree, PlanStats& stats,
                          std::uint64_t& ops_since_audit, std::uint64_t new_ops) const {
  if (config_.audit_interval == 0) return;
  ops_since_audit += new_ops;
  if (ops_since_audit < config_.audit_interval) return;
  ops_since_audit = 0;
  if (!audit(tree).ok) ++stats.audit_failures;
}

void Planner::run_loop(TrajectoryTree& tree, std::mt19937_64& rng, PlanStats& stats,
                       const LoopBudget& budget) const {
  const auto t0 = std::chrono::steady_clock::now();
  std::uint64_t ops_since_audit = 0;
  while (true) {
    if (budget.max_iters > 0 && stats.iterations >= budget.max_iters) break;
    if (seconds_since(t0) >= budget.deadline_s) break;
    if (budget.stop_at_cost > 0.0 && tree.best_cost <= budget.stop_at_cost) break;
    ++stats.iterations;

    const FlatState sample = sample_free(rng);
    ++stats.samples_drawn;
    const double h = heuristic_cost(sample, tree.target);

    double cap = kInf;
    if (config_.enable_informed && std::isfinite(tree.best_cost)) {
      if (config_.informed_use_direct_cost) {
        const double direct = heuristic_cost(tree.start, sample);
        if (direct + h >= tree.best_cost) {
          ++stats.samples_rejected;
          continue;
        }
      } else {
        cap = tree.best_cost - h;  // through-parent informed set as a search cap
        if (cap <= tree.nodes[tree.root].cost_to_come) {
          ++stats.samples_rejected;
          continue;
        }
      }
    }

    const auto parent = find_parent(tree, sample, cap);
    if (!parent) {
      ++stats.samples_rejected;
      continue;
    }
    if (config_.enable_informed && !config_.informed_use_direct_cost &&
        std::isfinite(tree.best_cost) && parent->cost_to_come + h >= tree.best_cost) {
      ++stats.samples_rejected;
      continue;
    }

    const double j_before = tree.best_cost;
    const std::uint64_t pruned_before = tree.pruned_total;
    const int id = insert(tree, sample, parent->id, parent->edge, h);
    ++stats.inserts;
    const int rewired = rewire(tree, id);
    stats.rewires += rewired;
    try_connect_target(tree, id);
    if (tree.best_cost < j_before) {
      const double wall = seconds_since(t0);
      stats.history.push_back({stats.iterations, wall, tree.best_cost});
      if (!std::isfinite(j_before)) stats.first_solution_wall_s = wall;
    }
    const std::uint64_t pruned_delta = tree.pruned_total - pruned_before;
    stats.pruned_nodes += pruned_delta;
    maybe_audit(tree, stats, ops_since_audit, 1 + rewired + pruned_delta);
  }
}

PlanResult Planner::plan() {
  const auto t0 = std::chrono::steady_clock::now();
  check_endpoint(scenario_.start, "start");
  check_endpoint(scenario_.target, "target");

  if (bitwise_equal(scenario_.start, scenario_.target)) {
    PlanResult result;
    result.status = PlanStatus::kSuccess;
    result.tree = make_tree(config_.seed);
    result.tree.best_cost = 0.0;
    result.tree.best_leaf = result.tree.root;
    result.tree.best_target_edge_cost = 0.0;
    result.edges.push_back(lqmt::steer(scenario_.start, scenario_.target, config_.weights,
                                       config_.steer_bounds, config_.scan_samples));
    result.total_cost = 0.0;
    result.stats.wall_time_s = seconds_since(t0);
    return result;
  }

  const int workers = std::max(1, config_.workers);
  LoopBudget budget{config_.t_plan, config_.max_iters, config_.stop_at_cost};

  TrajectoryTree tree;
  PlanStats stats;
  if (workers == 1) {
    tree = make_tree(config_.seed);
    std::mt19937_64 rng(config_.seed);
    run_loop(tree, rng, stats, budget);
  } else {
    std::vector<TrajectoryTree> trees(workers);
    std::vector<PlanStats> worker_stats(workers);
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (int i = 0; i < workers; ++i) {
      threads.emplace_back([&, i] {
        const std::uint64_t seed = worker_seed(config_.seed, i);
        trees[i] = make_tree(seed);
        std::mt19937_64 rng(seed);
        run_loop(trees[i], rng, worker_stats[i], budget);
      });
    }
    for (auto& t : threads) t.join();
    stats = worker_stats[0];
    for (int i = 1; i < workers; ++i) {
      stats.iterations += worker_stats[i].iterations;
      stats.samples_drawn += worker_stats[i].samples_drawn;
      stats.samples_rejected += worker_stats[i].samples_rejected;
      stats.inserts += worker_stats[i].inserts;
      stats.rewires += worker_stats[i].rewires;
      stats.pruned_nodes += worker_stats[i].pruned_nodes;
      stats.audit_failures += worker_stats[i].audit_failures;
    }
    tree = merge(std::move(trees));
    if (std::isfinite(tree.best_cost))
      stats.history.push_back({stats.iterations, seconds_since(t0), tree.best_cost});
  }

  PlanResult result;
  if (std::isfinite(tree.best_cost)) {
    result = extract_trajectory(std::move(tree));
  } else {
    result.status = PlanStatus::kNoSolution;
    result.tree = std::move(tree);
  }
  result.stats = std::move(stats);
  result.stats.wall_time_s = seconds_since(t0);
  return result;
}

TrajectoryTree Planner::merge(std::vector<TrajectoryTree> trees) const {
  if (trees.empty()) raise(ErrorCode::kIncompatibleTrees, "merge: no trees");
  for (const auto& t : trees) {
    if (!bitwise_equal(t.start, trees.front().start) ||
        !bitwise_equal(t.target, trees.front().target) ||
        (t.weights.r - trees.front().weights.r).cwiseAbs().maxCoeff() != 0.0)
      raise(ErrorCode::kIncompatibleTrees, "merge: trees disagree on start/target/weights");
  }

  std::size_t base_idx = 0;
  for (std::size_t i = 1; i < trees.size(); ++i)
    if (trees[i].best_cost < trees[base_idx].best_cost) base_idx = i;
  TrajectoryTree base = std::move(trees[base_idx]);

  for (std::size_t i = 0; i < trees.size(); ++i) {
    if (i == base_idx) continue;
    const TrajectoryTree& other = trees[i];
    for (int id = 0; id < int(other.nodes.size()); ++id) {
      if (id == other.root) continue;
      const TreeNode& node = other.nodes[id];
      if (!node.alive || !node.mask) continue;
      const auto parent = find_parent(base, node.x, base.best_cost);
      if (!parent) continue;  // no feasible edge below the incumbent cost
      const int new_id = insert(base, node.x, parent->id, parent->edge, node.heuristic);
      try_connect_target(base, new_id);
    }
  }
  prune(base, base.best_cost);
  return base;
}

PlanResult Planner::replan(TrajectoryTree tree, const FlatState& new_target) {
  const auto t0 = std::chrono::steady_clock::now();
  PlanStats stats;

  if (bitwise_equal(new_target, tree.target) && std::isfinite(tree.best_cost)) {
    PlanResult result = extract_trajectory(std::move(tree));
    result.stats.wall_time_s = seconds_since(t0);
    return result;
  }
  check_endpoint(new_target, "target");

  tree.target = new_target;
  tree.best_cost = kInf;
  tree.best_leaf = -1;
  tree.best_target_edge_cost = kInf;
  std::vector<int> alive_ids;
  for (int id = 0; id < int(tree.nodes.size()); ++id) {
    TreeNode& node = tree.nodes[id];
    if (!node.alive) continue;
    node.mask = true;
    node.heuristic = heuristic_cost(node.x, new_target);
    alive_ids.push_back(id);
  }
  std::sort(alive_ids.begin(), alive_ids.end(), [&](int a, int b) {
    const double fa = tree.nodes[a].cost_to_come + tree.nodes[a].heuristic;
    const double fb = tree.nodes[b].cost_to_come + tree.nodes[b].heuristic;
    return fa != fb ? fa < fb : a < b;
  });

  // connection sweep in ascending f-hat order; no sampling needed when the
  // stored tree is dense enough
  for (int id : alive_ids) {
    if (seconds_since(t0) >= config_.replan_budget) break;
    const TreeNode& node = tree.nodes[id];
    if (node.cost_to_come + node.heuristic >= tree.best_cost) break;  // sorted
    if (try_connect_target(tree, id)) {
      if (stats.first_solution_wall_s == 0.0)
        stats.first_solution_wall_s = seconds_since(t0);
      stats.history.push_back({0, seconds_since(t0), tree.best_cost});
    }
  }

  if (!std::isfinite(tree.best_cost)) {
    // cold path: resume the full planning loop warm-started from the tree
    stats.replan_used_sampling = true;
    std::mt19937_64 rng(tree.rng_seed + 1);
    const double remaining = std::max(0.0, config_.replan_budget - seconds_since(t0));
    run_loop(tree, rng, stats, LoopBudget{remaining, 0, config_.stop_at_cost});
  } else {
    // keep refining with the remaining budget
    std::mt19937_64 rng(tree.rng_seed + 1);
    const double remaining = std::max(0.0, config_.replan_budget - seconds_since(t0));
    if (remaining > 0.0) run_loop(tree, rng, stats, LoopBudget{remaining, 0, 0.0});
  }

  PlanResult result;
  if (std::isfinite(tree.best_cost)) {
    result = extract_trajectory(std::move(tree));
  } else {
    result.status = PlanStatus::kNoSolution;
    result.tree = std::move(tree);
  }
  result.stats = std::move(stats);
  result.stats.wall_time_s = seconds_since(t0);
  return result;
}

PlanResult Planner::extract_trajectory(TrajectoryTree tree) const {
  if (!std::isfinite(tree.best_cost) || tree.best_leaf < 0)
    raise(ErrorCode::kNoSolution, "extract_trajectory: no incumbent solution");

  std::vector<int> chain;
  for (int cur = tree.best_leaf; cur >= 0; cur = tree.nodes[cur].parent)
    chain.push_back(cur);
  std::reverse(chain.begin(), chain.end());

  PlanResult result;
  result.status = PlanStatus::kSuccess;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
    auto sol = lqmt::steer(tree.nodes[chain[i]].x, tree.nodes[chain[i + 1]].x,
                           config_.weights, config_.steer_bounds, config_.scan_samples);
    total += sol.cost;
    result.travel_time += sol.dt_star;
    result.edges.push_back(std::move(sol));
  }
  auto last = lqmt::steer(tree.nodes[tree.best_leaf].x, tree.target, config_.weights,
                          config_.steer_bounds, config_.scan_samples);
  total += last.cost;
  result.travel_time += last.dt_star;
  result.edges.push_back(std::move(last));
  result.total_cost = tree.best_cost;
  if (std::abs(total - tree.best_cost) > 1e-9 * std::max(1.0, tree.best_cost))
    raise(ErrorCode::kNoSolution, "extract_trajectory: stored J* inconsistent with edges");
  result.tree = std::move(tree);
  return result;
}

AuditReport Planner::audit(const TrajectoryTree& tree) const {
  AuditReport report;
  auto fail = [&](const std::string& what) {
    report.ok = false;
    report.problems.push_back(what);
  };

  const TreeNode& root = tree.nodes[tree.root];
  if (!root.alive || root.parent != -1 || root.cost_to_come != 0.0)
    fail("root must be alive with no parent and zero cost");

  std::size_t alive = 0;
  for (int id = 0; id < int(tree.nodes.size()); ++id) {
    const TreeNode& node = tree.nodes[id];
    if (!node.alive) continue;
    ++alive;
    for (int child : node.children) {
      if (!tree.nodes[child].alive) fail("child list references a dead node");
      if (tree.nodes[child].parent != id) fail("parent/child maps inconsistent");
    }
    if (id != tree.root) {
      if (node.parent < 0 || !tree.nodes[node.parent].alive) {
        fail("alive non-root node without alive parent");
        continue;
      }
      const auto& siblings = tree.nodes[node.parent].children;
      if (std::count(siblings.begin(), siblings.end(), id) != 1)
        fail("node not listed exactly once under its parent");
      const double expected = tree.nodes[node.parent].cost_to_come + node.edge_cost;
      if (std::abs(node.cost_to_come - expected) > 1e-9)
        fail("cost-to-come additivity violated");
    }
  }

  // acyclicity and reachability from the root
  std::size_t visited = 0;
  std::vector<int> stack{tree.root};
  std::vector<std::uint8_t> seen(tree.nodes.size(), 0);
  seen[tree.root] = 1;
  while (!stack.empty()) {
    const int cur = stack.back();
    stack.pop_back();
    ++visited;
    for (int child : tree.nodes[cur].children) {
      if (seen[child]) {
        fail("cycle detected");
        continue;
      }
      seen[child] = 1;
      stack.push_back(child);
    }
  }
  if (visited != alive) fail("alive nodes unreachable from the root");

  if (config_.enable_pruning && std::isfinite(tree.best_cost)) {
    for (const auto& node : tree.nodes) {
      if (!node.alive) continue;
      if (node.mask == node_masked_value(tree, node)) fail("mask law violated");
    }
  }
  if (std::isfinite(tree.best_cost)) {
    if (tree.best_leaf < 0 || !tree.nodes[tree.best_leaf].alive)
      fail("best leaf missing or dead");
    else {
      const double expected =
          tree.nodes[tree.best_leaf].cost_to_come + tree.best_target_edge_cost;
      if (std::abs(expected - tree.best_cost) > 1e-9) fail("stored J* inconsistent");
    }
  }
  return report;
}

}  // namespace flatplan
