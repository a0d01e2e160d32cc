#include "flatplan/tree_io.hpp"

#include <fstream>
#include <json.hpp>
#include <limits>
#include <map>
#include <sstream>

#include "flatplan/errors.hpp"

namespace flatplan {

namespace {

using json = nlohmann::ordered_json;

json encode_state(const Vec12& x) {
  json arr = json::array();
  for (int i = 0; i < 12; ++i) arr.push_back(x[i]);
  return arr;
}

Vec12 decode_state(const json& arr) {
  if (!arr.is_array() || arr.size() != 12)
    raise(ErrorCode::kIncompatibleDump, "tree dump: state must be a 12-array");
  Vec12 x;
  for (int i = 0; i < 12; ++i) x[i] = arr[i].get<double>();
  return x;
}

// infinity survives the JSON round trip as null
json encode_cost(double v) {
  if (std::isinf(v)) return nullptr;
  return v;
}

double decode_cost(const json& v) {
  if (v.is_null()) return std::numeric_limits<double>::infinity();
  return v.get<double>();
}

}  // namespace

std::string dump_tree(const TrajectoryTree& tree) {
  json j;
  j["format_version"] = kTreeDumpVersion;
  j["seed"] = tree.rng_seed;
  j["weights_r"] = json::array({tree.weights.r[0], tree.weights.r[1], tree.weights.r[2]});
  j["start"] = encode_state(tree.start.x);
  j["target"] = encode_state(tree.target.x);
  j["j_star"] = encode_cost(tree.best_cost);
  j["best_leaf"] = tree.best_leaf;
  j["best_target_edge_cost"] = encode_cost(tree.best_target_edge_cost);
  j["pruned_total"] = tree.pruned_total;
  j["nodes"] = json::array();
  for (int id = 0; id < int(tree.nodes.size()); ++id) {
    const TreeNode& node = tree.nodes[id];
    if (!node.alive) continue;
    json n;
    n["id"] = id;
    n["x"] = encode_state(node.x.x);
    n["cost_to_come"] = node.cost_to_come;
    n["heuristic"] = node.heuristic;
    n["edge_cost"] = node.edge_cost;
    n["parent"] = node.parent;
    n["mask"] = node.mask ? 1 : 0;
    j["nodes"].push_back(std::move(n));
  }
  return j.dump(2) + "\n";
}

void dump_tree_file(const TrajectoryTree& tree, const std::string& path) {
  std::ofstream out(path);
  if (!out) raise(ErrorCode::kParseError, "tree dump: cannot write " + path);
  out << dump_tree(tree);
}

TrajectoryTree load_tree(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    raise(ErrorCode::kIncompatibleDump, std::string("tree dump: invalid JSON: ") + e.what());
  }
  if (!j.contains("format_version") || !j["format_version"].is_number_integer() ||
      j["format_version"].get<int>() != kTreeDumpVersion)
    raise(ErrorCode::kIncompatibleDump, "tree dump: unsupported format version");

  TrajectoryTree tree;
  try {
    tree.rng_seed = j["seed"].get<std::uint64_t>();
    tree.weights.r = Vec3(j["weights_r"][0].get<double>(), j["weights_r"][1].get<double>(),
                          j["weights_r"][2].get<double>());
    tree.start = FlatState(decode_state(j["start"]));
    tree.target = FlatState(decode_state(j["target"]));
    tree.best_cost = decode_cost(j["j_star"]);
    tree.best_leaf = j["best_leaf"].get<int>();
    tree.best_target_edge_cost = decode_cost(j["best_target_edge_cost"]);
    tree.pruned_total = j.value("pruned_total", std::uint64_t(0));

    // ids may be sparse after pruning; compact them and remap references
    std::map<int, int> remap;
    for (const auto& n : j["nodes"]) remap[n["id"].get<int>()] = int(remap.size());
    tree.nodes.resize(remap.size());
    for (const auto& n : j["nodes"]) {
      TreeNode node;
      node.x = FlatState(decode_state(n["x"]));
      node.cost_to_come = n["cost_to_come"].get<double>();
      node.heuristic = n["heuristic"].get<double>();
      node.edge_cost = n["edge_cost"].get<double>();
      const int parent = n["parent"].get<int>();
      if (parent >= 0) {
        const auto it = remap.find(parent);
        if (it == remap.end())
          raise(ErrorCode::kIncompatibleDump, "tree dump: dangling parent reference");
        node.parent = it->second;
      }
      node.mask = n["mask"].get<int>() != 0;
      tree.nodes[remap[n["id"].get<int>()]] = std::move(node);
    }
    for (int id = 0; id < int(tree.nodes.size()); ++id) {
      const int parent = tree.nodes[id].parent;
      if (parent >= 0) tree.nodes[parent].children.push_back(id);
    }
    if (tree.best_leaf >= 0) {
      const auto it = remap.find(tree.best_leaf);
      if (it == remap.end())
        raise(ErrorCode::kIncompatibleDump, "tree dump: dangling best leaf");
      tree.best_leaf = it->second;
    }
  } catch (const PlanningError&) {
    throw;
  } catch (const std::exception& e) {
    raise(ErrorCode::kIncompatibleDump, std::string("tree dump: malformed field: ") + e.what());
  }
  return tree;
}

TrajectoryTree load_tree_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::kIncompatibleDump, "tree dump: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_tree(ss.str());
}

}  // namespace flatplan
