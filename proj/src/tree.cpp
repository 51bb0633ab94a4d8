#include "ract/tree.hpp"

#include <functional>
#include <limits>
#include <vector>

#include <nlohmann/json.hpp>

#include "tree_json.hpp"

namespace ract {
namespace {

using nlohmann::json;

void check_index(int idx, std::size_t n_nodes) {
  if (idx < 0 || static_cast<std::size_t>(idx) >= n_nodes)
    throw DataError("tree: child index out of range");
}

int descend(const ClassificationTree& t, const Eigen::VectorXd& x) {
  if (t.empty()) throw DataError("tree: empty model");
  if (x.size() != t.n_features) throw DataError("tree: instance dimension mismatch");
  int cur = 0;
  while (!t.nodes[static_cast<std::size_t>(cur)].is_leaf) {
    const TreeNode& nd = t.nodes[static_cast<std::size_t>(cur)];
    cur = x(nd.feature) <= nd.threshold ? nd.left : nd.right;
  }
  return cur;
}

}  // namespace

int predict(const ClassificationTree& t, const Eigen::VectorXd& x) {
  return t.nodes[static_cast<std::size_t>(descend(t, x))].label;
}

int leaf_node_of(const ClassificationTree& t, const Eigen::VectorXd& x) {
  return descend(t, x);
}

double predict_score(const ClassificationTree& t, const Eigen::VectorXd& x) {
  const TreeNode& leaf = t.nodes[static_cast<std::size_t>(descend(t, x))];
  std::int64_t total = leaf.n_pos + leaf.n_neg;
  if (total == 0) return 0.5;
  return static_cast<double>(leaf.n_pos) / static_cast<double>(total);
}

std::vector<LeafInfo> enumerate_leaves(const ClassificationTree& t) {
  if (t.empty()) throw DataError("tree: empty model");
  const double inf = std::numeric_limits<double>::infinity();

  Box region;
  region.lower = Eigen::ArrayXd::Constant(t.n_features, -inf);
  region.upper = Eigen::ArrayXd::Constant(t.n_features, inf);

  std::vector<LeafInfo> leaves;
  std::function<void(int)> walk = [&](int id) {
    const TreeNode& nd = t.nodes[static_cast<std::size_t>(id)];
    if (nd.is_leaf) {
      LeafInfo li;
      li.leaf_index = static_cast<int>(leaves.size());
      li.node_id = id;
      li.region = region;
      li.label = nd.label;
      li.n_pos = nd.n_pos;
      li.n_neg = nd.n_neg;
      leaves.push_back(std::move(li));
      return;
    }
    double saved_hi = region.upper(nd.feature);
    region.upper(nd.feature) = std::min(saved_hi, nd.threshold);
    walk(nd.left);
    region.upper(nd.feature) = saved_hi;

    double saved_lo = region.lower(nd.feature);
    region.lower(nd.feature) = std::max(saved_lo, nd.threshold);
    walk(nd.right);
    region.lower(nd.feature) = saved_lo;
  };
  walk(0);
  return leaves;
}

bool region_reachable(const ReachTable& rt, int n, const Box& region) {
  for (Eigen::Index d = 0; d < region.lower.size(); ++d) {
    // hull [lo,hi] must meet the half-open box side (l,u]
    if (!(rt.lo(n, d) <= region.upper(d) && rt.hi(n, d) > region.lower(d))) return false;
  }
  return true;
}

namespace {

json node_to_json(const TreeNode& nd) {
  json j;
  if (nd.is_leaf) {
    j["kind"] = "leaf";
    j["label"] = nd.label;
    j["n_pos"] = nd.n_pos;
    j["n_neg"] = nd.n_neg;
  } else {
    j["kind"] = "split";
    j["feature"] = nd.feature;
    j["threshold"] = nd.threshold;
    j["left"] = nd.left;
    j["right"] = nd.right;
  }
  return j;
}

TreeNode node_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind")) throw DataError("tree: node without kind");
  TreeNode nd;
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "leaf") {
    nd.is_leaf = true;
    nd.label = j.at("label").get<int>();
    if (nd.label != 1 && nd.label != -1) throw DataError("tree: leaf label must be +1 or -1");
    nd.n_pos = j.value("n_pos", std::int64_t{0});
    nd.n_neg = j.value("n_neg", std::int64_t{0});
    if (nd.n_pos < 0 || nd.n_neg < 0) throw DataError("tree: negative leaf counts");
  } else if (kind == "split") {
    nd.is_leaf = false;
    nd.feature = j.at("feature").get<int>();
    nd.threshold = j.at("threshold").get<double>();
    nd.left = j.at("left").get<int>();
    nd.right = j.at("right").get<int>();
  } else {
    throw DataError("tree: unknown node kind '" + kind + "'");
  }
  return nd;
}

}  // namespace

json tree_to_json_obj(const ClassificationTree& t) {
  json j;
  j["version"] = 1;
  j["n_features"] = t.n_features;
  json nodes = json::array();
  for (const TreeNode& nd : t.nodes) nodes.push_back(node_to_json(nd));
  j["nodes"] = std::move(nodes);
  return j;
}

ClassificationTree tree_from_json_obj(const json& j) {
  if (!j.is_object()) throw DataError("tree: document root must be an object");
  ClassificationTree t;
  try {
    if (!j.contains("version") || j.at("version").get<int>() != 1)
      throw DataError("tree: unsupported document version");
    t.n_features = j.at("n_features").get<int>();
    if (t.n_features <= 0) throw DataError("tree: n_features must be positive");
    if (!j.contains("nodes") || !j.at("nodes").is_array() || j.at("nodes").empty())
      throw DataError("tree: missing nodes");
    for (const auto& nj : j.at("nodes")) t.nodes.push_back(node_from_json(nj));
  } catch (const json::exception& e) {
    throw DataError(std::string("tree: malformed document: ") + e.what());
  }

  for (const TreeNode& nd : t.nodes) {
    if (nd.is_leaf) continue;
    check_index(nd.left, t.nodes.size());
    check_index(nd.right, t.nodes.size());
    if (nd.feature < 0 || nd.feature >= t.n_features)
      throw DataError("tree: split feature out of range");
  }

  // every node reachable from the root exactly once, no cycles
  std::vector<int> seen(t.nodes.size(), 0);
  std::function<void(int)> walk = [&](int id) {
    if (seen[static_cast<std::size_t>(id)]++) throw DataError("tree: node referenced twice");
    const TreeNode& nd = t.nodes[static_cast<std::size_t>(id)];
    if (!nd.is_leaf) {
      walk(nd.left);
      walk(nd.right);
    }
  };
  walk(0);
  for (int s : seen)
    if (s != 1) throw DataError("tree: unreachable node");
  return t;
}

std::string tree_to_json(const ClassificationTree& t) {
  return tree_to_json_obj(t).dump(2) + "\n";
}

ClassificationTree tree_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("tree: invalid JSON: ") + e.what());
  }
  return tree_from_json_obj(j);
}

}  // namespace ract
