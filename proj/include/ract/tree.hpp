#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "ract/cost.hpp"
#include "ract/dataset.hpp"

namespace ract {

// One node of a flat tree array. Split nodes route x_d <= threshold to the
// left child. Leaves carry the assigned label and training class counts.
struct TreeNode {
  bool is_leaf = true;
  int feature = -1;
  double threshold = 0.0;
  int label = -1;  // {+1,-1}, leaves only
  std::int64_t n_pos = 0;
  std::int64_t n_neg = 0;
  int left = -1;
  int right = -1;
};

struct ClassificationTree {
  int n_features = 0;
  std::vector<TreeNode> nodes;  // root at index 0

  bool empty() const { return nodes.empty(); }
};

// Axis-aligned box; coordinate d covers (lower[d], upper[d]].
struct Box {
  Eigen::ArrayXd lower;
  Eigen::ArrayXd upper;
};

struct LeafInfo {
  int leaf_index = 0;  // position in depth-first left-to-right order
  int node_id = 0;
  Box region;
  int label = -1;
  std::int64_t n_pos = 0;
  std::int64_t n_neg = 0;
};

int predict(const ClassificationTree& t, const Eigen::VectorXd& x);

// Index of the leaf node x falls into.
int leaf_node_of(const ClassificationTree& t, const Eigen::VectorXd& x);

// Fraction of positive training instances in the leaf x falls into;
// 0.5 when the leaf saw no training instances.
double predict_score(const ClassificationTree& t, const Eigen::VectorXd& x);

// All leaves with their regions, depth-first, left child before right.
std::vector<LeafInfo> enumerate_leaves(const ClassificationTree& t);

// True when the reach hulls of instance n meet region on every axis.
bool region_reachable(const ReachTable& rt, int n, const Box& region);

std::string tree_to_json(const ClassificationTree& t);
ClassificationTree tree_from_json(const std::string& text);

}  // namespace ract
