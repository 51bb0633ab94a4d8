#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ract/splitter.hpp"
#include "ract/tree.hpp"

namespace ract {

struct ForestConfig {
  int n_trees = 100;
  int max_features = -1;  // -1: ceil(sqrt(D)); 0: all features
  bool bootstrap = true;
  std::vector<int> feature_pool;  // candidate features; empty means all
  GrowConfig grow;
  std::uint64_t seed = 0;
};

struct Forest {
  int n_features = 0;
  ForestConfig config;
  std::vector<ClassificationTree> trees;
};

// Bagged ensemble of recourse-aware trees. Each tree draws its bootstrap
// sample and per-node feature subsets from a stream seeded by
// mix(seed, tree_index), so results do not depend on thread count.
Forest train_forest(const Dataset& ds, const CostModel& cm, const ForestConfig& cfg,
                    int threads = 1);

// Majority vote; ties go negative.
int predict(const Forest& f, const Eigen::VectorXd& x);

// Fraction of trees voting positive.
double forest_score(const Forest& f, const Eigen::VectorXd& x);

std::string forest_to_json(const Forest& f);
Forest forest_from_json(const std::string& text);

}  // namespace ract
