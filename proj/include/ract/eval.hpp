#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ract/cost.hpp"
#include "ract/dataset.hpp"
#include "ract/forest.hpp"

namespace ract {

// Stratified fold assignment: per class, instances are shuffled and dealt
// round-robin with a cursor that continues across classes, so fold sizes
// differ by at most one within each class and overall.
struct FoldPlan {
  int k = 5;
  std::uint64_t seed = 0;
  std::vector<int> assignment;  // instance -> fold in [0,k)
};

FoldPlan make_folds(const Eigen::VectorXi& y, int k, std::uint64_t seed);

// Rank-based AUC with average ranks on tied scores.
// Throws UndefinedMetricError when only one class is present.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

enum class ModelFamily { tree, forest };

// One training/evaluation recipe, e.g. the plain baseline, the
// immutable-features-masked baseline, or the recourse-aware learner.
struct MethodConfig {
  std::string name = "ract";
  ModelFamily family = ModelFamily::forest;
  ForestConfig forest;  // forest.grow doubles as the tree config
  CostKind cost = CostKind::mps;
  Eigen::VectorXd linf_weights;      // weighted_linf only; empty means all ones
  bool mask_immutable = false;       // drop immutable features from candidates
  bool relabel = false;              // single-tree post-processing
  double delta = 0.1;                // relabel target
  std::optional<double> pac_alpha;   // enables the confidence-adjusted target
  double eval_epsilon = 0.3;         // budget for recourse metrics
  bool negatives_only_ratio = false;
};

struct MetricsRow {
  std::string method;
  double lambda = 0.0;
  double delta = 0.0;
  double epsilon = 0.0;
  std::string fold;  // "0".."k-1", "mean" or "std"
  double accuracy = 0.0;
  double auc = 0.0;
  double recourse_ratio = 0.0;
  std::optional<double> avg_cost;  // mean action cost over flipped negatives
  double train_seconds = 0.0;
  double prep_seconds = 0.0;
};

// Cross-validated metrics, one row per fold. Cost model, thresholds and
// reach tables are rebuilt from each training fold alone.
std::vector<MetricsRow> run_cv(const Dataset& ds, const MethodConfig& method,
                               const FoldPlan& folds, int threads = 1);

// Appends mean and sample-std rows over the fold rows of one configuration.
std::vector<MetricsRow> aggregate(const std::vector<MetricsRow>& fold_rows);

struct SweepGrid {
  std::vector<double> lambdas{0.0};
  std::vector<double> deltas;    // empty: keep method.delta
  std::vector<double> epsilons;  // empty: keep method.eval_epsilon
};

// Cross product of the grid over run_cv; fold rows plus aggregates per cell.
std::vector<MetricsRow> sweep(const Dataset& ds, const MethodConfig& base, const SweepGrid& grid,
                              const FoldPlan& folds, int threads = 1);

std::string metrics_to_csv(const std::vector<MetricsRow>& rows);

// Runs fn(i) for i in [0,n) on up to `threads` workers.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

}  // namespace ract
