#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "ract/cost.hpp"
#include "ract/dataset.hpp"
#include "ract/tree.hpp"

namespace ract {

struct GrowConfig {
  double lambda = 0.0;   // weight of the recourse term in the objective
  double epsilon = 0.3;  // action budget used while growing
  int max_depth = 8;
  int min_samples_leaf = 1;
  double min_impurity_decrease = 0.0;
  std::uint64_t seed = 0;  // consumed only when feature subsampling is active
};

// Extra knobs used by ensembles and baselines; defaults train a plain tree.
struct TrainOptions {
  std::vector<int> feature_pool;  // candidate features; empty means all
  int max_features = 0;           // per-node random subset size; 0 means all
};

// Winning split of one leaf: threshold, child labels and the exact integer
// numerators of the objective components (divide by N for the rates).
struct SplitDecision {
  int feature = -1;
  double threshold = 0.0;
  int label_left = -1;
  int label_right = -1;
  double objective = 0.0;     // (risk_num + lambda * recourse_num) / N
  std::int64_t risk_num = 0;  // misclassified count of the whole updated tree
  std::int64_t recourse_num = 0;  // count of instances left without recourse
  std::int64_t n_pos_left = 0;
  std::int64_t n_neg_left = 0;
  std::int64_t n_pos_right = 0;
  std::int64_t n_neg_right = 0;
};

// Grows a classification tree by greedy minimization of
//   (misclassified + lambda * without_recourse) / N
// over single-leaf expansions. Keeps, per instance, its current leaf, the
// per-leaf reachability flags and the count of reachable positive leaves, so
// one best_split call costs O(D * (N + |thresholds|)) after the initial sort.
class TreeBuilder {
 public:
  TreeBuilder(const Dataset& ds, const CostModel& cm, const GrowConfig& cfg,
              const TrainOptions& opts = {});

  // Called after every applied split while growing.
  using SplitObserver = std::function<void(TreeBuilder&, int node_id, const SplitDecision&)>;

  ClassificationTree grow(const SplitObserver& observer = nullptr);

  // Best strict improvement for the given leaf, or nullopt when no candidate
  // beats the unsplit objective by at least min_impurity_decrease.
  std::optional<SplitDecision> best_split(int node_id);

  void apply_split(int node_id, const SplitDecision& dec);

  // Objective value of the current tree.
  double objective() const;

  // Inspection hooks (used heavily by tests).
  const ClassificationTree& tree() const { return tree_; }
  const std::vector<std::int32_t>& leaf_assignment() const { return leaf_of_; }
  const std::vector<std::uint8_t>& reachable_mask(int node_id) const;
  const std::vector<std::int32_t>& positive_reach_count() const { return V_; }
  std::vector<std::uint8_t> singled_out_mask(int node_id) const;  // omega for a leaf
  std::int64_t risk_numerator() const { return risk_num_; }
  std::int64_t recourse_numerator() const;

 private:
  struct FeatureOrder {
    std::vector<std::int32_t> by_x;
    std::vector<std::int32_t> by_lo;
    std::vector<std::int32_t> by_hi;
  };

  void scan_feature(int node_id, int d, std::int64_t mis_elsewhere, std::int64_t m,
                    std::int64_t m_reach, SplitDecision& best, bool& found) const;
  std::vector<int> node_candidate_features(int node_id);
  std::int64_t misclassified_in(int node_id) const;

  const Dataset& ds_;
  GrowConfig cfg_;
  TrainOptions opts_;
  ThresholdSet thresholds_;
  ReachTable reach_;
  std::vector<FeatureOrder> orders_;

  ClassificationTree tree_;
  std::vector<std::int32_t> leaf_of_;                // instance -> leaf node id
  std::vector<std::vector<std::uint8_t>> reach_by_;  // node id -> v vector (leaves only)
  std::vector<std::int32_t> V_;                      // reachable positive leaves per instance
  std::int64_t risk_num_ = 0;

  mutable std::vector<std::uint8_t> omega_;  // scratch, recomputed per best_split
  std::mt19937_64 rng_;
};

// Convenience wrapper: build and grow in one call.
ClassificationTree grow_tree(const Dataset& ds, const CostModel& cm, const GrowConfig& cfg,
                             const TrainOptions& opts = {});

}  // namespace ract
