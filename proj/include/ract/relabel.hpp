#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ract/cost.hpp"
#include "ract/dataset.hpp"
#include "ract/tree.hpp"

namespace ract {

// Weighted partial set cover built from a tree: elements are training
// instances not yet covered by a reachable positive leaf, sets are the
// negative leaves (flipping leaf i to +1 covers the instances that can
// reach region i), weights are the misclassification increase of the flip.
struct CoverInstance {
  std::int64_t n_total = 0;          // instances in the dataset
  std::int64_t covered_upfront = 0;  // already reaching some positive leaf
  std::int64_t required = 0;         // total coverage the solution must hit
  std::vector<int> candidate_leaves;               // leaf indices, negative leaves
  std::vector<std::int64_t> weights;               // flip cost c_i, may be <= 0
  std::vector<std::vector<std::int32_t>> reach_sets;  // per candidate: uncovered instances
};

struct GreedyCoverResult {
  std::vector<int> chosen;  // positions into candidate_leaves, selection order
  std::int64_t covered = 0;
  std::int64_t weight_sum = 0;
  int iterations = 0;
};

struct RelabelReport {
  std::vector<int> flipped_leaves;  // leaf indices flipped to +1
  double coverage = 0.0;            // fraction of instances with recourse
  double risk_increase = 0.0;       // empirical risk delta vs majority labels
  double delta_effective = 0.0;     // target actually enforced (PAC-adjusted)
  int iterations = 0;
};

// Assumes leaf labels are already majority-initialized; candidate weights are
// n_neg - n_pos per negative leaf. required = n_total - floor(n_total*delta).
CoverInstance build_cover_instance(const ClassificationTree& t, const Dataset& ds,
                                   const ReachTable& rt, double delta);

// Ratio-greedy partial cover. Zero/negative-weight candidates with positive
// gain are taken first (ascending leaf index); afterwards each step maximizes
// gain/weight with exact integer comparisons. Stops at the target.
GreedyCoverResult greedy_cover(const CoverInstance& ci);

// Confidence-tightened coverage target:
//   delta - sqrt((n_negative_leaves * ln 2 - ln alpha) / (2n)).
// May return a non-positive value; callers decide whether that is an error.
double pac_adjusted_delta(double delta, std::int64_t n_negative_leaves, std::int64_t n,
                          double alpha);

// Re-initializes every leaf to its training majority label (ties negative),
// then flips a low-cost set of negative leaves to +1 until at most a delta
// fraction of instances is left without recourse at budget eps.
// With alpha set, delta is first tightened by pac_adjusted_delta; a
// non-positive tightened value raises InfeasibleError.
ClassificationTree relabel(const ClassificationTree& t, const Dataset& ds, const CostModel& cm,
                           double eps, double delta, std::optional<double> alpha,
                           RelabelReport* report = nullptr);

// Fraction of instances that cannot reach any positive leaf at budget eps.
double empirical_recourse_risk(const ClassificationTree& t, const Dataset& ds,
                               const CostModel& cm, double eps);

}  // namespace ract
