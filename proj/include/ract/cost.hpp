#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ract/dataset.hpp"

namespace ract {

enum class CostKind { mps, weighted_linf };

// Action cost model. Both variants decompose as a maximum of per-feature
// costs: mps charges the percentile shift |Q_d(x_d + a_d) - Q_d(x_d)|,
// weighted_linf charges w_d * |a_d|.
struct CostModel {
  CostKind kind = CostKind::mps;
  Eigen::VectorXd weights;  // weighted_linf only, one positive weight per feature
  QuantileTable quantiles;  // mps only

  static CostModel make_mps(const Dataset& ds);
  static CostModel make_linf(const Eigen::VectorXd& weights);
};

// Cost contribution of moving feature d from x_d by a_d.
double cost_component(const CostModel& cm, int d, double x_d, double a_d);

// Cost of action a at x. Throws DataError if x + a leaves the feature
// bounds or moves a fixed feature / decreases an increasing-only feature.
double action_cost(const CostModel& cm, const std::vector<FeatureMeta>& features,
                   const Eigen::VectorXd& x, const Eigen::VectorXd& a);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Closed hull [lo, hi] of the values feature d can take from x_d with
// per-feature cost at most eps, honoring kind, bounds and direction.
// Always contains x_d.
Interval reach_interval(const CostModel& cm, const FeatureMeta& meta, int d, double x_d,
                        double eps);

// Per-instance, per-feature reach hulls over a dataset.
struct ReachTable {
  Eigen::MatrixXd lo;  // N x D
  Eigen::MatrixXd hi;  // N x D
};

ReachTable build_reach_table(const CostModel& cm, const Dataset& ds, double eps);

// Indicator that instance n can land left (resp. right) of threshold b on
// feature d: g = I[lo <= b], gbar = I[hi > b].
inline bool indicator_g(const ReachTable& rt, int n, int d, double b) {
  return rt.lo(n, d) <= b;
}
inline bool indicator_gbar(const ReachTable& rt, int n, int d, double b) {
  return rt.hi(n, d) > b;
}

}  // namespace ract
