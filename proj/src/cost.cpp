#include "ract/cost.hpp"

#include <algorithm>
#include <cmath>

namespace ract {

CostModel CostModel::make_mps(const Dataset& ds) {
  CostModel cm;
  cm.kind = CostKind::mps;
  cm.quantiles = build_quantiles(ds);
  return cm;
}

CostModel CostModel::make_linf(const Eigen::VectorXd& weights) {
  for (Eigen::Index d = 0; d < weights.size(); ++d)
    if (!(weights(d) > 0.0)) throw ConfigError("linf weights must be positive");
  CostModel cm;
  cm.kind = CostKind::weighted_linf;
  cm.weights = weights;
  return cm;
}

double cost_component(const CostModel& cm, int d, double x_d, double a_d) {
  if (cm.kind == CostKind::weighted_linf) return cm.weights(d) * std::abs(a_d);
  return std::abs(cm.quantiles.at(d, x_d + a_d) - cm.quantiles.at(d, x_d));
}

double action_cost(const CostModel& cm, const std::vector<FeatureMeta>& features,
                   const Eigen::VectorXd& x, const Eigen::VectorXd& a) {
  if (x.size() != a.size() || x.size() != static_cast<Eigen::Index>(features.size()))
    throw DataError("action_cost: dimension mismatch");
  double worst = 0.0;
  for (Eigen::Index d = 0; d < x.size(); ++d) {
    const FeatureMeta& m = features[static_cast<std::size_t>(d)];
    double target = x(d) + a(d);
    if (a(d) != 0.0 && m.direction == Direction::fixed)
      throw DataError("action moves fixed feature '" + m.name + "'");
    if (a(d) < 0.0 && m.direction == Direction::increasing_only)
      throw DataError("action decreases increasing-only feature '" + m.name + "'");
    if (target < m.min || target > m.max)
      throw DataError("action leaves bounds of feature '" + m.name + "'");
    worst = std::max(worst, cost_component(cm, static_cast<int>(d), x(d), a(d)));
  }
  return worst;
}

Interval reach_interval(const CostModel& cm, const FeatureMeta& meta, int d, double x_d,
                        double eps) {
  if (meta.direction == Direction::fixed) return {x_d, x_d};

  Interval iv;
  if (cm.kind == CostKind::weighted_linf) {
    double r = eps / cm.weights(d);
    iv.lo = std::max(x_d - r, meta.min);
    iv.hi = std::min(x_d + r, meta.max);
    if (meta.kind != FeatureKind::continuous) {
      // only integer targets are realizable; shrink to the integer hull
      iv.lo = std::ceil(iv.lo);
      iv.hi = std::floor(iv.hi);
    }
  } else {
    // contiguous run of observed values within eps of x_d's percentile; the
    // admission predicate must be the same subtraction cost_component performs,
    // or the two can disagree by one ulp at the budget boundary
    const auto& vs = cm.quantiles.values[static_cast<std::size_t>(d)];
    const auto& cs = cm.quantiles.cdf[static_cast<std::size_t>(d)];
    double qx = cm.quantiles.at(d, x_d);
    auto lo_it = std::partition_point(cs.begin(), cs.end(),
                                      [&](double c) { return qx - c > eps; });
    auto hi_it = std::partition_point(cs.begin(), cs.end(),
                                      [&](double c) { return c - qx <= eps; });
    if (lo_it >= hi_it) {
      iv.lo = iv.hi = x_d;  // no observed value within budget
    } else {
      iv.lo = vs[static_cast<std::size_t>(lo_it - cs.begin())];
      iv.hi = vs[static_cast<std::size_t>(hi_it - cs.begin()) - 1];
    }
  }

  // the zero action is always admissible
  iv.lo = std::min(iv.lo, x_d);
  iv.hi = std::max(iv.hi, x_d);
  if (meta.direction == Direction::increasing_only) iv.lo = x_d;
  return iv;
}

ReachTable build_reach_table(const CostModel& cm, const Dataset& ds, double eps) {
  ReachTable rt;
  rt.lo.resize(ds.n(), ds.d());
  rt.hi.resize(ds.n(), ds.d());
  for (int d = 0; d < ds.d(); ++d) {
    const FeatureMeta& m = ds.features[static_cast<std::size_t>(d)];
    for (int n = 0; n < ds.n(); ++n) {
      Interval iv = reach_interval(cm, m, d, ds.X(n, d), eps);
      rt.lo(n, d) = iv.lo;
      rt.hi(n, d) = iv.hi;
    }
  }
  return rt;
}

}  // namespace ract
