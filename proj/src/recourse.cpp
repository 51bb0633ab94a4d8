#include "ract/recourse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ract {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double half_min_gap(const std::vector<double>& sorted_vals) {
  double gap = kInf;
  for (std::size_t i = 0; i + 1 < sorted_vals.size(); ++i)
    gap = std::min(gap, sorted_vals[i + 1] - sorted_vals[i]);
  return gap == kInf ? kInf : 0.5 * gap;
}

}  // namespace

RecourseContext make_recourse_context(const Dataset& ds, const CostModel& cm) {
  RecourseContext ctx;
  ctx.features = ds.features;
  ThresholdSet thresholds = build_thresholds(ds);

  ctx.nudge.resize(static_cast<std::size_t>(ds.d()), 0.5);
  std::vector<double> vals;
  for (int d = 0; d < ds.d(); ++d) {
    double theta = half_min_gap(thresholds[static_cast<std::size_t>(d)]);
    if (theta == kInf) {
      // fewer than two candidate thresholds; fall back to the value grid
      vals.assign(ds.X.col(d).data(), ds.X.col(d).data() + ds.n());
      std::sort(vals.begin(), vals.end());
      vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
      theta = half_min_gap(vals);
    }
    if (theta != kInf) ctx.nudge[static_cast<std::size_t>(d)] = theta;
  }

  if (cm.kind == CostKind::mps) ctx.snap = cm.quantiles.values;
  return ctx;
}

std::optional<Eigen::VectorXd> project_to_region(const Eigen::VectorXd& x, const Box& region,
                                                 const RecourseContext& ctx) {
  const Eigen::Index dim = x.size();
  if (region.lower.size() != dim || region.upper.size() != dim ||
      static_cast<Eigen::Index>(ctx.features.size()) != dim)
    throw DataError("project_to_region: dimension mismatch");

  Eigen::VectorXd target = x;
  for (Eigen::Index d = 0; d < dim; ++d) {
    const double l = region.lower(d);
    const double u = region.upper(d);
    if (!(l < u)) return std::nullopt;  // empty side
    if (x(d) > l && x(d) <= u) continue;  // inside, zero move on this axis

    const FeatureMeta& m = ctx.features[static_cast<std::size_t>(d)];
    if (m.direction == Direction::fixed) return std::nullopt;

    double t;
    if (x(d) > u) {
      t = u;  // the closed upper face is attainable
    } else {
      // open lower face: step just inside, or onto the next observed value
      t = l + ctx.nudge[static_cast<std::size_t>(d)];
      if (!ctx.snap.empty() && m.kind == FeatureKind::continuous) {
        const auto& vs = ctx.snap[static_cast<std::size_t>(d)];
        auto it = std::upper_bound(vs.begin(), vs.end(), l);
        if (it != vs.end() && *it <= u) t = *it;
      }
      if (t > u) t = u;
    }

    if (m.kind == FeatureKind::continuous) {
      t = std::clamp(t, m.min, m.max);
      if (!(t > l && t <= u)) return std::nullopt;  // bounds push the target out
    } else {
      double int_lo = std::max(std::floor(l) + 1.0, std::ceil(m.min));
      double int_hi = std::min(std::floor(u), std::floor(m.max));
      if (int_lo > int_hi) return std::nullopt;  // no integer inside
      // cheapest valid integer is the one on the side x enters from
      t = x(d) > u ? int_hi : int_lo;
    }

    if (m.direction == Direction::increasing_only && t < x(d)) return std::nullopt;
    target(d) = t;
  }
  return target;
}

namespace {

struct Candidate {
  int tree_index;
  LeafInfo leaf;
};

std::vector<Candidate> positive_leaves(const ClassificationTree& t) {
  std::vector<Candidate> out;
  std::vector<LeafInfo> leaves = enumerate_leaves(t);
  for (LeafInfo& li : leaves)
    if (li.label > 0) out.push_back({0, std::move(li)});
  return out;
}

std::vector<Candidate> positive_leaves(const Forest& f) {
  std::vector<Candidate> out;
  for (std::size_t t = 0; t < f.trees.size(); ++t) {
    std::vector<LeafInfo> leaves = enumerate_leaves(f.trees[t]);
    for (LeafInfo& li : leaves)
      if (li.label > 0) out.push_back({static_cast<int>(t), std::move(li)});
  }
  return out;
}

template <typename Model>
std::optional<Action> extract_one(const Model& model, const std::vector<Candidate>& candidates,
                                  const Eigen::VectorXd& x, const CostModel& cm,
                                  const RecourseContext& ctx) {
  if (predict(model, x) > 0) {
    Action a;
    a.delta = Eigen::VectorXd::Zero(x.size());
    a.cost = 0.0;
    return a;
  }
  std::optional<Action> best;
  for (const Candidate& c : candidates) {
    std::optional<Eigen::VectorXd> target = project_to_region(x, c.leaf.region, ctx);
    if (!target) continue;
    // judge the candidate on x + delta exactly as a consumer applies it;
    // the sum can differ from the projected target by a rounding step
    Eigen::VectorXd delta = *target - x;
    Eigen::VectorXd landed = x + delta;
    bool in_range = true;
    for (Eigen::Index d = 0; d < x.size() && in_range; ++d) {
      const FeatureMeta& m = ctx.features[static_cast<std::size_t>(d)];
      in_range = landed(d) >= m.min && landed(d) <= m.max;
    }
    if (!in_range) continue;
    double cost = action_cost(cm, ctx.features, x, delta);
    if (best && cost >= best->cost) continue;  // cannot improve, skip the model check
    if (predict(model, landed) <= 0) continue;
    Action a;
    a.delta = std::move(delta);
    a.cost = cost;
    a.tree_index = c.tree_index;
    a.leaf_index = c.leaf.leaf_index;
    best = std::move(a);
  }
  return best;
}

template <typename Model>
std::vector<std::optional<Action>> extract_all(const Model& model, const Eigen::MatrixXd& X,
                                               const CostModel& cm, const RecourseContext& ctx) {
  std::vector<Candidate> candidates = positive_leaves(model);
  std::vector<std::optional<Action>> out(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    out[static_cast<std::size_t>(i)] =
        extract_one(model, candidates, X.row(i).transpose(), cm, ctx);
  return out;
}

template <typename Model>
double ratio_impl(const Model& model, const Eigen::MatrixXd& X, const CostModel& cm,
                  const RecourseContext& ctx, double eps, bool negatives_only) {
  std::vector<Candidate> candidates = positive_leaves(model);
  std::int64_t denom = 0, num = 0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    Eigen::VectorXd x = X.row(i).transpose();
    if (predict(model, x) > 0) {
      if (!negatives_only) {
        ++denom;
        ++num;
      }
      continue;
    }
    ++denom;
    std::optional<Action> a = extract_one(model, candidates, x, cm, ctx);
    if (a && a->cost <= eps) ++num;
  }
  if (denom == 0) return 1.0;
  return static_cast<double>(num) / static_cast<double>(denom);
}

}  // namespace

std::optional<Action> extract_action(const ClassificationTree& t, const Eigen::VectorXd& x,
                                     const CostModel& cm, const RecourseContext& ctx) {
  return extract_one(t, positive_leaves(t), x, cm, ctx);
}

std::optional<Action> extract_action(const Forest& f, const Eigen::VectorXd& x,
                                     const CostModel& cm, const RecourseContext& ctx) {
  return extract_one(f, positive_leaves(f), x, cm, ctx);
}

std::vector<std::optional<Action>> extract_actions(const ClassificationTree& t,
                                                   const Eigen::MatrixXd& X, const CostModel& cm,
                                                   const RecourseContext& ctx) {
  return extract_all(t, X, cm, ctx);
}

std::vector<std::optional<Action>> extract_actions(const Forest& f, const Eigen::MatrixXd& X,
                                                   const CostModel& cm,
                                                   const RecourseContext& ctx) {
  return extract_all(f, X, cm, ctx);
}

double recourse_ratio(const ClassificationTree& t, const Eigen::MatrixXd& X, const CostModel& cm,
                      const RecourseContext& ctx, double eps, bool negatives_only) {
  return ratio_impl(t, X, cm, ctx, eps, negatives_only);
}

double recourse_ratio(const Forest& f, const Eigen::MatrixXd& X, const CostModel& cm,
                      const RecourseContext& ctx, double eps, bool negatives_only) {
  return ratio_impl(f, X, cm, ctx, eps, negatives_only);
}

}  // namespace ract
