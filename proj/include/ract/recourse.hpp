#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "ract/cost.hpp"
#include "ract/dataset.hpp"
#include "ract/forest.hpp"
#include "ract/tree.hpp"

namespace ract {

struct Action {
  Eigen::VectorXd delta;  // x + delta flips the model to +1
  double cost = 0.0;
  int tree_index = -1;  // candidate region provenance; -1 for the zero action
  int leaf_index = -1;
};

// Data-derived constants the projection needs: per-feature lower-boundary
// nudges (regions are open below) and, for the percentile cost model, the
// sorted observed values to snap continuous targets onto.
struct RecourseContext {
  std::vector<FeatureMeta> features;
  std::vector<double> nudge;
  std::vector<std::vector<double>> snap;  // empty when no snapping applies
};

RecourseContext make_recourse_context(const Dataset& ds, const CostModel& cm);

// Componentwise median projection of x onto a leaf region: per axis the
// target is median(x_d, lower_d, upper_d), nudged above open lower bounds,
// rounded for integer features and checked against bounds and direction
// constraints. nullopt when some axis cannot be satisfied.
std::optional<Eigen::VectorXd> project_to_region(const Eigen::VectorXd& x, const Box& region,
                                                 const RecourseContext& ctx);

// Cheapest action flipping the prediction to +1, found by projecting onto
// every positive leaf and keeping the least costly candidate the full model
// accepts at the applied point x + delta. Returns the exact zero action when
// the model already says +1.
std::optional<Action> extract_action(const ClassificationTree& t, const Eigen::VectorXd& x,
                                     const CostModel& cm, const RecourseContext& ctx);
std::optional<Action> extract_action(const Forest& f, const Eigen::VectorXd& x,
                                     const CostModel& cm, const RecourseContext& ctx);

// extract_action for every row; rows already predicted positive get the
// zero action (tree_index -1). Candidate regions are enumerated once.
std::vector<std::optional<Action>> extract_actions(const ClassificationTree& t,
                                                   const Eigen::MatrixXd& X, const CostModel& cm,
                                                   const RecourseContext& ctx);
std::vector<std::optional<Action>> extract_actions(const Forest& f, const Eigen::MatrixXd& X,
                                                   const CostModel& cm,
                                                   const RecourseContext& ctx);

// Fraction of rows with recourse at budget eps: predicted positive already,
// or a valid extracted action of cost <= eps. negatives_only restricts both
// numerator and denominator to predicted-negative rows (1.0 when none).
double recourse_ratio(const ClassificationTree& t, const Eigen::MatrixXd& X, const CostModel& cm,
                      const RecourseContext& ctx, double eps, bool negatives_only = false);
double recourse_ratio(const Forest& f, const Eigen::MatrixXd& X, const CostModel& cm,
                      const RecourseContext& ctx, double eps, bool negatives_only = false);

}  // namespace ract
