#include "ract/relabel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ract {
namespace {

// Per-leaf positive/negative counts of ds routed through the tree,
// indexed like enumerate_leaves.
std::vector<std::pair<std::int64_t, std::int64_t>> count_by_leaf(
    const ClassificationTree& t, const std::vector<LeafInfo>& leaves, const Dataset& ds) {
  std::vector<int> leaf_index_of_node(t.nodes.size(), -1);
  for (const LeafInfo& li : leaves) leaf_index_of_node[static_cast<std::size_t>(li.node_id)] =
      li.leaf_index;
  std::vector<std::pair<std::int64_t, std::int64_t>> counts(leaves.size(), {0, 0});
  for (int n = 0; n < ds.n(); ++n) {
    int node = leaf_node_of(t, ds.instance(n));
    int li = leaf_index_of_node[static_cast<std::size_t>(node)];
    if (ds.y(n) > 0)
      ++counts[static_cast<std::size_t>(li)].first;
    else
      ++counts[static_cast<std::size_t>(li)].second;
  }
  return counts;
}

}  // namespace

CoverInstance build_cover_instance(const ClassificationTree& t, const Dataset& ds,
                                   const ReachTable& rt, double delta) {
  if (delta < 0.0 || delta > 1.0) throw ConfigError("delta must lie in [0,1]");
  const int n = ds.n();
  std::vector<LeafInfo> leaves = enumerate_leaves(t);

  CoverInstance ci;
  ci.n_total = n;
  ci.required = n - static_cast<std::int64_t>(
                        std::floor(static_cast<double>(n) * delta));

  // reachability of every leaf from every instance
  std::vector<std::vector<std::int32_t>> reach_sets(leaves.size());
  std::vector<std::uint8_t> covered(static_cast<std::size_t>(n), 0);
  for (const LeafInfo& li : leaves) {
    auto& set = reach_sets[static_cast<std::size_t>(li.leaf_index)];
    for (int i = 0; i < n; ++i)
      if (region_reachable(rt, i, li.region)) set.push_back(i);
    if (li.label > 0)
      for (std::int32_t i : set) covered[static_cast<std::size_t>(i)] = 1;
  }
  for (std::uint8_t c : covered) ci.covered_upfront += c;

  std::vector<std::pair<std::int64_t, std::int64_t>> counts = count_by_leaf(t, leaves, ds);
  for (const LeafInfo& li : leaves) {
    if (li.label > 0) continue;
    const auto& [pos, neg] = counts[static_cast<std::size_t>(li.leaf_index)];
    ci.candidate_leaves.push_back(li.leaf_index);
    ci.weights.push_back(neg - pos);
    std::vector<std::int32_t> residual;
    for (std::int32_t i : reach_sets[static_cast<std::size_t>(li.leaf_index)])
      if (!covered[static_cast<std::size_t>(i)]) residual.push_back(i);
    ci.reach_sets.push_back(std::move(residual));
  }
  return ci;
}

GreedyCoverResult greedy_cover(const CoverInstance& ci) {
  GreedyCoverResult res;
  res.covered = ci.covered_upfront;

  std::vector<std::uint8_t> covered(static_cast<std::size_t>(ci.n_total), 0);
  std::vector<std::uint8_t> used(ci.candidate_leaves.size(), 0);

  auto gain_of = [&](std::size_t c) {
    std::int64_t g = 0;
    for (std::int32_t i : ci.reach_sets[c])
      if (!covered[static_cast<std::size_t>(i)]) ++g;
    return g;
  };

  while (res.covered < ci.required) {
    std::ptrdiff_t pick = -1;
    std::int64_t pick_gain = 0;

    // free flips first: zero or negative weight, any positive gain
    for (std::size_t c = 0; c < ci.candidate_leaves.size() && pick < 0; ++c) {
      if (used[c] || ci.weights[c] > 0) continue;
      std::int64_t g = gain_of(c);
      if (g > 0) {
        pick = static_cast<std::ptrdiff_t>(c);
        pick_gain = g;
      }
    }

    // otherwise the candidate maximizing gain/weight, exact arithmetic,
    // ties to the lowest leaf index
    if (pick < 0) {
      for (std::size_t c = 0; c < ci.candidate_leaves.size(); ++c) {
        if (used[c] || ci.weights[c] <= 0) continue;
        std::int64_t g = gain_of(c);
        if (g <= 0) continue;
        if (pick < 0 || g * ci.weights[static_cast<std::size_t>(pick)] >
                            pick_gain * ci.weights[c]) {
          pick = static_cast<std::ptrdiff_t>(c);
          pick_gain = g;
        }
      }
    }

    if (pick < 0)
      throw InfeasibleError("cover target unreachable: no remaining candidate adds coverage");

    used[static_cast<std::size_t>(pick)] = 1;
    for (std::int32_t i : ci.reach_sets[static_cast<std::size_t>(pick)]) {
      if (!covered[static_cast<std::size_t>(i)]) {
        covered[static_cast<std::size_t>(i)] = 1;
        ++res.covered;
      }
    }
    res.weight_sum += ci.weights[static_cast<std::size_t>(pick)];
    res.chosen.push_back(static_cast<int>(pick));
    ++res.iterations;
  }
  return res;
}

double pac_adjusted_delta(double delta, std::int64_t n_negative_leaves, std::int64_t n,
                          double alpha) {
  const double slack =
      std::sqrt((static_cast<double>(n_negative_leaves) * std::log(2.0) - std::log(alpha)) /
                (2.0 * static_cast<double>(n)));
  return delta - slack;
}

ClassificationTree relabel(const ClassificationTree& t, const Dataset& ds, const CostModel& cm,
                           double eps, double delta, std::optional<double> alpha,
                           RelabelReport* report) {
  if (delta < 0.0 || delta > 1.0) throw ConfigError("delta must lie in [0,1]");
  if (eps < 0.0) throw ConfigError("epsilon must be non-negative");
  if (alpha && (*alpha <= 0.0 || *alpha >= 1.0))
    throw ConfigError("alpha must lie in (0,1)");

  ClassificationTree out = t;
  std::vector<LeafInfo> leaves = enumerate_leaves(out);
  std::vector<std::pair<std::int64_t, std::int64_t>> counts = count_by_leaf(out, leaves, ds);

  // majority re-initialization, ties negative
  std::int64_t neg_leaves = 0;
  for (const LeafInfo& li : leaves) {
    const auto& [pos, neg] = counts[static_cast<std::size_t>(li.leaf_index)];
    TreeNode& nd = out.nodes[static_cast<std::size_t>(li.node_id)];
    nd.label = pos > neg ? +1 : -1;
    nd.n_pos = pos;
    nd.n_neg = neg;
    if (nd.label < 0) ++neg_leaves;
  }

  double delta_eff = delta;
  if (alpha) {
    delta_eff = pac_adjusted_delta(delta, neg_leaves, ds.n(), *alpha);
    if (delta_eff <= 0.0) {
      std::ostringstream msg;
      msg << "confidence-adjusted recourse target is infeasible: delta " << delta
          << " shrinks to " << delta_eff << " at alpha " << *alpha;
      throw InfeasibleError(msg.str());
    }
  }

  ReachTable rt = build_reach_table(cm, ds, eps);
  CoverInstance ci = build_cover_instance(out, ds, rt, delta_eff);
  GreedyCoverResult res = greedy_cover(ci);

  std::vector<int> flipped;
  for (int pos : res.chosen)
    flipped.push_back(ci.candidate_leaves[static_cast<std::size_t>(pos)]);
  std::sort(flipped.begin(), flipped.end());
  for (int leaf_index : flipped)
    out.nodes[static_cast<std::size_t>(leaves[static_cast<std::size_t>(leaf_index)].node_id)]
        .label = +1;

  if (report) {
    report->flipped_leaves = flipped;
    report->coverage = static_cast<double>(res.covered) / static_cast<double>(ci.n_total);
    report->risk_increase =
        static_cast<double>(res.weight_sum) / static_cast<double>(ci.n_total);
    report->delta_effective = delta_eff;
    report->iterations = res.iterations;
  }
  return out;
}

double empirical_recourse_risk(const ClassificationTree& t, const Dataset& ds,
                               const CostModel& cm, double eps) {
  ReachTable rt = build_reach_table(cm, ds, eps);
  std::vector<LeafInfo> leaves = enumerate_leaves(t);
  std::int64_t without = 0;
  for (int n = 0; n < ds.n(); ++n) {
    bool ok = false;
    for (const LeafInfo& li : leaves) {
      if (li.label > 0 && region_reachable(rt, n, li.region)) {
        ok = true;
        break;
      }
    }
    if (!ok) ++without;
  }
  return static_cast<double>(without) / static_cast<double>(ds.n());
}

}  // namespace ract
