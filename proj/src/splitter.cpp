#include "ract/splitter.hpp"

#include <algorithm>
#include <cmath>

#include "ract/rng.hpp"

namespace ract {

namespace {

// Candidate child label pairs, in fixed enumeration order.
constexpr int kPairs[4][2] = {{-1, -1}, {+1, -1}, {-1, +1}, {+1, +1}};

}  // namespace

TreeBuilder::TreeBuilder(const Dataset& ds, const CostModel& cm, const GrowConfig& cfg,
                         const TrainOptions& opts)
    : ds_(ds), cfg_(cfg), opts_(opts) {
  if (ds.n() < 1) throw ConfigError("training data is empty");
  if (cfg.lambda < 0.0) throw ConfigError("lambda must be non-negative");
  if (cfg.epsilon < 0.0) throw ConfigError("epsilon must be non-negative");
  if (cfg.max_depth < 1) throw ConfigError("max_depth must be at least 1");
  if (cfg.min_samples_leaf < 1) throw ConfigError("min_samples_leaf must be at least 1");
  if (cfg.min_impurity_decrease < 0.0)
    throw ConfigError("min_impurity_decrease must be non-negative");

  const int n = ds.n();
  const int d = ds.d();

  if (opts_.feature_pool.empty()) {
    opts_.feature_pool.resize(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) opts_.feature_pool[static_cast<std::size_t>(j)] = j;
  } else {
    std::sort(opts_.feature_pool.begin(), opts_.feature_pool.end());
    opts_.feature_pool.erase(
        std::unique(opts_.feature_pool.begin(), opts_.feature_pool.end()),
        opts_.feature_pool.end());
    for (int j : opts_.feature_pool)
      if (j < 0 || j >= d) throw ConfigError("feature pool index out of range");
  }

  thresholds_ = build_thresholds(ds);
  reach_ = build_reach_table(cm, ds, cfg.epsilon);

  SortPermutations by_x = sort_permutations(ds);
  orders_.resize(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    FeatureOrder& fo = orders_[static_cast<std::size_t>(j)];
    fo.by_x = std::move(by_x[static_cast<std::size_t>(j)]);
    fo.by_lo.resize(static_cast<std::size_t>(n));
    fo.by_hi.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      fo.by_lo[static_cast<std::size_t>(i)] = i;
      fo.by_hi[static_cast<std::size_t>(i)] = i;
    }
    std::stable_sort(fo.by_lo.begin(), fo.by_lo.end(), [&](std::int32_t a, std::int32_t b) {
      return reach_.lo(a, j) < reach_.lo(b, j);
    });
    std::stable_sort(fo.by_hi.begin(), fo.by_hi.end(), [&](std::int32_t a, std::int32_t b) {
      return reach_.hi(a, j) < reach_.hi(b, j);
    });
  }

  std::int64_t n_pos = 0;
  for (int i = 0; i < n; ++i)
    if (ds.y(i) > 0) ++n_pos;
  std::int64_t n_neg = n - n_pos;

  TreeNode root;
  root.is_leaf = true;
  root.label = n_pos > n_neg ? +1 : -1;  // ties negative
  root.n_pos = n_pos;
  root.n_neg = n_neg;
  tree_.n_features = d;
  tree_.nodes.push_back(root);

  leaf_of_.assign(static_cast<std::size_t>(n), 0);
  reach_by_.resize(1);
  reach_by_[0].assign(static_cast<std::size_t>(n), 1);
  V_.assign(static_cast<std::size_t>(n), root.label > 0 ? 1 : 0);
  risk_num_ = root.label > 0 ? n_neg : n_pos;
  omega_.assign(static_cast<std::size_t>(n), 0);
  rng_.seed(cfg.seed);
}

std::int64_t TreeBuilder::misclassified_in(int node_id) const {
  const TreeNode& nd = tree_.nodes[static_cast<std::size_t>(node_id)];
  return nd.label > 0 ? nd.n_neg : nd.n_pos;
}

const std::vector<std::uint8_t>& TreeBuilder::reachable_mask(int node_id) const {
  if (node_id < 0 || static_cast<std::size_t>(node_id) >= reach_by_.size() ||
      !tree_.nodes[static_cast<std::size_t>(node_id)].is_leaf)
    throw ConfigError("reachable_mask: not a live leaf");
  return reach_by_[static_cast<std::size_t>(node_id)];
}

std::vector<std::uint8_t> TreeBuilder::singled_out_mask(int node_id) const {
  const auto& v_i = reachable_mask(node_id);
  int label_i = tree_.nodes[static_cast<std::size_t>(node_id)].label;
  std::vector<std::uint8_t> w(v_i.size());
  for (std::size_t n = 0; n < v_i.size(); ++n) {
    std::int32_t rest = V_[n] - (label_i > 0 ? v_i[n] : 0);
    w[n] = rest == 0 ? 1 : 0;
  }
  return w;
}

std::int64_t TreeBuilder::recourse_numerator() const {
  std::int64_t m = 0;
  for (std::int32_t v : V_)
    if (v == 0) ++m;
  return m;
}

double TreeBuilder::objective() const {
  return (static_cast<double>(risk_num_) +
          cfg_.lambda * static_cast<double>(recourse_numerator())) /
         static_cast<double>(ds_.n());
}

std::vector<int> TreeBuilder::node_candidate_features(int /*node_id*/) {
  if (opts_.max_features <= 0 ||
      static_cast<std::size_t>(opts_.max_features) >= opts_.feature_pool.size())
    return opts_.feature_pool;
  std::vector<int> picks = rng::sample_without_replacement(
      static_cast<int>(opts_.feature_pool.size()), opts_.max_features, rng_);
  for (int& p : picks) p = opts_.feature_pool[static_cast<std::size_t>(p)];
  return picks;  // ascending because the pool is sorted
}

// One monotone pass over feature d: the x cursor maintains the node's class
// counts left of b, the lo cursor grows sum(omega*v*g) and the hi cursor
// shrinks sum(omega*v*gbar). All three orderings were sorted up front, so the
// whole scan is linear in N plus the number of candidate thresholds.
void TreeBuilder::scan_feature(int node_id, int d, std::int64_t mis_elsewhere, std::int64_t m,
                               std::int64_t m_reach, SplitDecision& best, bool& found) const {
  const auto& thresholds = thresholds_[static_cast<std::size_t>(d)];
  if (thresholds.empty()) return;

  const TreeNode& nd = tree_.nodes[static_cast<std::size_t>(node_id)];
  const auto& v_i = reach_by_[static_cast<std::size_t>(node_id)];
  const FeatureOrder& fo = orders_[static_cast<std::size_t>(d)];
  const int n = ds_.n();
  const double inv_n = 1.0 / static_cast<double>(n);
  const std::int64_t n_pos = nd.n_pos;
  const std::int64_t n_neg = nd.n_neg;
  const std::int64_t msl = cfg_.min_samples_leaf;

  std::size_t cx = 0, clo = 0, chi = 0;
  std::int64_t nl_pos = 0, nl_neg = 0;  // node instances left of b
  std::int64_t m_left_acc = 0;          // Σ ω v g
  std::int64_t m_right_acc = m_reach;   // Σ ω v gbar

  for (double b : thresholds) {
    while (cx < static_cast<std::size_t>(n) && ds_.X(fo.by_x[cx], d) <= b) {
      std::int32_t i = fo.by_x[cx];
      if (leaf_of_[static_cast<std::size_t>(i)] == node_id) {
        if (ds_.y(i) > 0)
          ++nl_pos;
        else
          ++nl_neg;
      }
      ++cx;
    }
    while (clo < static_cast<std::size_t>(n) && reach_.lo(fo.by_lo[clo], d) <= b) {
      std::int32_t i = fo.by_lo[clo];
      if (omega_[static_cast<std::size_t>(i)] && v_i[static_cast<std::size_t>(i)]) ++m_left_acc;
      ++clo;
    }
    while (chi < static_cast<std::size_t>(n) && reach_.hi(fo.by_hi[chi], d) <= b) {
      std::int32_t i = fo.by_hi[chi];
      if (omega_[static_cast<std::size_t>(i)] && v_i[static_cast<std::size_t>(i)]) --m_right_acc;
      ++chi;
    }

    const std::int64_t nr_pos = n_pos - nl_pos;
    const std::int64_t nr_neg = n_neg - nl_neg;
    if (nl_pos + nl_neg < msl || nr_pos + nr_neg < msl) continue;

    const std::int64_t risk_nums[4] = {
        n_pos + mis_elsewhere,            // (-,-): every positive in the node is wrong
        nl_neg + nr_pos + mis_elsewhere,  // (+,-)
        nl_pos + nr_neg + mis_elsewhere,  // (-,+)
        n_neg + mis_elsewhere,            // (+,+)
    };
    const std::int64_t rec_nums[4] = {
        m,                     // (-,-): nobody gains a positive leaf here
        m - m_left_acc,        // (+,-): reach the left child
        m - m_right_acc,       // (-,+): reach the right child
        m - m_reach,           // (+,+): reach either child
    };

    for (int k = 0; k < 4; ++k) {
      double phi = (static_cast<double>(risk_nums[k]) +
                    cfg_.lambda * static_cast<double>(rec_nums[k])) *
                   inv_n;
      if (found && !(phi < best.objective)) continue;
      best.feature = d;
      best.threshold = b;
      best.label_left = kPairs[k][0];
      best.label_right = kPairs[k][1];
      best.objective = phi;
      best.risk_num = risk_nums[k];
      best.recourse_num = rec_nums[k];
      best.n_pos_left = nl_pos;
      best.n_neg_left = nl_neg;
      best.n_pos_right = nr_pos;
      best.n_neg_right = nr_neg;
      found = true;
    }
  }
}

std::optional<SplitDecision> TreeBuilder::best_split(int node_id) {
  if (node_id < 0 || static_cast<std::size_t>(node_id) >= tree_.nodes.size() ||
      !tree_.nodes[static_cast<std::size_t>(node_id)].is_leaf)
    throw ConfigError("best_split: not a leaf");

  const TreeNode& nd = tree_.nodes[static_cast<std::size_t>(node_id)];
  const auto& v_i = reach_by_[static_cast<std::size_t>(node_id)];
  const int n = ds_.n();
  const int label_i = nd.label;

  // omega: instances with no reachable positive leaf besides (possibly) this one
  std::int64_t m = 0, m_reach = 0;
  for (int i = 0; i < n; ++i) {
    std::int32_t rest = V_[static_cast<std::size_t>(i)] -
                        (label_i > 0 ? v_i[static_cast<std::size_t>(i)] : 0);
    std::uint8_t w = rest == 0 ? 1 : 0;
    omega_[static_cast<std::size_t>(i)] = w;
    if (w) {
      ++m;
      m_reach += v_i[static_cast<std::size_t>(i)];
    }
  }

  const std::int64_t mis_elsewhere = risk_num_ - misclassified_in(node_id);
  const std::int64_t risk_unsplit =
      (label_i > 0 ? nd.n_neg : nd.n_pos) + mis_elsewhere;
  const std::int64_t rec_unsplit = label_i > 0 ? m - m_reach : m;
  const double phi_unsplit = (static_cast<double>(risk_unsplit) +
                              cfg_.lambda * static_cast<double>(rec_unsplit)) *
                             (1.0 / static_cast<double>(n));

  SplitDecision best;
  bool found = false;
  for (int d : node_candidate_features(node_id))
    scan_feature(node_id, d, mis_elsewhere, m, m_reach, best, found);
  if (!found) return std::nullopt;

  const double improvement = phi_unsplit - best.objective;
  if (!(improvement > 0.0)) return std::nullopt;
  if (improvement < cfg_.min_impurity_decrease) return std::nullopt;
  return best;
}

void TreeBuilder::apply_split(int node_id, const SplitDecision& dec) {
  if (node_id < 0 || static_cast<std::size_t>(node_id) >= tree_.nodes.size() ||
      !tree_.nodes[static_cast<std::size_t>(node_id)].is_leaf)
    throw ConfigError("apply_split: not a leaf");

  const int n = ds_.n();
  const int d = dec.feature;
  const double b = dec.threshold;
  const int label_i = tree_.nodes[static_cast<std::size_t>(node_id)].label;

  const int left = static_cast<int>(tree_.nodes.size());
  const int right = left + 1;

  TreeNode ln, rn;
  ln.is_leaf = true;
  ln.label = dec.label_left;
  ln.n_pos = dec.n_pos_left;
  ln.n_neg = dec.n_neg_left;
  rn.is_leaf = true;
  rn.label = dec.label_right;
  rn.n_pos = dec.n_pos_right;
  rn.n_neg = dec.n_neg_right;

  risk_num_ -= misclassified_in(node_id);
  tree_.nodes.push_back(ln);
  tree_.nodes.push_back(rn);
  risk_num_ += misclassified_in(left) + misclassified_in(right);

  TreeNode& parent = tree_.nodes[static_cast<std::size_t>(node_id)];
  parent.is_leaf = false;
  parent.feature = d;
  parent.threshold = b;
  parent.left = left;
  parent.right = right;

  reach_by_.resize(static_cast<std::size_t>(right) + 1);
  std::vector<std::uint8_t> v_parent = std::move(reach_by_[static_cast<std::size_t>(node_id)]);
  reach_by_[static_cast<std::size_t>(node_id)].clear();
  reach_by_[static_cast<std::size_t>(node_id)].shrink_to_fit();

  std::vector<std::uint8_t> vl(static_cast<std::size_t>(n)), vr(static_cast<std::size_t>(n));
  const int dl = dec.label_left > 0 ? 1 : 0;
  const int dr = dec.label_right > 0 ? 1 : 0;
  const int di = label_i > 0 ? 1 : 0;
  for (int i = 0; i < n; ++i) {
    const std::uint8_t vp = v_parent[static_cast<std::size_t>(i)];
    const std::uint8_t gl = vp && reach_.lo(i, d) <= b;
    const std::uint8_t gr = vp && reach_.hi(i, d) > b;
    vl[static_cast<std::size_t>(i)] = gl;
    vr[static_cast<std::size_t>(i)] = gr;
    V_[static_cast<std::size_t>(i)] += -di * vp + dl * gl + dr * gr;
    if (leaf_of_[static_cast<std::size_t>(i)] == node_id)
      leaf_of_[static_cast<std::size_t>(i)] = ds_.X(i, d) <= b ? left : right;
  }
  reach_by_[static_cast<std::size_t>(left)] = std::move(vl);
  reach_by_[static_cast<std::size_t>(right)] = std::move(vr);
}

ClassificationTree TreeBuilder::grow(const SplitObserver& observer) {
  std::function<void(int, int)> visit = [&](int node_id, int depth) {
    if (depth >= cfg_.max_depth) return;
    {
      const TreeNode& nd = tree_.nodes[static_cast<std::size_t>(node_id)];
      if (nd.n_pos == 0 || nd.n_neg == 0) return;  // pure
      if (nd.n_pos + nd.n_neg < 2 * cfg_.min_samples_leaf) return;
    }
    std::optional<SplitDecision> dec = best_split(node_id);
    if (!dec) return;
    apply_split(node_id, *dec);
    if (observer) observer(*this, node_id, *dec);
    const int left = tree_.nodes[static_cast<std::size_t>(node_id)].left;
    const int right = tree_.nodes[static_cast<std::size_t>(node_id)].right;
    visit(left, depth + 1);
    visit(right, depth + 1);
  };
  visit(0, 0);
  return tree_;
}

ClassificationTree grow_tree(const Dataset& ds, const CostModel& cm, const GrowConfig& cfg,
                             const TrainOptions& opts) {
  TreeBuilder builder(ds, cm, cfg, opts);
  return builder.grow();
}

}  // namespace ract
