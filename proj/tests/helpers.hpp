#pragma once

// Shared test utilities: in-memory dataset construction, random problem
// generators, and independent reference implementations used as oracles.
// The oracles deliberately avoid the library's incremental bookkeeping and
// recompute everything from definitions.

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "ract/cost.hpp"
#include "ract/dataset.hpp"
#include "ract/relabel.hpp"
#include "ract/rng.hpp"
#include "ract/splitter.hpp"
#include "ract/tree.hpp"

namespace testutil {

// ---------------------------------------------------------------------------
// dataset construction

inline ract::FeatureMeta feat(std::string name, ract::FeatureKind kind, double lo, double hi,
                              ract::Direction dir = ract::Direction::free) {
  ract::FeatureMeta m;
  m.name = std::move(name);
  m.kind = kind;
  m.min = lo;
  m.max = hi;
  m.direction = dir;
  m.immutable = dir == ract::Direction::fixed;
  return m;
}

inline ract::Dataset make_dataset(const std::vector<std::vector<double>>& rows,
                                  const std::vector<int>& labels,
                                  std::vector<ract::FeatureMeta> metas) {
  ract::Dataset ds;
  ds.features = std::move(metas);
  ds.X.resize(static_cast<Eigen::Index>(rows.size()),
              static_cast<Eigen::Index>(ds.features.size()));
  ds.y.resize(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t d = 0; d < rows[i].size(); ++d)
      ds.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = rows[i][d];
    ds.y(static_cast<Eigen::Index>(i)) = labels[i];
  }
  return ds;
}

// Columns of mixed kinds and movement constraints with a noisy linear label.
// Guarantees at least one mutable feature and both classes.
struct RandomDataConfig {
  int n = 60;
  int d = 3;
  bool allow_immutable = true;
  bool allow_integer = true;
  bool allow_binary = true;
};

inline ract::Dataset random_dataset(std::mt19937_64& gen, const RandomDataConfig& cfg = {}) {
  namespace rng = ract::rng;
  std::vector<ract::FeatureMeta> metas;
  for (int d = 0; d < cfg.d; ++d) {
    ract::FeatureKind kind = ract::FeatureKind::continuous;
    double roll = rng::uniform01(gen);
    if (cfg.allow_integer && roll < 0.3)
      kind = ract::FeatureKind::integer;
    else if (cfg.allow_binary && roll < 0.45)
      kind = ract::FeatureKind::binary;

    double lo = 0.0, hi = 1.0;
    if (kind == ract::FeatureKind::continuous) hi = 1.0 + rng::uniform01(gen);
    if (kind == ract::FeatureKind::integer) hi = 4.0 + static_cast<double>(rng::bounded(gen, 8));

    ract::Direction dir = ract::Direction::free;
    double droll = rng::uniform01(gen);
    if (d > 0 && cfg.allow_immutable && droll < 0.25)
      dir = ract::Direction::fixed;
    else if (droll < 0.45)
      dir = ract::Direction::increasing_only;

    metas.push_back(feat("f" + std::to_string(d), kind, lo, hi, dir));
  }

  Eigen::VectorXd w(cfg.d);
  for (int d = 0; d < cfg.d; ++d) w(d) = 2.0 * rng::uniform01(gen) - 1.0;

  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::vector<double> margins;
  for (int i = 0; i < cfg.n; ++i) {
    std::vector<double> row(static_cast<std::size_t>(cfg.d));
    double margin = 0.0;
    for (int d = 0; d < cfg.d; ++d) {
      const ract::FeatureMeta& m = metas[static_cast<std::size_t>(d)];
      double v = m.min + rng::uniform01(gen) * (m.max - m.min);
      if (m.kind != ract::FeatureKind::continuous)
        v = std::floor(v + 0.5);
      else if (rng::uniform01(gen) < 0.3)
        v = std::round(v * 10.0) / 10.0;  // inject ties
      v = std::clamp(v, m.min, m.max);
      row[static_cast<std::size_t>(d)] = v;
      margin += w(d) * (v - 0.5 * (m.min + m.max));
    }
    margins.push_back(margin + 0.3 * (rng::uniform01(gen) - 0.5));
    rows.push_back(std::move(row));
  }
  double pivot = margins[margins.size() / 2];
  for (double m : margins) labels.push_back(m > pivot ? +1 : -1);

  bool has_pos = false, has_neg = false;
  for (int l : labels) (l > 0 ? has_pos : has_neg) = true;
  if (!has_pos) labels.front() = +1;
  if (!has_neg) labels.back() = -1;
  return make_dataset(rows, labels, std::move(metas));
}

inline ract::CostModel random_cost_model(std::mt19937_64& gen, const ract::Dataset& ds) {
  if (ract::rng::bounded(gen, 2) == 0) return ract::CostModel::make_mps(ds);
  Eigen::VectorXd w(ds.d());
  for (int d = 0; d < ds.d(); ++d) w(d) = 0.25 + 3.75 * ract::rng::uniform01(gen);
  return ract::CostModel::make_linf(w);
}

// ---------------------------------------------------------------------------
// exhaustive split search, evaluated from definitions only

struct OracleSplit {
  int feature = -1;
  double threshold = 0.0;
  int label_left = -1;
  int label_right = -1;
  double objective = 0.0;
  std::int64_t risk_num = 0;
  std::int64_t recourse_num = 0;
};

// Scores every (feature, threshold, child labels) candidate for the given
// leaf of `tree` by routing all instances through the tree and intersecting
// reach hulls with leaf regions from scratch. Enumeration order and the
// floating-point objective expression match the production search, so the
// comparison can demand bitwise-equal objectives.
inline std::optional<OracleSplit> oracle_best_split(const ract::Dataset& ds,
                                                    const ract::CostModel& cm,
                                                    const ract::GrowConfig& cfg,
                                                    const ract::ClassificationTree& tree,
                                                    int node_id) {
  const int n = ds.n();
  const double inv_n = 1.0 / static_cast<double>(n);
  ract::ReachTable rt = ract::build_reach_table(cm, ds, cfg.epsilon);
  std::vector<ract::LeafInfo> leaves = ract::enumerate_leaves(tree);

  const ract::LeafInfo* node = nullptr;
  for (const ract::LeafInfo& li : leaves)
    if (li.node_id == node_id) node = &li;
  if (!node) throw std::runtime_error("oracle_best_split: node is not a leaf");

  std::vector<std::uint8_t> member(static_cast<std::size_t>(n), 0);
  std::vector<std::uint8_t> rest_positive(static_cast<std::size_t>(n), 0);  // reachable + leaf elsewhere
  std::vector<std::uint8_t> v_node(static_cast<std::size_t>(n), 0);
  std::int64_t mis_total = 0, mis_node = 0, node_pos = 0, node_neg = 0;

  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd x = ds.instance(i);
    int at = ract::leaf_node_of(tree, x);
    member[static_cast<std::size_t>(i)] = at == node_id;
    int label_at = tree.nodes[static_cast<std::size_t>(at)].label;
    if (label_at != ds.y(i)) ++mis_total;
    if (at == node_id) {
      if (label_at != ds.y(i)) ++mis_node;
      (ds.y(i) > 0 ? node_pos : node_neg) += 1;
    }
    for (const ract::LeafInfo& li : leaves)
      if (li.node_id != node_id && li.label > 0 && ract::region_reachable(rt, i, li.region)) {
        rest_positive[static_cast<std::size_t>(i)] = 1;
        break;
      }
    v_node[static_cast<std::size_t>(i)] = ract::region_reachable(rt, i, node->region);
  }

  const std::int64_t mis_elsewhere = mis_total - mis_node;
  const int node_label = tree.nodes[static_cast<std::size_t>(node_id)].label;
  std::int64_t rec_unsplit = 0;
  for (int i = 0; i < n; ++i)
    if (!rest_positive[static_cast<std::size_t>(i)] &&
        !(node_label > 0 && v_node[static_cast<std::size_t>(i)]))
      ++rec_unsplit;
  const double phi_unsplit =
      (static_cast<double>(mis_total) + cfg.lambda * static_cast<double>(rec_unsplit)) *
      (1.0 / static_cast<double>(n));

  constexpr int pairs[4][2] = {{-1, -1}, {+1, -1}, {-1, +1}, {+1, +1}};
  ract::ThresholdSet thresholds = ract::build_thresholds(ds);

  OracleSplit best;
  bool found = false;
  for (int d = 0; d < ds.d(); ++d) {
    for (double b : thresholds[static_cast<std::size_t>(d)]) {
      std::int64_t nl_pos = 0, nl_neg = 0;
      std::int64_t m = 0, m_left = 0, m_right = 0, m_either = 0;
      for (int i = 0; i < n; ++i) {
        if (member[static_cast<std::size_t>(i)] && ds.X(i, d) <= b)
          (ds.y(i) > 0 ? nl_pos : nl_neg) += 1;
        if (rest_positive[static_cast<std::size_t>(i)]) continue;
        ++m;
        if (!v_node[static_cast<std::size_t>(i)]) continue;
        bool left = rt.lo(i, d) <= b;
        bool right = rt.hi(i, d) > b;
        if (left) ++m_left;
        if (right) ++m_right;
        if (left || right) ++m_either;
      }
      const std::int64_t nr_pos = node_pos - nl_pos;
      const std::int64_t nr_neg = node_neg - nl_neg;
      if (nl_pos + nl_neg < cfg.min_samples_leaf || nr_pos + nr_neg < cfg.min_samples_leaf)
        continue;

      const std::int64_t risk_nums[4] = {
          node_pos + mis_elsewhere,
          nl_neg + nr_pos + mis_elsewhere,
          nl_pos + nr_neg + mis_elsewhere,
          node_neg + mis_elsewhere,
      };
      const std::int64_t rec_nums[4] = {m, m - m_left, m - m_right, m - m_either};

      for (int k = 0; k < 4; ++k) {
        double phi = (static_cast<double>(risk_nums[k]) +
                      cfg.lambda * static_cast<double>(rec_nums[k])) *
                     inv_n;
        if (found && !(phi < best.objective)) continue;
        best.feature = d;
        best.threshold = b;
        best.label_left = pairs[k][0];
        best.label_right = pairs[k][1];
        best.objective = phi;
        best.risk_num = risk_nums[k];
        best.recourse_num = rec_nums[k];
        found = true;
      }
    }
  }
  if (!found) return std::nullopt;
  const double improvement = phi_unsplit - best.objective;
  if (!(improvement > 0.0)) return std::nullopt;
  if (improvement < cfg.min_impurity_decrease) return std::nullopt;
  return best;
}

// ---------------------------------------------------------------------------
// reference 0-1-loss greedy learner (no recourse machinery at all)

inline ract::ClassificationTree reference_zero_one_tree(const ract::Dataset& ds, int max_depth,
                                                        int min_samples_leaf) {
  constexpr int pairs[4][2] = {{-1, -1}, {+1, -1}, {-1, +1}, {+1, +1}};
  ract::ThresholdSet thresholds = ract::build_thresholds(ds);

  ract::ClassificationTree tree;
  tree.n_features = ds.d();

  struct Frame {
    int node_id;
    std::vector<int> rows;
    int depth;
  };

  auto counts_of = [&](const std::vector<int>& rows) {
    std::pair<std::int64_t, std::int64_t> c{0, 0};
    for (int i : rows) (ds.y(i) > 0 ? c.first : c.second) += 1;
    return c;
  };

  // root leaf
  {
    auto [pos, neg] = counts_of([&] {
      std::vector<int> all(static_cast<std::size_t>(ds.n()));
      for (int i = 0; i < ds.n(); ++i) all[static_cast<std::size_t>(i)] = i;
      return all;
    }());
    ract::TreeNode root;
    root.is_leaf = true;
    root.label = pos > neg ? +1 : -1;
    root.n_pos = pos;
    root.n_neg = neg;
    tree.nodes.push_back(root);
  }

  std::function<void(int, std::vector<int>, int)> split_rec = [&](int node_id,
                                                                  std::vector<int> rows,
                                                                  int depth) {
    ract::TreeNode& nd = tree.nodes[static_cast<std::size_t>(node_id)];
    if (depth >= max_depth) return;
    if (nd.n_pos == 0 || nd.n_neg == 0) return;
    if (nd.n_pos + nd.n_neg < 2 * min_samples_leaf) return;

    const std::int64_t risk_unsplit = nd.label > 0 ? nd.n_neg : nd.n_pos;
    bool found = false;
    std::int64_t best_risk = 0;
    int best_d = -1, best_k = -1;
    double best_b = 0.0;
    std::int64_t best_nl_pos = 0, best_nl_neg = 0;

    for (int d = 0; d < ds.d(); ++d) {
      for (double b : thresholds[static_cast<std::size_t>(d)]) {
        std::int64_t nl_pos = 0, nl_neg = 0;
        for (int i : rows)
          if (ds.X(i, d) <= b) (ds.y(i) > 0 ? nl_pos : nl_neg) += 1;
        const std::int64_t nr_pos = nd.n_pos - nl_pos;
        const std::int64_t nr_neg = nd.n_neg - nl_neg;
        if (nl_pos + nl_neg < min_samples_leaf || nr_pos + nr_neg < min_samples_leaf) continue;
        const std::int64_t risks[4] = {nd.n_pos, nl_neg + nr_pos, nl_pos + nr_neg, nd.n_neg};
        for (int k = 0; k < 4; ++k) {
          if (found && risks[k] >= best_risk) continue;
          found = true;
          best_risk = risks[k];
          best_d = d;
          best_b = b;
          best_k = k;
          best_nl_pos = nl_pos;
          best_nl_neg = nl_neg;
        }
      }
    }
    if (!found || best_risk >= risk_unsplit) return;

    std::vector<int> left_rows, right_rows;
    for (int i : rows) (ds.X(i, best_d) <= best_b ? left_rows : right_rows).push_back(i);

    const int left = static_cast<int>(tree.nodes.size());
    const int right = left + 1;
    ract::TreeNode ln, rn;
    ln.is_leaf = true;
    ln.label = pairs[best_k][0];
    ln.n_pos = best_nl_pos;
    ln.n_neg = best_nl_neg;
    rn.is_leaf = true;
    rn.label = pairs[best_k][1];
    rn.n_pos = tree.nodes[static_cast<std::size_t>(node_id)].n_pos - best_nl_pos;
    rn.n_neg = tree.nodes[static_cast<std::size_t>(node_id)].n_neg - best_nl_neg;
    tree.nodes.push_back(ln);
    tree.nodes.push_back(rn);

    ract::TreeNode& parent = tree.nodes[static_cast<std::size_t>(node_id)];
    parent.is_leaf = false;
    parent.feature = best_d;
    parent.threshold = best_b;
    parent.left = left;
    parent.right = right;

    split_rec(left, std::move(left_rows), depth + 1);
    split_rec(right, std::move(right_rows), depth + 1);
  };

  std::vector<int> all(static_cast<std::size_t>(ds.n()));
  for (int i = 0; i < ds.n(); ++i) all[static_cast<std::size_t>(i)] = i;
  split_rec(0, std::move(all), 0);
  return tree;
}

inline bool same_subtree(const ract::ClassificationTree& a, int ia,
                         const ract::ClassificationTree& b, int ib) {
  const ract::TreeNode& na = a.nodes[static_cast<std::size_t>(ia)];
  const ract::TreeNode& nb = b.nodes[static_cast<std::size_t>(ib)];
  if (na.is_leaf != nb.is_leaf) return false;
  if (na.is_leaf)
    return na.label == nb.label && na.n_pos == nb.n_pos && na.n_neg == nb.n_neg;
  if (na.feature != nb.feature || na.threshold != nb.threshold) return false;
  return same_subtree(a, na.left, b, nb.left) && same_subtree(a, na.right, b, nb.right);
}

inline bool same_tree(const ract::ClassificationTree& a, const ract::ClassificationTree& b) {
  if (a.n_features != b.n_features || a.empty() || b.empty()) return false;
  return same_subtree(a, 0, b, 0);
}

// ---------------------------------------------------------------------------
// from-scratch recomputation of the builder's incremental state

struct Bookkeeping {
  std::vector<std::int32_t> leaf_of;                // instance -> leaf node id
  std::vector<std::vector<std::uint8_t>> reach_by;  // node id -> v (leaves only)
  std::vector<std::int32_t> V;                      // reachable positive leaves
  std::int64_t risk_num = 0;
};

inline Bookkeeping recompute_bookkeeping(const ract::Dataset& ds, const ract::CostModel& cm,
                                         double eps, const ract::ClassificationTree& tree) {
  const int n = ds.n();
  ract::ReachTable rt = ract::build_reach_table(cm, ds, eps);
  std::vector<ract::LeafInfo> leaves = ract::enumerate_leaves(tree);

  Bookkeeping bk;
  bk.leaf_of.resize(static_cast<std::size_t>(n));
  bk.reach_by.resize(tree.nodes.size());
  bk.V.assign(static_cast<std::size_t>(n), 0);

  for (int i = 0; i < n; ++i) {
    int at = ract::leaf_node_of(tree, ds.instance(i));
    bk.leaf_of[static_cast<std::size_t>(i)] = at;
    if (tree.nodes[static_cast<std::size_t>(at)].label != ds.y(i)) ++bk.risk_num;
  }
  for (const ract::LeafInfo& li : leaves) {
    auto& v = bk.reach_by[static_cast<std::size_t>(li.node_id)];
    v.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      v[static_cast<std::size_t>(i)] = ract::region_reachable(rt, i, li.region);
      if (li.label > 0 && v[static_cast<std::size_t>(i)]) ++bk.V[static_cast<std::size_t>(i)];
    }
  }
  return bk;
}

// ---------------------------------------------------------------------------
// exact weighted partial cover by subset enumeration (tiny instances only)

struct ExactCover {
  bool feasible = false;
  std::int64_t weight = 0;
};

inline ExactCover exhaustive_cover(const ract::CoverInstance& ci) {
  const std::size_t k = ci.candidate_leaves.size();
  std::vector<std::uint64_t> masks(k, 0);
  for (std::size_t c = 0; c < k; ++c)
    for (std::int32_t i : ci.reach_sets[c]) masks[c] |= std::uint64_t{1} << i;

  ExactCover best;
  for (std::uint64_t sub = 0; sub < (std::uint64_t{1} << k); ++sub) {
    std::uint64_t covered = 0;
    std::int64_t weight = 0;
    for (std::size_t c = 0; c < k; ++c)
      if (sub & (std::uint64_t{1} << c)) {
        covered |= masks[c];
        weight += ci.weights[c];
      }
    std::int64_t total = ci.covered_upfront + std::popcount(covered);
    if (total < ci.required) continue;
    if (!best.feasible || weight < best.weight) {
      best.feasible = true;
      best.weight = weight;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// synthetic trade-off data: two informative but locked features, three
// mutable ones with overlapping class-conditional ranges

inline ract::Dataset tradeoff_dataset(std::mt19937_64& gen, int n) {
  namespace rng = ract::rng;
  std::vector<ract::FeatureMeta> metas;
  metas.push_back(feat("locked_a", ract::FeatureKind::continuous, 0.0, 1.0,
                       ract::Direction::fixed));
  metas.push_back(feat("locked_b", ract::FeatureKind::continuous, 0.0, 1.0,
                       ract::Direction::fixed));
  for (int j = 0; j < 3; ++j)
    metas.push_back(feat("open_" + std::to_string(j), ract::FeatureKind::continuous, 0.0, 1.0));

  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < n; ++i) {
    double z1 = rng::uniform01(gen), z2 = rng::uniform01(gen);
    double noise = 0.25 * (rng::uniform01(gen) + rng::uniform01(gen) - 1.0);
    int y = z1 + z2 - 1.0 + noise > 0.0 ? +1 : -1;
    std::vector<double> row{z1, z2, 0.0, 0.0, 0.0};
    for (int j = 0; j < 3; ++j) {
      double u = rng::uniform01(gen);
      row[static_cast<std::size_t>(2 + j)] = y > 0 ? 0.35 + 0.65 * u : 0.65 * u;
    }
    rows.push_back(std::move(row));
    labels.push_back(y);
  }
  bool has_pos = false, has_neg = false;
  for (int l : labels) (l > 0 ? has_pos : has_neg) = true;
  if (!has_pos) labels.front() = +1;
  if (!has_neg) labels.back() = -1;
  return make_dataset(rows, labels, std::move(metas));
}

// ---------------------------------------------------------------------------
// file and process plumbing for the CLI tests

inline const std::filesystem::path& scratch_dir() {
  static const std::filesystem::path dir = [] {
    std::filesystem::path p =
        std::filesystem::temp_directory_path() / ("ract_tests_" + std::to_string(getpid()));
    std::filesystem::create_directories(p);
    return p;
  }();
  return dir;
}

inline std::filesystem::path scratch_file(const std::string& name) {
  return scratch_dir() / name;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline std::string dataset_to_csv(const ract::Dataset& ds) {
  std::ostringstream os;
  os.precision(17);
  for (const ract::FeatureMeta& m : ds.features) os << m.name << ',';
  os << ds.label.column << '\n';
  for (int i = 0; i < ds.n(); ++i) {
    for (int d = 0; d < ds.d(); ++d) os << ds.X(i, d) << ',';
    os << (ds.y(i) > 0 ? ds.label.positive : ds.label.negative) << '\n';
  }
  return os.str();
}

inline std::string meta_to_json(const ract::Dataset& ds) {
  auto kind_name = [](ract::FeatureKind k) {
    switch (k) {
      case ract::FeatureKind::integer: return "integer";
      case ract::FeatureKind::binary: return "binary";
      default: return "continuous";
    }
  };
  auto dir_name = [](ract::Direction d) {
    switch (d) {
      case ract::Direction::fixed: return "fixed";
      case ract::Direction::increasing_only: return "increasing_only";
      default: return "free";
    }
  };
  std::ostringstream os;
  os.precision(17);
  os << "{\n  \"label_column\": \"" << ds.label.column << "\",\n"
     << "  \"positive_label\": \"" << ds.label.positive << "\",\n"
     << "  \"negative_label\": \"" << ds.label.negative << "\",\n"
     << "  \"features\": [\n";
  for (std::size_t d = 0; d < ds.features.size(); ++d) {
    const ract::FeatureMeta& m = ds.features[d];
    os << "    {\"name\": \"" << m.name << "\", \"kind\": \"" << kind_name(m.kind)
       << "\", \"min\": " << m.min << ", \"max\": " << m.max << ", \"direction\": \""
       << dir_name(m.direction) << "\"}" << (d + 1 < ds.features.size() ? "," : "") << "\n";
  }
  os << "  ]\n}\n";
  return os.str();
}

// Writes the dataset to scratch files; returns "--data <csv> --meta <json>".
inline std::string dataset_args(const ract::Dataset& ds, const std::string& stem) {
  auto csv = scratch_file(stem + ".csv");
  auto meta = scratch_file(stem + ".json");
  write_file(csv, dataset_to_csv(ds));
  write_file(meta, meta_to_json(ds));
  return "--data " + csv.string() + " --meta " + meta.string();
}

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

inline CliResult run_cli(const std::string& args) {
  static int counter = 0;
  const std::filesystem::path out = scratch_file("stdout_" + std::to_string(counter) + ".txt");
  const std::filesystem::path err = scratch_file("stderr_" + std::to_string(counter) + ".txt");
  ++counter;

  std::string cmd = std::string("\"") + RACT_CLI_PATH + "\" " + args + " > " + out.string() +
                    " 2> " + err.string();
  int status = std::system(cmd.c_str());

  CliResult res;
  if (WIFEXITED(status)) res.exit_code = WEXITSTATUS(status);
  res.out = read_file(out);
  res.err = read_file(err);
  return res;
}

}  // namespace testutil
