#include "ract/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "ract/recourse.hpp"
#include "ract/relabel.hpp"
#include "ract/rng.hpp"

namespace ract {

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

FoldPlan make_folds(const Eigen::VectorXi& y, int k, std::uint64_t seed) {
  const int n = static_cast<int>(y.size());
  if (k < 2) throw ConfigError("fold count must be at least 2");
  if (k > n) throw ConfigError("fold count exceeds instance count");

  std::vector<int> pos, neg;
  for (int i = 0; i < n; ++i) (y(i) > 0 ? pos : neg).push_back(i);

  std::mt19937_64 gp(rng::mix(seed, 0)), gn(rng::mix(seed, 1));
  rng::shuffle(pos, gp);
  rng::shuffle(neg, gn);

  // One continuous round-robin deal across both class lists keeps the folds
  // balanced per class and overall (sizes differ by at most one either way).
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.assignment.assign(static_cast<std::size_t>(n), 0);
  int cursor = 0;
  for (int i : pos) plan.assignment[static_cast<std::size_t>(i)] = cursor++ % k;
  for (int i : neg) plan.assignment[static_cast<std::size_t>(i)] = cursor++ % k;
  return plan;
}

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size() || scores.empty())
    throw ConfigError("auc: scores and labels must be non-empty and equally sized");
  std::int64_t n_pos = 0;
  for (int l : labels)
    if (l > 0) ++n_pos;
  std::int64_t n_neg = static_cast<std::int64_t>(labels.size()) - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw UndefinedMetricError("auc undefined: only one class present");

  std::vector<int> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return scores[static_cast<std::size_t>(a)] <
                                              scores[static_cast<std::size_t>(b)]; });

  // rank sum of positives, average ranks across tied scores
  double rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() &&
           scores[static_cast<std::size_t>(order[j])] == scores[static_cast<std::size_t>(order[i])])
      ++j;
    double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (std::size_t k2 = i; k2 < j; ++k2)
      if (labels[static_cast<std::size_t>(order[k2])] > 0) rank_sum += avg_rank;
    i = j;
  }
  return (rank_sum - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1)) /
         (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<int> mutable_features(const Dataset& ds) {
  std::vector<int> pool;
  for (int d = 0; d < ds.d(); ++d)
    if (!ds.features[static_cast<std::size_t>(d)].immutable) pool.push_back(d);
  if (pool.empty()) throw ConfigError("all features are immutable; nothing to split on");
  return pool;
}

CostModel build_cost_model(const Dataset& train, const MethodConfig& method) {
  if (method.cost == CostKind::mps) return CostModel::make_mps(train);
  Eigen::VectorXd w = method.linf_weights;
  if (w.size() == 0) w = Eigen::VectorXd::Ones(train.d());
  return CostModel::make_linf(w);
}

MetricsRow eval_fold(const Dataset& ds, const MethodConfig& method, const FoldPlan& folds,
                     int fold) {
  std::vector<int> train_rows, test_rows;
  for (int i = 0; i < ds.n(); ++i)
    (folds.assignment[static_cast<std::size_t>(i)] == fold ? test_rows : train_rows).push_back(i);
  if (train_rows.empty() || test_rows.empty()) throw ConfigError("empty fold");

  Dataset train = ds.subset(train_rows);
  Dataset test = ds.subset(test_rows);

  // everything data-derived comes from the training split alone
  auto t_prep = Clock::now();
  CostModel cm = build_cost_model(train, method);
  RecourseContext ctx = make_recourse_context(train, cm);
  double prep_seconds = seconds_since(t_prep);

  ForestConfig fc = method.forest;
  fc.seed = rng::mix(method.forest.seed, static_cast<std::uint64_t>(fold));
  fc.grow.seed = fc.seed;
  if (method.mask_immutable) fc.feature_pool = mutable_features(train);

  MetricsRow row;
  row.method = method.name;
  row.lambda = fc.grow.lambda;
  row.delta = method.relabel ? method.delta : 0.0;
  row.epsilon = method.eval_epsilon;
  row.fold = std::to_string(fold);

  ClassificationTree tree;
  Forest forest;
  const bool is_tree = method.family == ModelFamily::tree;

  auto t_train = Clock::now();
  if (is_tree) {
    TrainOptions opts;
    opts.feature_pool = fc.feature_pool;
    tree = grow_tree(train, cm, fc.grow, opts);
    if (method.relabel)
      tree = relabel(tree, train, cm, fc.grow.epsilon, method.delta, method.pac_alpha);
  } else {
    forest = train_forest(train, cm, fc, 1);
  }
  row.train_seconds = seconds_since(t_train);
  row.prep_seconds = prep_seconds;

  std::vector<double> scores(static_cast<std::size_t>(test.n()));
  std::vector<int> labels(static_cast<std::size_t>(test.n()));
  std::int64_t correct = 0;
  std::vector<int> preds(static_cast<std::size_t>(test.n()));
  for (int i = 0; i < test.n(); ++i) {
    Eigen::VectorXd x = test.instance(i);
    int pred = is_tree ? predict(tree, x) : predict(forest, x);
    preds[static_cast<std::size_t>(i)] = pred;
    scores[static_cast<std::size_t>(i)] = is_tree ? predict_score(tree, x) : forest_score(forest, x);
    labels[static_cast<std::size_t>(i)] = test.y(i);
    if (pred == test.y(i)) ++correct;
  }
  row.accuracy = static_cast<double>(correct) / static_cast<double>(test.n());
  row.auc = auc(scores, labels);

  std::vector<std::optional<Action>> actions =
      is_tree ? extract_actions(tree, test.X, cm, ctx) : extract_actions(forest, test.X, cm, ctx);

  std::int64_t denom = 0, with_recourse = 0, valid_neg = 0;
  double cost_sum = 0.0;
  for (int i = 0; i < test.n(); ++i) {
    const bool positive = preds[static_cast<std::size_t>(i)] > 0;
    const auto& a = actions[static_cast<std::size_t>(i)];
    if (positive) {
      if (!method.negatives_only_ratio) {
        ++denom;
        ++with_recourse;
      }
      continue;
    }
    ++denom;
    if (a) {
      ++valid_neg;
      cost_sum += a->cost;
      if (a->cost <= method.eval_epsilon) ++with_recourse;
    }
  }
  row.recourse_ratio =
      denom == 0 ? 1.0 : static_cast<double>(with_recourse) / static_cast<double>(denom);
  if (valid_neg > 0) row.avg_cost = cost_sum / static_cast<double>(valid_neg);
  return row;
}

}  // namespace

std::vector<MetricsRow> run_cv(const Dataset& ds, const MethodConfig& method,
                               const FoldPlan& folds, int threads) {
  if (static_cast<int>(folds.assignment.size()) != ds.n())
    throw ConfigError("fold plan does not match the dataset");
  std::vector<MetricsRow> rows(static_cast<std::size_t>(folds.k));
  parallel_for(folds.k, threads,
               [&](int f) { rows[static_cast<std::size_t>(f)] = eval_fold(ds, method, folds, f); });
  return rows;
}

std::vector<MetricsRow> aggregate(const std::vector<MetricsRow>& fold_rows) {
  if (fold_rows.empty()) throw ConfigError("aggregate: no rows");
  std::vector<MetricsRow> out = fold_rows;

  auto mean_std = [&](const std::function<double(const MetricsRow&)>& get) {
    double mean = 0.0;
    for (const MetricsRow& r : fold_rows) mean += get(r);
    mean /= static_cast<double>(fold_rows.size());
    double var = 0.0;
    for (const MetricsRow& r : fold_rows) var += (get(r) - mean) * (get(r) - mean);
    var = fold_rows.size() > 1 ? var / static_cast<double>(fold_rows.size() - 1) : 0.0;
    return std::pair<double, double>(mean, std::sqrt(var));
  };

  MetricsRow mean = fold_rows.front();
  MetricsRow dev = fold_rows.front();
  mean.fold = "mean";
  dev.fold = "std";

  auto fill = [&](double MetricsRow::* field) {
    auto [m, s] = mean_std([field](const MetricsRow& r) { return r.*field; });
    mean.*field = m;
    dev.*field = s;
  };
  fill(&MetricsRow::accuracy);
  fill(&MetricsRow::auc);
  fill(&MetricsRow::recourse_ratio);
  fill(&MetricsRow::train_seconds);
  fill(&MetricsRow::prep_seconds);

  // avg_cost aggregates over folds where it exists
  std::vector<double> costs;
  for (const MetricsRow& r : fold_rows)
    if (r.avg_cost) costs.push_back(*r.avg_cost);
  if (costs.empty()) {
    mean.avg_cost.reset();
    dev.avg_cost.reset();
  } else {
    double m = 0.0;
    for (double c : costs) m += c;
    m /= static_cast<double>(costs.size());
    double v = 0.0;
    for (double c : costs) v += (c - m) * (c - m);
    v = costs.size() > 1 ? v / static_cast<double>(costs.size() - 1) : 0.0;
    mean.avg_cost = m;
    dev.avg_cost = std::sqrt(v);
  }

  out.push_back(std::move(mean));
  out.push_back(std::move(dev));
  return out;
}

std::vector<MetricsRow> sweep(const Dataset& ds, const MethodConfig& base, const SweepGrid& grid,
                              const FoldPlan& folds, int threads) {
  std::vector<double> lambdas = grid.lambdas.empty() ? std::vector<double>{base.forest.grow.lambda}
                                                     : grid.lambdas;
  std::vector<double> deltas = grid.deltas.empty() ? std::vector<double>{base.delta} : grid.deltas;
  std::vector<double> epsilons =
      grid.epsilons.empty() ? std::vector<double>{base.eval_epsilon} : grid.epsilons;

  std::vector<MetricsRow> out;
  for (double lambda : lambdas) {
    for (double delta : deltas) {
      for (double eps : epsilons) {
        MethodConfig m = base;
        m.forest.grow.lambda = lambda;
        m.delta = delta;
        m.forest.grow.epsilon = eps;
        m.eval_epsilon = eps;
        std::vector<MetricsRow> rows = aggregate(run_cv(ds, m, folds, threads));
        out.insert(out.end(), rows.begin(), rows.end());
      }
    }
  }
  return out;
}

std::string metrics_to_csv(const std::vector<MetricsRow>& rows) {
  std::ostringstream os;
  os.precision(10);
  os << "method,lambda,delta,epsilon,fold,accuracy,auc,recourse_ratio,avg_cost,"
        "train_seconds,prep_seconds\n";
  for (const MetricsRow& r : rows) {
    os << r.method << ',' << r.lambda << ',' << r.delta << ',' << r.epsilon << ',' << r.fold << ','
       << r.accuracy << ',' << r.auc << ',' << r.recourse_ratio << ',';
    if (r.avg_cost) os << *r.avg_cost;
    os << ',' << r.train_seconds << ',' << r.prep_seconds << '\n';
  }
  return os.str();
}

}  // namespace ract
