#include "ract/forest.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "ract/eval.hpp"
#include "ract/rng.hpp"
#include "tree_json.hpp"

namespace ract {

namespace {

int resolve_max_features(int requested, int d) {
  if (requested == 0) return 0;  // all
  if (requested < 0)
    return static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))));
  if (requested > d) throw ConfigError("max_features exceeds feature count");
  return requested;
}

}  // namespace

Forest train_forest(const Dataset& ds, const CostModel& cm, const ForestConfig& cfg,
                    int threads) {
  if (cfg.n_trees < 1) throw ConfigError("n_trees must be at least 1");
  const int pool_size =
      cfg.feature_pool.empty() ? ds.d() : static_cast<int>(cfg.feature_pool.size());
  const int max_features = resolve_max_features(cfg.max_features, pool_size);

  Forest f;
  f.n_features = ds.d();
  f.config = cfg;
  f.config.max_features = max_features;
  f.trees.resize(static_cast<std::size_t>(cfg.n_trees));

  parallel_for(cfg.n_trees, threads, [&](int t) {
    // one private stream per tree: bootstrap draws first, then the
    // builder's per-node feature subsets
    std::mt19937_64 gen(rng::mix(cfg.seed, static_cast<std::uint64_t>(t)));

    GrowConfig grow = cfg.grow;
    grow.seed = gen();

    TrainOptions opts;
    opts.feature_pool = cfg.feature_pool;
    opts.max_features = max_features;

    if (cfg.bootstrap) {
      std::vector<int> rows(static_cast<std::size_t>(ds.n()));
      for (int& r : rows)
        r = static_cast<int>(rng::bounded(gen, static_cast<std::uint64_t>(ds.n())));
      Dataset sample = ds.subset(rows);
      f.trees[static_cast<std::size_t>(t)] = grow_tree(sample, cm, grow, opts);
    } else {
      f.trees[static_cast<std::size_t>(t)] = grow_tree(ds, cm, grow, opts);
    }
  });
  return f;
}

int predict(const Forest& f, const Eigen::VectorXd& x) {
  int vote = 0;
  for (const ClassificationTree& t : f.trees) vote += predict(t, x);
  return vote > 0 ? +1 : -1;  // ties negative
}

double forest_score(const Forest& f, const Eigen::VectorXd& x) {
  if (f.trees.empty()) throw DataError("forest: empty model");
  int pos = 0;
  for (const ClassificationTree& t : f.trees)
    if (predict(t, x) > 0) ++pos;
  return static_cast<double>(pos) / static_cast<double>(f.trees.size());
}

std::string forest_to_json(const Forest& f) {
  nlohmann::json j;
  j["version"] = 1;
  j["config"] = {
      {"n_trees", f.config.n_trees},
      {"max_features", f.config.max_features},
      {"bootstrap", f.config.bootstrap},
      {"lambda", f.config.grow.lambda},
      {"epsilon", f.config.grow.epsilon},
      {"max_depth", f.config.grow.max_depth},
      {"min_samples_leaf", f.config.grow.min_samples_leaf},
      {"min_impurity_decrease", f.config.grow.min_impurity_decrease},
      {"seed", f.config.seed},
  };
  nlohmann::json trees = nlohmann::json::array();
  for (const ClassificationTree& t : f.trees) trees.push_back(tree_to_json_obj(t));
  j["trees"] = std::move(trees);
  return j.dump(2) + "\n";
}

Forest forest_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("forest: invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("version") || j.at("version").get<int>() != 1)
    throw DataError("forest: unsupported document version");
  if (!j.contains("trees") || !j.at("trees").is_array() || j.at("trees").empty())
    throw DataError("forest: missing trees");

  Forest f;
  try {
    const auto& cj = j.at("config");
    f.config.n_trees = cj.at("n_trees").get<int>();
    f.config.max_features = cj.at("max_features").get<int>();
    f.config.bootstrap = cj.at("bootstrap").get<bool>();
    f.config.grow.lambda = cj.at("lambda").get<double>();
    f.config.grow.epsilon = cj.at("epsilon").get<double>();
    f.config.grow.max_depth = cj.at("max_depth").get<int>();
    f.config.grow.min_samples_leaf = cj.at("min_samples_leaf").get<int>();
    f.config.grow.min_impurity_decrease = cj.at("min_impurity_decrease").get<double>();
    f.config.seed = cj.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("forest: malformed document: ") + e.what());
  }

  for (const auto& tj : j.at("trees")) f.trees.push_back(tree_from_json_obj(tj));
  f.n_features = f.trees.front().n_features;
  for (const ClassificationTree& t : f.trees)
    if (t.n_features != f.n_features) throw DataError("forest: inconsistent n_features");
  return f;
}

}  // namespace ract
