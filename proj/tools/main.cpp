// Command line front end: train / predict / relabel / recourse / eval / sweep.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>

#include "ract/dataset.hpp"
#include "ract/eval.hpp"
#include "ract/forest.hpp"
#include "ract/recourse.hpp"
#include "ract/relabel.hpp"
#include "ract/splitter.hpp"
#include "ract/tree.hpp"

namespace {

using nlohmann::json;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ract::DataError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spill(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ract::DataError("cannot write file: " + path);
  out << content;
}

using Model = std::variant<ract::ClassificationTree, ract::Forest>;

Model load_model(const std::string& path) {
  std::string text = slurp(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ract::DataError(std::string("model file is not valid JSON: ") + e.what());
  }
  if (j.is_object() && j.contains("trees")) return ract::forest_from_json(text);
  return ract::tree_from_json(text);
}

int model_predict(const Model& m, const Eigen::VectorXd& x) {
  return std::visit([&](const auto& mm) { return ract::predict(mm, x); }, m);
}

double model_score(const Model& m, const Eigen::VectorXd& x) {
  if (std::holds_alternative<ract::ClassificationTree>(m))
    return ract::predict_score(std::get<ract::ClassificationTree>(m), x);
  return ract::forest_score(std::get<ract::Forest>(m), x);
}

ract::CostKind parse_cost_kind(const std::string& s) {
  if (s == "mps") return ract::CostKind::mps;
  if (s == "linf") return ract::CostKind::weighted_linf;
  throw ract::ConfigError("unknown cost model '" + s + "' (expected mps or linf)");
}

ract::CostModel build_cost(const ract::Dataset& ds, const std::string& kind) {
  if (parse_cost_kind(kind) == ract::CostKind::mps) return ract::CostModel::make_mps(ds);
  return ract::CostModel::make_linf(Eigen::VectorXd::Ones(ds.d()));
}

int tree_depth(const ract::ClassificationTree& t, int id = 0) {
  const ract::TreeNode& nd = t.nodes[static_cast<std::size_t>(id)];
  if (nd.is_leaf) return 0;
  return 1 + std::max(tree_depth(t, nd.left), tree_depth(t, nd.right));
}

double training_risk(const Model& m, const ract::Dataset& ds) {
  std::int64_t wrong = 0;
  for (int i = 0; i < ds.n(); ++i)
    if (model_predict(m, ds.instance(i)) != ds.y(i)) ++wrong;
  return static_cast<double>(wrong) / static_cast<double>(ds.n());
}

struct CommonDataArgs {
  std::string data;
  std::string meta;

  void attach(CLI::App* cmd) {
    cmd->add_option("--data", data, "CSV file with a header row")->required();
    cmd->add_option("--meta", meta, "JSON feature metadata")->required();
  }
};

json relabel_report_json(const ract::RelabelReport& rep) {
  return json{{"flipped_leaves", rep.flipped_leaves},
              {"coverage", rep.coverage},
              {"risk_increase", rep.risk_increase},
              {"delta_effective", rep.delta_effective},
              {"iterations", rep.iterations}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"recourse-aware decision trees and forests"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from a config file (TOML-style sections)");

  int threads = 1;
  app.add_option("--threads", threads, "worker threads for forests and cross-validation")
      ->capture_default_str();

  // train -------------------------------------------------------------
  auto* train = app.add_subcommand("train", "train a tree or forest, write the model as JSON");
  CommonDataArgs train_data;
  train_data.attach(train);
  std::string train_out, train_report, train_cost = "mps";
  bool train_forest_flag = false, no_bootstrap = false, train_relabel = false;
  int n_trees = 100, max_features = -1;
  double pac_alpha_opt = -1.0;
  ract::GrowConfig grow;
  double train_delta = 0.1;
  train->add_option("--out", train_out, "model output path")->required();
  train->add_option("--report", train_report, "training report path (default: stdout)");
  train->add_option("--cost", train_cost, "action cost model: mps or linf")
      ->capture_default_str();
  train->add_option("--lambda", grow.lambda, "weight of the recourse term")
      ->capture_default_str();
  train->add_option("--epsilon", grow.epsilon, "action budget while training")
      ->capture_default_str();
  train->add_option("--max-depth", grow.max_depth)->capture_default_str();
  train->add_option("--min-samples-leaf", grow.min_samples_leaf)->capture_default_str();
  train->add_option("--min-impurity-decrease", grow.min_impurity_decrease)
      ->capture_default_str();
  train->add_option("--seed", grow.seed)->capture_default_str();
  train->add_flag("--forest", train_forest_flag, "train a bagged ensemble");
  train->add_option("--trees", n_trees, "ensemble size")->capture_default_str();
  train->add_option("--max-features", max_features,
                    "per-node feature subset (-1: ceil(sqrt(D)), 0: all)")
      ->capture_default_str();
  train->add_flag("--no-bootstrap", no_bootstrap, "train every tree on the full sample");
  train->add_flag("--relabel", train_relabel, "post-process leaf labels (single tree only)");
  train->add_option("--delta", train_delta, "tolerated fraction without recourse")
      ->capture_default_str();
  train->add_option("--pac-alpha", pac_alpha_opt,
                    "confidence level for the tightened relabel target (requires --relabel)");

  // predict -----------------------------------------------------------
  auto* predict_cmd = app.add_subcommand("predict", "apply a model, write predictions as CSV");
  CommonDataArgs predict_data;
  predict_data.attach(predict_cmd);
  std::string predict_model, predict_out;
  predict_cmd->add_option("--model", predict_model, "model JSON path")->required();
  predict_cmd->add_option("--out", predict_out, "output path (default: stdout)");

  // relabel -----------------------------------------------------------
  auto* relabel_cmd =
      app.add_subcommand("relabel", "flip negative leaves of a tree until recourse is covered");
  CommonDataArgs relabel_data;
  relabel_data.attach(relabel_cmd);
  std::string relabel_model, relabel_out, relabel_report_path, relabel_cost = "mps";
  double relabel_delta = 0.1, relabel_eps = 0.3, relabel_alpha = -1.0;
  relabel_cmd->add_option("--model", relabel_model, "tree model JSON path")->required();
  relabel_cmd->add_option("--out", relabel_out, "relabeled model output path")->required();
  relabel_cmd->add_option("--report", relabel_report_path, "report path (default: stdout)");
  relabel_cmd->add_option("--cost", relabel_cost, "action cost model")->capture_default_str();
  relabel_cmd->add_option("--delta", relabel_delta)->capture_default_str();
  relabel_cmd->add_option("--epsilon", relabel_eps)->capture_default_str();
  relabel_cmd->add_option("--pac-alpha", relabel_alpha,
                          "confidence level for the tightened target");

  // recourse ----------------------------------------------------------
  auto* recourse_cmd =
      app.add_subcommand("recourse", "extract minimum-cost actions, one JSON line per instance");
  CommonDataArgs recourse_data;
  recourse_data.attach(recourse_cmd);
  std::string recourse_model, recourse_out, recourse_cost = "mps";
  double recourse_eps = 0.3;
  recourse_cmd->add_option("--model", recourse_model, "model JSON path")->required();
  recourse_cmd->add_option("--out", recourse_out, "output path (default: stdout)");
  recourse_cmd->add_option("--cost", recourse_cost, "action cost model")->capture_default_str();
  recourse_cmd->add_option("--epsilon", recourse_eps, "budget used for the summary ratio")
      ->capture_default_str();

  // eval / sweep --------------------------------------------------------
  auto add_eval_options = [&](CLI::App* cmd, auto& opts) {
    opts.data.attach(cmd);
    cmd->add_option("--method", opts.method, "vanilla, oaf or ract")->capture_default_str();
    cmd->add_option("--family", opts.family, "tree or forest")->capture_default_str();
    cmd->add_option("--folds", opts.folds)->capture_default_str();
    cmd->add_option("--seed", opts.seed)->capture_default_str();
    cmd->add_option("--cost", opts.cost, "action cost model")->capture_default_str();
    cmd->add_option("--lambda", opts.lambda)->capture_default_str();
    cmd->add_option("--delta", opts.delta)->capture_default_str();
    cmd->add_option("--epsilon", opts.epsilon)->capture_default_str();
    cmd->add_option("--trees", opts.trees)->capture_default_str();
    cmd->add_option("--max-features", opts.max_features)->capture_default_str();
    cmd->add_option("--max-depth", opts.max_depth)->capture_default_str();
    cmd->add_option("--min-samples-leaf", opts.min_samples_leaf)->capture_default_str();
    cmd->add_flag("--relabel", opts.relabel, "relabel after training (tree family)");
    cmd->add_option("--pac-alpha", opts.pac_alpha);
    cmd->add_flag("--negatives-only", opts.negatives_only,
                  "restrict the recourse ratio to predicted negatives");
    cmd->add_option("--out", opts.out, "CSV output path (default: stdout)");
  };

  struct EvalArgs {
    CommonDataArgs data;
    std::string method = "ract", family = "forest", cost = "mps", out;
    int folds = 5, trees = 100, max_features = -1, max_depth = 8, min_samples_leaf = 1;
    std::uint64_t seed = 0;
    double lambda = 0.05, delta = 0.1, epsilon = 0.3, pac_alpha = -1.0;
    bool relabel = false, negatives_only = false;
  };

  auto* eval_cmd = app.add_subcommand("eval", "stratified cross-validated metrics as CSV");
  EvalArgs eval_args;
  add_eval_options(eval_cmd, eval_args);

  auto* sweep_cmd = app.add_subcommand("sweep", "eval over a grid of lambda/delta/epsilon");
  EvalArgs sweep_args;
  add_eval_options(sweep_cmd, sweep_args);
  std::vector<double> grid_lambdas, grid_deltas, grid_epsilons;
  sweep_cmd->add_option("--lambdas", grid_lambdas, "comma-separated lambda grid")
      ->delimiter(',');
  sweep_cmd->add_option("--deltas", grid_deltas, "comma-separated delta grid")->delimiter(',');
  sweep_cmd->add_option("--epsilons", grid_epsilons, "comma-separated epsilon grid")
      ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  auto make_method = [&](const EvalArgs& a) {
    ract::MethodConfig m;
    m.name = a.method;
    if (a.family == "tree") {
      m.family = ract::ModelFamily::tree;
    } else if (a.family == "forest") {
      m.family = ract::ModelFamily::forest;
    } else {
      throw ract::ConfigError("unknown family '" + a.family + "'");
    }
    m.cost = parse_cost_kind(a.cost);
    m.forest.n_trees = a.trees;
    m.forest.max_features = m.family == ract::ModelFamily::tree ? 0 : a.max_features;
    m.forest.seed = a.seed;
    m.forest.grow.max_depth = a.max_depth;
    m.forest.grow.min_samples_leaf = a.min_samples_leaf;
    m.forest.grow.epsilon = a.epsilon;
    m.eval_epsilon = a.epsilon;
    m.delta = a.delta;
    m.negatives_only_ratio = a.negatives_only;

    if (a.method == "vanilla") {
      m.forest.grow.lambda = 0.0;
    } else if (a.method == "oaf") {
      m.forest.grow.lambda = 0.0;
      m.mask_immutable = true;
    } else if (a.method == "ract") {
      m.forest.grow.lambda = a.lambda;
    } else {
      throw ract::ConfigError("unknown method '" + a.method + "'");
    }
    if (a.relabel) {
      if (m.family != ract::ModelFamily::tree)
        throw ract::ConfigError("relabel applies to the tree family only");
      m.relabel = true;
    }
    if (a.pac_alpha >= 0.0) {
      if (!m.relabel) throw ract::ConfigError("--pac-alpha requires --relabel");
      m.pac_alpha = a.pac_alpha;
    }
    return m;
  };

  try {
    if (*train) {
      ract::Dataset ds = ract::load_dataset(train_data.data, train_data.meta);
      auto t0 = std::chrono::steady_clock::now();
      ract::CostModel cm = build_cost(ds, train_cost);
      double prep_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

      json report;
      report["n"] = ds.n();
      report["d"] = ds.d();
      report["cost"] = train_cost;
      report["lambda"] = grow.lambda;
      report["epsilon"] = grow.epsilon;

      if (train_forest_flag) {
        if (train_relabel)
          std::cerr << "warning: relabeling applies to single trees; skipping for the forest\n";
        ract::ForestConfig fc;
        fc.n_trees = n_trees;
        fc.max_features = max_features;
        fc.bootstrap = !no_bootstrap;
        fc.grow = grow;
        fc.seed = grow.seed;
        auto t1 = std::chrono::steady_clock::now();
        ract::Forest f = ract::train_forest(ds, cm, fc, threads);
        double train_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();
        spill(train_out, ract::forest_to_json(f));
        Model m = std::move(f);
        report["family"] = "forest";
        report["trees"] = n_trees;
        report["train_risk"] = training_risk(m, ds);
        report["timing"] = {{"prep_seconds", prep_seconds}, {"train_seconds", train_seconds}};
      } else {
        for (const char* opt : {"--trees", "--max-features", "--no-bootstrap"})
          if (train->count(opt) > 0)
            std::cerr << "warning: " << opt << " only applies with --forest; ignored\n";
        auto t1 = std::chrono::steady_clock::now();
        ract::ClassificationTree t = ract::grow_tree(ds, cm, grow);
        ract::RelabelReport rrep;
        if (train_relabel) {
          std::optional<double> alpha;
          if (pac_alpha_opt >= 0.0) alpha = pac_alpha_opt;
          t = ract::relabel(t, ds, cm, grow.epsilon, train_delta, alpha, &rrep);
        } else if (pac_alpha_opt >= 0.0) {
          throw ract::ConfigError("--pac-alpha requires --relabel");
        }
        double train_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();
        spill(train_out, ract::tree_to_json(t));
        report["family"] = "tree";
        report["depth"] = tree_depth(t);
        report["n_leaves"] = static_cast<int>(ract::enumerate_leaves(t).size());
        Model m = t;
        report["train_risk"] = training_risk(m, ds);
        report["recourse_risk"] = ract::empirical_recourse_risk(t, ds, cm, grow.epsilon);
        if (train_relabel) report["relabel"] = relabel_report_json(rrep);
        report["timing"] = {{"prep_seconds", prep_seconds}, {"train_seconds", train_seconds}};
      }
      spill(train_report, report.dump(2) + "\n");
      return 0;
    }

    if (*predict_cmd) {
      ract::Dataset ds = ract::load_dataset(predict_data.data, predict_data.meta);
      Model m = load_model(predict_model);
      std::ostringstream os;
      os.precision(10);
      os << "instance_id,prediction,score\n";
      for (int i = 0; i < ds.n(); ++i) {
        Eigen::VectorXd x = ds.instance(i);
        os << i << ',' << model_predict(m, x) << ',' << model_score(m, x) << '\n';
      }
      spill(predict_out, os.str());
      return 0;
    }

    if (*relabel_cmd) {
      ract::Dataset ds = ract::load_dataset(relabel_data.data, relabel_data.meta);
      Model m = load_model(relabel_model);
      if (!std::holds_alternative<ract::ClassificationTree>(m))
        throw ract::ConfigError("relabel expects a single-tree model");
      ract::CostModel cm = build_cost(ds, relabel_cost);
      std::optional<double> alpha;
      if (relabel_alpha >= 0.0) alpha = relabel_alpha;
      ract::RelabelReport rep;
      ract::ClassificationTree out = ract::relabel(std::get<ract::ClassificationTree>(m), ds, cm,
                                                   relabel_eps, relabel_delta, alpha, &rep);
      spill(relabel_out, ract::tree_to_json(out));
      json rj = relabel_report_json(rep);
      rj["recourse_risk_after"] = ract::empirical_recourse_risk(out, ds, cm, relabel_eps);
      spill(relabel_report_path, rj.dump(2) + "\n");
      return 0;
    }

    if (*recourse_cmd) {
      ract::Dataset ds = ract::load_dataset(recourse_data.data, recourse_data.meta);
      Model m = load_model(recourse_model);
      ract::CostModel cm = build_cost(ds, recourse_cost);
      ract::RecourseContext ctx = ract::make_recourse_context(ds, cm);

      std::vector<std::optional<ract::Action>> actions =
          std::holds_alternative<ract::ClassificationTree>(m)
              ? ract::extract_actions(std::get<ract::ClassificationTree>(m), ds.X, cm, ctx)
              : ract::extract_actions(std::get<ract::Forest>(m), ds.X, cm, ctx);

      std::ostringstream os;
      std::int64_t with_recourse = 0;
      for (int i = 0; i < ds.n(); ++i) {
        const auto& a = actions[static_cast<std::size_t>(i)];
        json line;
        line["instance"] = i;
        line["prediction"] = model_predict(m, ds.instance(i));
        line["valid"] = a.has_value();
        if (a) {
          line["cost"] = a->cost;
          json changes = json::array();
          for (Eigen::Index d = 0; d < a->delta.size(); ++d) {
            if (a->delta(d) == 0.0) continue;
            changes.push_back({{"feature", ds.features[static_cast<std::size_t>(d)].name},
                               {"from", ds.X(i, d)},
                               {"to", ds.X(i, d) + a->delta(d)}});
          }
          line["changes"] = std::move(changes);
          if (a->cost <= recourse_eps) ++with_recourse;
        }
        os << line.dump() << '\n';
      }
      json summary;
      summary["summary"] = {{"n", ds.n()},
                            {"epsilon", recourse_eps},
                            {"recourse_ratio",
                             static_cast<double>(with_recourse) / static_cast<double>(ds.n())}};
      os << summary.dump() << '\n';
      spill(recourse_out, os.str());
      return 0;
    }

    if (*eval_cmd) {
      ract::Dataset ds = ract::load_dataset(eval_args.data.data, eval_args.data.meta);
      ract::MethodConfig method = make_method(eval_args);
      ract::FoldPlan folds = ract::make_folds(ds.y, eval_args.folds, eval_args.seed);
      std::vector<ract::MetricsRow> rows =
          ract::aggregate(ract::run_cv(ds, method, folds, threads));
      spill(eval_args.out, ract::metrics_to_csv(rows));
      return 0;
    }

    if (*sweep_cmd) {
      ract::Dataset ds = ract::load_dataset(sweep_args.data.data, sweep_args.data.meta);
      ract::MethodConfig method = make_method(sweep_args);
      ract::FoldPlan folds = ract::make_folds(ds.y, sweep_args.folds, sweep_args.seed);
      ract::SweepGrid grid;
      grid.lambdas = grid_lambdas;
      grid.deltas = grid_deltas;
      grid.epsilons = grid_epsilons;
      std::vector<ract::MetricsRow> rows = ract::sweep(ds, method, grid, folds, threads);
      spill(sweep_args.out, ract::metrics_to_csv(rows));
      return 0;
    }
  } catch (const ract::InfeasibleError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const ract::DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ract::UndefinedMetricError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ract::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
