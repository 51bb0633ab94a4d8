#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "ract/errors.hpp"

namespace ract {

enum class FeatureKind { integer, continuous, binary };

// How a feature may move under an action.
enum class Direction { free, increasing_only, fixed };

struct FeatureMeta {
  std::string name;
  FeatureKind kind = FeatureKind::continuous;
  double min = 0.0;
  double max = 0.0;
  bool immutable = false;
  Direction direction = Direction::free;
};

struct LabelSpec {
  std::string column = "label";
  std::string positive = "1";
  std::string negative = "-1";
};

// Tabular training/evaluation data. Labels are +1 / -1.
struct Dataset {
  Eigen::MatrixXd X;  // N x D
  Eigen::VectorXi y;  // N, entries in {+1,-1}
  std::vector<FeatureMeta> features;
  LabelSpec label;

  int n() const { return static_cast<int>(X.rows()); }
  int d() const { return static_cast<int>(X.cols()); }
  Eigen::VectorXd instance(int i) const { return X.row(i).transpose(); }
  Dataset subset(const std::vector<int>& rows) const;
};

// Per-feature candidate split thresholds.
using ThresholdSet = std::vector<std::vector<double>>;

// Per-feature instance orderings (ascending value, ties by index).
using SortPermutations = std::vector<std::vector<std::int32_t>>;

// Empirical per-feature CDF over the training sample:
// at(d, v) = #{ n : X(n,d) <= v } / N, a right-continuous step function.
struct QuantileTable {
  std::vector<std::vector<double>> values;  // sorted distinct values
  std::vector<std::vector<double>> cdf;     // cumulative fraction at values[j]

  double at(int d, double v) const;
  int d() const { return static_cast<int>(values.size()); }
};

std::vector<FeatureMeta> parse_feature_meta(const std::string& meta_json, LabelSpec* label_out);

// Reads a CSV with a header row plus a JSON metadata document describing the
// feature columns and the label column. Columns not mentioned in the
// metadata are ignored. Throws DataError on any malformed or out-of-range cell.
Dataset load_dataset(const std::string& data_path, const std::string& meta_path);

// Midpoints between consecutive distinct observed values, per feature.
// Constant features get an empty list.
ThresholdSet build_thresholds(const Dataset& ds);

SortPermutations sort_permutations(const Dataset& ds);

QuantileTable build_quantiles(const Dataset& ds);

}  // namespace ract
