#include "ract/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace ract {
namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// One CSV record; handles quoted fields with doubled quotes. Embedded
// newlines inside quotes are not supported (numeric tables never need them).
std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"' && cur.empty()) {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw DataError("unterminated quote on line " + std::to_string(line_no));
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_cell(const std::string& raw, std::size_t row, const std::string& column) {
  std::string s = trim(raw);
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw DataError("unparsable cell in row " + std::to_string(row) + ", column " + column +
                    ": '" + raw + "'");
  return v;
}

FeatureKind parse_kind(const std::string& s) {
  if (s == "integer" || s == "Integer") return FeatureKind::integer;
  if (s == "continuous" || s == "Continuous") return FeatureKind::continuous;
  if (s == "binary" || s == "Binary") return FeatureKind::binary;
  throw DataError("unknown feature kind: '" + s + "'");
}

Direction parse_direction(const std::string& s) {
  if (s == "free" || s == "Nothing" || s == "nothing") return Direction::free;
  if (s == "increasing_only" || s == "Increasing only" || s == "increasing only")
    return Direction::increasing_only;
  if (s == "fixed" || s == "Fix" || s == "fix") return Direction::fixed;
  throw DataError("unknown direction constraint: '" + s + "'");
}

}  // namespace

std::vector<FeatureMeta> parse_feature_meta(const std::string& meta_json, LabelSpec* label_out) {
  json doc;
  try {
    doc = json::parse(meta_json);
  } catch (const json::exception& e) {
    throw DataError(std::string("metadata is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw DataError("metadata root must be an object");

  LabelSpec label;
  if (doc.contains("label_column")) label.column = doc.at("label_column").get<std::string>();
  if (doc.contains("positive_label")) label.positive = doc.at("positive_label").get<std::string>();
  if (doc.contains("negative_label")) label.negative = doc.at("negative_label").get<std::string>();
  if (label.positive == label.negative)
    throw DataError("positive and negative label values must differ");

  if (!doc.contains("features") || !doc.at("features").is_array())
    throw DataError("metadata must contain a 'features' array");

  std::vector<FeatureMeta> metas;
  for (const auto& rec : doc.at("features")) {
    if (!rec.is_object()) throw DataError("feature records must be objects");
    FeatureMeta m;
    for (const auto& [key, value] : rec.items()) {
      if (key == "name") {
        m.name = value.get<std::string>();
      } else if (key == "kind") {
        m.kind = parse_kind(value.get<std::string>());
      } else if (key == "min") {
        m.min = value.get<double>();
      } else if (key == "max") {
        m.max = value.get<double>();
      } else if (key == "immutable") {
        m.immutable = value.get<bool>();
      } else if (key == "direction") {
        m.direction = parse_direction(value.get<std::string>());
      } else {
        throw DataError("unknown key '" + key + "' in feature record");
      }
    }
    if (m.name.empty()) throw DataError("feature record without a name");
    if (!rec.contains("min") || !rec.contains("max"))
      throw DataError("feature '" + m.name + "' needs min and max");
    if (!(m.min <= m.max))
      throw DataError("feature '" + m.name + "': min must not exceed max");
    if (m.kind == FeatureKind::binary && (m.min < 0.0 || m.max > 1.0))
      throw DataError("feature '" + m.name + "': binary bounds must lie in {0,1}");
    // 'immutable' and direction 'fixed' are two spellings of the same thing;
    // either one implies the other.
    if (rec.contains("immutable") && rec.contains("direction") &&
        m.immutable != (m.direction == Direction::fixed))
      throw DataError("feature '" + m.name + "': immutable flag contradicts direction");
    if (m.immutable) m.direction = Direction::fixed;
    if (m.direction == Direction::fixed) m.immutable = true;
    metas.push_back(std::move(m));
  }
  if (metas.empty()) throw DataError("metadata lists no features");

  for (std::size_t i = 0; i < metas.size(); ++i)
    for (std::size_t j = i + 1; j < metas.size(); ++j)
      if (metas[i].name == metas[j].name)
        throw DataError("duplicate feature name: '" + metas[i].name + "'");

  if (label_out) *label_out = label;
  return metas;
}

Dataset load_dataset(const std::string& data_path, const std::string& meta_path) {
  LabelSpec label;
  std::vector<FeatureMeta> metas = parse_feature_meta(read_file(meta_path), &label);

  std::ifstream in(data_path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + data_path);

  std::string line;
  if (!std::getline(in, line)) throw DataError("empty CSV: " + data_path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header = split_csv_line(line, 1);
  for (auto& h : header) h = trim(h);

  auto column_of = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError("missing column: '" + name + "'");
    return static_cast<int>(it - header.begin());
  };

  std::vector<int> feat_col(metas.size());
  for (std::size_t d = 0; d < metas.size(); ++d) feat_col[d] = column_of(metas[d].name);
  int label_col = column_of(label.column);

  std::vector<std::vector<double>> rows;
  std::vector<int> ys;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells = split_csv_line(line, line_no);
    if (cells.size() != header.size())
      throw DataError("row " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                      " cells, header has " + std::to_string(header.size()));

    std::vector<double> row(metas.size());
    for (std::size_t d = 0; d < metas.size(); ++d) {
      const FeatureMeta& m = metas[d];
      double v = parse_cell(cells[static_cast<std::size_t>(feat_col[d])], line_no, m.name);
      if (v < m.min || v > m.max)
        throw DataError("row " + std::to_string(line_no) + ", column " + m.name + ": value " +
                        std::to_string(v) + " outside [" + std::to_string(m.min) + ", " +
                        std::to_string(m.max) + "]");
      if (m.kind != FeatureKind::continuous && v != std::floor(v))
        throw DataError("row " + std::to_string(line_no) + ", column " + m.name +
                        ": expected an integral value, got '" +
                        cells[static_cast<std::size_t>(feat_col[d])] + "'");
      row[d] = v;
    }

    std::string raw_label = trim(cells[static_cast<std::size_t>(label_col)]);
    if (raw_label == label.positive) {
      ys.push_back(+1);
    } else if (raw_label == label.negative) {
      ys.push_back(-1);
    } else {
      throw DataError("row " + std::to_string(line_no) + ": label '" + raw_label +
                      "' is neither '" + label.positive + "' nor '" + label.negative + "'");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("CSV has a header but no data rows: " + data_path);

  Dataset ds;
  ds.features = std::move(metas);
  ds.label = label;
  ds.X.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(ds.features.size()));
  ds.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t n = 0; n < rows.size(); ++n) {
    for (std::size_t d = 0; d < ds.features.size(); ++d)
      ds.X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d)) = rows[n][d];
    ds.y(static_cast<Eigen::Index>(n)) = ys[n];
  }
  return ds;
}

Dataset Dataset::subset(const std::vector<int>& rows) const {
  Dataset out;
  out.features = features;
  out.label = label;
  out.X.resize(static_cast<Eigen::Index>(rows.size()), X.cols());
  out.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.X.row(static_cast<Eigen::Index>(i)) = X.row(rows[i]);
    out.y(static_cast<Eigen::Index>(i)) = y(rows[i]);
  }
  return out;
}

ThresholdSet build_thresholds(const Dataset& ds) {
  ThresholdSet out(static_cast<std::size_t>(ds.d()));
  std::vector<double> vals;
  for (int d = 0; d < ds.d(); ++d) {
    vals.assign(ds.X.col(d).data(), ds.X.col(d).data() + ds.n());
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    auto& b = out[static_cast<std::size_t>(d)];
    b.reserve(vals.size());
    for (std::size_t j = 0; j + 1 < vals.size(); ++j)
      b.push_back(0.5 * (vals[j] + vals[j + 1]));
  }
  return out;
}

SortPermutations sort_permutations(const Dataset& ds) {
  SortPermutations out(static_cast<std::size_t>(ds.d()));
  for (int d = 0; d < ds.d(); ++d) {
    auto& perm = out[static_cast<std::size_t>(d)];
    perm.resize(static_cast<std::size_t>(ds.n()));
    for (int n = 0; n < ds.n(); ++n) perm[static_cast<std::size_t>(n)] = n;
    std::stable_sort(perm.begin(), perm.end(),
                     [&](std::int32_t a, std::int32_t b) { return ds.X(a, d) < ds.X(b, d); });
  }
  return out;
}

QuantileTable build_quantiles(const Dataset& ds) {
  QuantileTable qt;
  qt.values.resize(static_cast<std::size_t>(ds.d()));
  qt.cdf.resize(static_cast<std::size_t>(ds.d()));
  const double n = static_cast<double>(ds.n());
  std::vector<double> vals;
  for (int d = 0; d < ds.d(); ++d) {
    vals.assign(ds.X.col(d).data(), ds.X.col(d).data() + ds.n());
    std::sort(vals.begin(), vals.end());
    auto& vs = qt.values[static_cast<std::size_t>(d)];
    auto& cs = qt.cdf[static_cast<std::size_t>(d)];
    std::size_t i = 0;
    while (i < vals.size()) {
      std::size_t j = i;
      while (j < vals.size() && vals[j] == vals[i]) ++j;
      vs.push_back(vals[i]);
      cs.push_back(static_cast<double>(j) / n);  // count of values <= vals[i]
      i = j;
    }
  }
  return qt;
}

double QuantileTable::at(int d, double v) const {
  const auto& vs = values[static_cast<std::size_t>(d)];
  const auto& cs = cdf[static_cast<std::size_t>(d)];
  auto it = std::upper_bound(vs.begin(), vs.end(), v);
  if (it == vs.begin()) return 0.0;
  return cs[static_cast<std::size_t>(it - vs.begin() - 1)];
}

}  // namespace ract
