#include "gapdecomp/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <set>
#include <tuple>
#include <unordered_map>

#include "csv.hpp"
#include "gapdecomp/error.hpp"

namespace gapdecomp {

namespace {

std::vector<std::string> sorted_unique(std::vector<std::string> values) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  return values;
}

int index_in(const std::vector<std::string>& sorted, const std::string& value) {
  auto it = std::lower_bound(sorted.begin(), sorted.end(), value);
  return static_cast<int>(it - sorted.begin());
}

bool parse_double(std::string_view text, double& out) {
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

}  // namespace

void Hierarchy::validate() const {
  if (level_names.empty()) {
    throw Error(ErrorCode::InvalidConfig, "hierarchy needs at least one level");
  }
  std::set<std::string> seen;
  for (const auto& name : level_names) {
    if (name.empty()) throw Error(ErrorCode::InvalidConfig, "empty level name");
    if (!seen.insert(name).second) {
      throw Error(ErrorCode::InvalidConfig, "duplicate level name '" + name + "'");
    }
  }
}

Dataset Dataset::from_records(Hierarchy hierarchy, std::vector<Record> records,
                              std::size_t dropped_rows) {
  hierarchy.validate();
  const std::size_t L = hierarchy.levels();
  if (records.empty()) throw Error(ErrorCode::EmptyDataset, "dataset has no usable rows");

  for (auto& r : records) {
    if (!std::isfinite(r.outcome)) {
      throw Error(ErrorCode::NonNumericOutcome, "non-finite outcome for unit '" + r.unit_id + "'");
    }
    r.group = std::string(csv::trim(r.group));
    if (r.group.empty()) {
      throw Error(ErrorCode::MalformedInput, "empty group label for unit '" + r.unit_id + "'");
    }
    if (r.cluster_path.size() != L) {
      throw Error(ErrorCode::MalformedInput,
                  "cluster path of unit '" + r.unit_id + "' has " +
                      std::to_string(r.cluster_path.size()) + " ids, expected " +
                      std::to_string(L));
    }
    for (auto& id : r.cluster_path) {
      id = std::string(csv::trim(id));
      if (id.empty()) {
        throw Error(ErrorCode::MalformedInput, "empty cluster id for unit '" + r.unit_id + "'");
      }
    }
  }

  std::sort(records.begin(), records.end(), [L](const Record& a, const Record& b) {
    for (std::size_t l = L; l-- > 0;) {
      if (a.cluster_path[l] != b.cluster_path[l]) return a.cluster_path[l] < b.cluster_path[l];
    }
    return std::tie(a.group, a.outcome, a.unit_id) < std::tie(b.group, b.outcome, b.unit_id);
  });

  Dataset d;
  d.hierarchy_ = std::move(hierarchy);
  d.dropped_rows_ = dropped_rows;
  const std::size_t n = records.size();

  std::vector<std::string> labels;
  labels.reserve(n);
  for (const auto& r : records) labels.push_back(r.group);
  d.group_labels_ = sorted_unique(std::move(labels));

  d.cluster_names_.resize(L);
  d.cluster_index_.resize(L);
  for (std::size_t l = 0; l < L; ++l) {
    std::vector<std::string> ids;
    ids.reserve(n);
    for (const auto& r : records) ids.push_back(r.cluster_path[l]);
    d.cluster_names_[l] = sorted_unique(std::move(ids));
    d.cluster_index_[l].reserve(n);
  }

  d.outcome_.reserve(n);
  d.unit_ids_.reserve(n);
  d.group_index_.reserve(n);
  for (auto& r : records) {
    d.outcome_.push_back(r.outcome);
    d.group_index_.push_back(index_in(d.group_labels_, r.group));
    for (std::size_t l = 0; l < L; ++l) {
      d.cluster_index_[l].push_back(index_in(d.cluster_names_[l], r.cluster_path[l]));
    }
    d.unit_ids_.push_back(std::move(r.unit_id));
  }
  return d;
}

bool Dataset::has_group(std::string_view label) const {
  return std::binary_search(group_labels_.begin(), group_labels_.end(), label);
}

const std::vector<std::string>& Dataset::cluster_names(std::size_t level) const {
  if (level < 1 || level > levels()) {
    throw Error(ErrorCode::InvalidConfig, "level " + std::to_string(level) + " out of range");
  }
  return cluster_names_[level - 1];
}

std::span<const int> Dataset::cluster_index(std::size_t level) const {
  if (level < 1 || level > levels()) {
    throw Error(ErrorCode::InvalidConfig, "level " + std::to_string(level) + " out of range");
  }
  return cluster_index_[level - 1];
}

Record Dataset::record(std::size_t row) const {
  Record r;
  r.unit_id = unit_ids_[row];
  r.outcome = outcome_[row];
  r.group = group_labels_[group_index_[row]];
  for (std::size_t l = 0; l < levels(); ++l) {
    r.cluster_path.push_back(cluster_names_[l][cluster_index_[l][row]]);
  }
  return r;
}

std::vector<Record> Dataset::records() const {
  std::vector<Record> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back(record(i));
  return out;
}

Dataset Dataset::with_outcome(std::vector<double> outcome) const {
  if (outcome.size() != size()) {
    throw Error(ErrorCode::MalformedInput, "outcome length does not match dataset");
  }
  Dataset d = *this;
  d.outcome_ = std::move(outcome);
  return d;
}

Dataset parse_dataset(std::string_view text, const ColumnSchema& schema,
                      const Hierarchy& hierarchy) {
  hierarchy.validate();
  if (schema.levels.size() != hierarchy.levels()) {
    throw Error(ErrorCode::InvalidConfig, "schema names " + std::to_string(schema.levels.size()) +
                                              " level columns but hierarchy has " +
                                              std::to_string(hierarchy.levels()));
  }
  const auto rows = csv::parse(text);
  if (rows.empty()) throw Error(ErrorCode::EmptyDataset, "CSV has no header row");

  std::unordered_map<std::string, std::size_t> header;
  for (std::size_t c = 0; c < rows[0].size(); ++c) {
    header.emplace(std::string(csv::trim(rows[0][c])), c);
  }
  auto column = [&](const std::string& name) {
    auto it = header.find(name);
    if (it == header.end()) {
      throw Error(ErrorCode::MissingColumn, "column '" + name + "' not found in header");
    }
    return it->second;
  };
  const std::size_t outcome_col = column(schema.outcome);
  const std::size_t group_col = column(schema.group);
  std::vector<std::size_t> level_cols;
  for (const auto& name : schema.levels) level_cols.push_back(column(name));
  const bool has_id = !schema.unit_id.empty();
  const std::size_t id_col = has_id ? column(schema.unit_id) : 0;

  std::vector<Record> records;
  std::size_t dropped = 0;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() == 1 && csv::trim(row[0]).empty()) continue;  // blank line
    auto cell = [&](std::size_t c) -> std::string_view {
      return c < row.size() ? csv::trim(row[c]) : std::string_view{};
    };

    Record rec;
    const auto y = cell(outcome_col);
    bool missing = y.empty() || cell(group_col).empty();
    for (auto c : level_cols) missing = missing || cell(c).empty();
    if (!y.empty() && !parse_double(y, rec.outcome)) {
      throw Error(ErrorCode::NonNumericOutcome,
                  "outcome '" + std::string(y) + "' on data row " + std::to_string(r) +
                      " is not numeric");
    }
    if (!y.empty() && !std::isfinite(rec.outcome)) {
      throw Error(ErrorCode::NonNumericOutcome,
                  "outcome on data row " + std::to_string(r) + " is not finite");
    }
    if (missing) {
      ++dropped;
      continue;
    }
    rec.group = std::string(cell(group_col));
    for (auto c : level_cols) rec.cluster_path.emplace_back(cell(c));
    rec.unit_id = has_id ? std::string(cell(id_col)) : std::to_string(r);
    records.push_back(std::move(rec));
  }
  if (records.empty()) throw Error(ErrorCode::EmptyDataset, "no usable rows after dropping missing cells");
  return Dataset::from_records(hierarchy, std::move(records), dropped);
}

NestingReport check_nesting(const Dataset& dataset, bool strict) {
  NestingReport report;
  for (std::size_t l = 1; l < dataset.levels(); ++l) {
    const auto child = dataset.cluster_index(l);
    const auto parent = dataset.cluster_index(l + 1);
    std::vector<std::set<int>> parents(dataset.cluster_count(l));
    for (std::size_t i = 0; i < dataset.size(); ++i) parents[child[i]].insert(parent[i]);
    for (std::size_t c = 0; c < parents.size(); ++c) {
      if (parents[c].size() < 2) continue;
      NestingViolation v;
      v.level = l;
      v.child = dataset.cluster_names(l)[c];
      for (int p : parents[c]) v.parents.push_back(dataset.cluster_names(l + 1)[p]);
      if (strict) {
        std::string names;
        for (const auto& p : v.parents) names += (names.empty() ? "" : ", ") + p;
        throw Error(ErrorCode::NestingViolation,
                    dataset.hierarchy().level_names[l - 1] + " '" + v.child +
                        "' appears under several " + dataset.hierarchy().level_names[l] +
                        " clusters: " + names);
      }
      report.violations.push_back(std::move(v));
    }
  }
  return report;
}

int GroupCoding::code_of(std::string_view label) const {
  if (label == reference) return 0;
  for (std::size_t i = 0; i < comparison_groups.size(); ++i) {
    if (comparison_groups[i] == label) return static_cast<int>(i) + 1;
  }
  return -1;
}

CodedGroups encode_groups(const Dataset& dataset, std::string_view reference) {
  if (!dataset.has_group(reference)) {
    throw Error(ErrorCode::UnknownReference,
                "reference group '" + std::string(reference) + "' does not occur in the data");
  }
  if (dataset.group_labels().size() < 2) {
    throw Error(ErrorCode::SingletonPopulation, "only one group present; there is no gap");
  }
  CodedGroups out;
  out.coding.reference = std::string(reference);
  std::vector<int> code_of_label(dataset.group_labels().size(), 0);
  for (std::size_t i = 0; i < dataset.group_labels().size(); ++i) {
    const auto& label = dataset.group_labels()[i];
    if (label == reference) continue;
    out.coding.comparison_groups.push_back(label);
    code_of_label[i] = static_cast<int>(out.coding.comparison_groups.size());
  }
  const std::size_t n = dataset.size();
  out.code.resize(n);
  out.dummies = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                      static_cast<Eigen::Index>(out.coding.groups() - 1));
  const auto groups = dataset.group_index();
  for (std::size_t i = 0; i < n; ++i) {
    const int c = code_of_label[groups[i]];
    out.code[i] = c;
    if (c > 0) out.dummies(static_cast<Eigen::Index>(i), c - 1) = 1.0;
  }
  return out;
}

MediatorColumn compute_proportions(const Dataset& dataset, std::size_t level,
                                   std::string_view group) {
  const auto clusters = dataset.cluster_index(level);
  const auto& labels = dataset.group_labels();
  auto it = std::lower_bound(labels.begin(), labels.end(), group);
  const int target = (it != labels.end() && *it == group) ? static_cast<int>(it - labels.begin()) : -1;

  std::vector<std::size_t> members(dataset.cluster_count(level), 0);
  std::vector<std::size_t> sizes(dataset.cluster_count(level), 0);
  const auto groups = dataset.group_index();
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    ++sizes[clusters[i]];
    if (groups[i] == target) ++members[clusters[i]];
  }
  MediatorColumn col;
  col.level = level;
  col.group = std::string(group);
  col.values.resize(static_cast<Eigen::Index>(dataset.size()));
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto c = clusters[i];
    col.values(static_cast<Eigen::Index>(i)) =
        static_cast<double>(members[c]) / static_cast<double>(sizes[c]);
  }
  return col;
}

Dataset standardize(const Dataset& dataset) {
  const auto y = dataset.outcome();
  if (y.size() < 2) throw Error(ErrorCode::ZeroVariance, "need at least two records to standardize");
  const double n = static_cast<double>(y.size());
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : y) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / n);
  if (!(sd > 0.0) || sd <= 1e-14 * (std::abs(mean) + 1.0)) {
    throw Error(ErrorCode::ZeroVariance, "outcome has zero variance");
  }
  std::vector<double> z(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) z[i] = (y[i] - mean) / sd;
  return dataset.with_outcome(std::move(z));
}

Dataset exclude_homogeneous(const Dataset& dataset) {
  const auto clusters = dataset.cluster_index(1);
  const auto groups = dataset.group_index();
  std::vector<int> first_group(dataset.cluster_count(1), -1);
  std::vector<bool> mixed(dataset.cluster_count(1), false);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    auto& g = first_group[clusters[i]];
    if (g < 0) g = groups[i];
    else if (g != groups[i]) mixed[clusters[i]] = true;
  }
  std::vector<Record> kept;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (mixed[clusters[i]]) kept.push_back(dataset.record(i));
  }
  if (kept.empty()) {
    throw Error(ErrorCode::EmptyDataset, "every " + dataset.hierarchy().level_names[0] +
                                             " is homogeneous; nothing left after exclusion");
  }
  return Dataset::from_records(dataset.hierarchy(), std::move(kept), dataset.dropped_rows());
}

}  // namespace gapdecomp
