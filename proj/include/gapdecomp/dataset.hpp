#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace gapdecomp {

/// Ordered cluster levels, finest first (e.g. {"school", "district"}).
/// The unit level is implicit and numbered 0; named levels are 1..L.
struct Hierarchy {
  std::vector<std::string> level_names;

  std::size_t levels() const { return level_names.size(); }
  void validate() const;
};

struct Record {
  std::string unit_id;
  double outcome = 0.0;
  std::string group;
  std::vector<std::string> cluster_path;  // one id per level, finest first
};

/// Maps dataset roles onto CSV header names. `unit_id` may be empty, in
/// which case the 1-based data row number is used.
struct ColumnSchema {
  std::string outcome;
  std::string group;
  std::vector<std::string> levels;  // finest first, same length as Hierarchy
  std::string unit_id;
};

/// Immutable unit-level data in columnar form.
///
/// Rows are stored in a canonical order (cluster path from the coarsest
/// level down, then group, outcome and unit id), so two inputs that differ
/// only by row order produce bit-identical datasets. Group labels and the
/// cluster ids of every level are kept sorted; per-row indices point into
/// those tables.
class Dataset {
 public:
  static Dataset from_records(Hierarchy hierarchy, std::vector<Record> records,
                              std::size_t dropped_rows = 0);

  const Hierarchy& hierarchy() const { return hierarchy_; }
  std::size_t levels() const { return hierarchy_.levels(); }
  std::size_t size() const { return outcome_.size(); }
  std::size_t dropped_rows() const { return dropped_rows_; }

  std::span<const double> outcome() const { return outcome_; }
  const std::string& unit_id(std::size_t row) const { return unit_ids_[row]; }

  const std::vector<std::string>& group_labels() const { return group_labels_; }
  std::span<const int> group_index() const { return group_index_; }
  bool has_group(std::string_view label) const;

  // `level` is 1..L.
  const std::vector<std::string>& cluster_names(std::size_t level) const;
  std::span<const int> cluster_index(std::size_t level) const;
  std::size_t cluster_count(std::size_t level) const {
    return cluster_names(level).size();
  }

  Record record(std::size_t row) const;
  std::vector<Record> records() const;

  Dataset with_outcome(std::vector<double> outcome) const;

 private:
  Hierarchy hierarchy_;
  std::size_t dropped_rows_ = 0;
  std::vector<double> outcome_;
  std::vector<std::string> unit_ids_;
  std::vector<std::string> group_labels_;
  std::vector<int> group_index_;
  std::vector<std::vector<std::string>> cluster_names_;
  std::vector<std::vector<int>> cluster_index_;
};

Dataset parse_dataset(std::string_view csv, const ColumnSchema& schema,
                      const Hierarchy& hierarchy);

struct NestingViolation {
  std::size_t level = 0;  // level of the child cluster; parents live at level + 1
  std::string child;
  std::vector<std::string> parents;
};

struct NestingReport {
  std::vector<NestingViolation> violations;
  bool passed() const { return violations.empty(); }
};

/// With `strict` set, the first violation is raised as a NestingViolation
/// error instead of being returned in the report.
NestingReport check_nesting(const Dataset& dataset, bool strict = false);

/// Group 1 is the reference; comparison groups are numbered 2..G and
/// stored here in order (index 0 is group 2).
struct GroupCoding {
  std::string reference;
  std::vector<std::string> comparison_groups;

  std::size_t groups() const { return comparison_groups.size() + 1; }
  // 0 for the reference, 1..G-1 for comparison groups, -1 if unknown.
  int code_of(std::string_view label) const;
};

struct CodedGroups {
  GroupCoding coding;
  std::vector<int> code;    // per row, 0 = reference
  Eigen::MatrixXd dummies;  // n x (G-1), column c is D_{c+2}
};

CodedGroups encode_groups(const Dataset& dataset, std::string_view reference);

struct MediatorColumn {
  std::size_t level = 0;
  std::string group;
  Eigen::VectorXd values;
};

/// Share of `group` among the records of each row's level-`level` cluster,
/// the row itself included.
MediatorColumn compute_proportions(const Dataset& dataset, std::size_t level,
                                   std::string_view group);

/// Outcome rescaled to mean 0 and population standard deviation 1.
Dataset standardize(const Dataset& dataset);

/// Drops finest-level clusters whose records all share one group.
Dataset exclude_homogeneous(const Dataset& dataset);

}  // namespace gapdecomp
