#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gapdecomp/dataset.hpp"

namespace gapdecomp {

enum class ColumnKind { Intercept, Dummy, Mediator };

/// Identifies a regressor. `group` is the 1-based comparison-group index
/// (2..G, matching D_g); `level` is 1..L for mediators.
struct ColumnTag {
  ColumnKind kind = ColumnKind::Intercept;
  int group = 0;
  int level = 0;

  static ColumnTag intercept() { return {}; }
  static ColumnTag dummy(int g) { return {ColumnKind::Dummy, g, 0}; }
  static ColumnTag mediator(int l, int g) { return {ColumnKind::Mediator, g, l}; }

  std::string label() const;
  friend bool operator==(const ColumnTag&, const ColumnTag&) = default;
};

class DesignMatrix {
 public:
  explicit DesignMatrix(std::size_t rows);

  void add_column(ColumnTag tag, const Eigen::Ref<const Eigen::VectorXd>& values);
  void add_intercept();

  std::size_t rows() const { return static_cast<std::size_t>(rows_); }
  std::size_t cols() const { return tags_.size(); }
  const std::vector<ColumnTag>& tags() const { return tags_; }
  Eigen::MatrixXd matrix() const;

  // Index of `tag`, or -1.
  int find(const ColumnTag& tag) const;

 private:
  Eigen::Index rows_;
  std::vector<ColumnTag> tags_;
  std::vector<Eigen::VectorXd> columns_;
};

struct OlsFit {
  std::vector<ColumnTag> tags;
  Eigen::MatrixXd design;
  Eigen::VectorXd coefficients;
  Eigen::VectorXd residuals;
  Eigen::VectorXd fitted;
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t rank = 0;
  Eigen::MatrixXd xtx_inverse;
  double r_squared = 0.0;

  double coefficient(const ColumnTag& tag) const;
  int find(const ColumnTag& tag) const;
};

/// Least squares through column-pivoted Householder QR. Columns whose
/// pivot falls below 1e-10 times the largest pivot are reported in a
/// RankDeficient error.
OlsFit fit_ols(const DesignMatrix& x, const Eigen::Ref<const Eigen::VectorXd>& y);

enum class Correction { CR0, CR1 };

struct ClusterCov {
  Eigen::MatrixXd matrix;
  std::size_t cluster_level = 0;  // 0 = unit
  std::size_t n_clusters = 0;
  Correction correction = Correction::CR1;

  Eigen::VectorXd standard_errors() const { return matrix.diagonal().cwiseMax(0.0).cwiseSqrt(); }
};

/// Sandwich (X'X)^-1 (sum_c X_c' e_c e_c' X_c) (X'X)^-1, optionally scaled
/// by C/(C-1) * (n-1)/(n-k). `cluster_ids` holds one integer id per row.
ClusterCov cluster_cov(const OlsFit& fit, std::span<const int> cluster_ids,
                       Correction correction, std::size_t cluster_level = 0);

/// Fixed-effects slope of D_g: y and every comparison dummy are demeaned
/// within level-`level` clusters and y is regressed on the demeaned dummies.
/// `target` is the comparison-group index 2..G.
double within_estimator(const Dataset& dataset, const CodedGroups& coded,
                        std::size_t level, int target);

}  // namespace gapdecomp
