#include "gapdecomp/regress.hpp"

#include <cmath>
#include <unordered_map>

#include <Eigen/QR>

#include "gapdecomp/error.hpp"

namespace gapdecomp {

std::string ColumnTag::label() const {
  switch (kind) {
    case ColumnKind::Intercept: return "intercept";
    case ColumnKind::Dummy: return "dummy(g" + std::to_string(group) + ")";
    case ColumnKind::Mediator:
      return "mediator(l" + std::to_string(level) + ",g" + std::to_string(group) + ")";
  }
  return "?";
}

DesignMatrix::DesignMatrix(std::size_t rows) : rows_(static_cast<Eigen::Index>(rows)) {}

void DesignMatrix::add_column(ColumnTag tag, const Eigen::Ref<const Eigen::VectorXd>& values) {
  if (values.size() != rows_) {
    throw Error(ErrorCode::MalformedInput, "column " + tag.label() + " has wrong length");
  }
  if (find(tag) >= 0) {
    throw Error(ErrorCode::MalformedInput, "duplicate column tag " + tag.label());
  }
  tags_.push_back(tag);
  columns_.emplace_back(values);
}

void DesignMatrix::add_intercept() {
  add_column(ColumnTag::intercept(), Eigen::VectorXd::Ones(rows_));
}

Eigen::MatrixXd DesignMatrix::matrix() const {
  Eigen::MatrixXd x(rows_, static_cast<Eigen::Index>(columns_.size()));
  for (std::size_t j = 0; j < columns_.size(); ++j) x.col(static_cast<Eigen::Index>(j)) = columns_[j];
  return x;
}

int DesignMatrix::find(const ColumnTag& tag) const {
  for (std::size_t j = 0; j < tags_.size(); ++j) {
    if (tags_[j] == tag) return static_cast<int>(j);
  }
  return -1;
}

int OlsFit::find(const ColumnTag& tag) const {
  for (std::size_t j = 0; j < tags.size(); ++j) {
    if (tags[j] == tag) return static_cast<int>(j);
  }
  return -1;
}

double OlsFit::coefficient(const ColumnTag& tag) const {
  const int j = find(tag);
  if (j < 0) throw Error(ErrorCode::IncompleteParameters, "no coefficient for " + tag.label());
  return coefficients(j);
}

OlsFit fit_ols(const DesignMatrix& x, const Eigen::Ref<const Eigen::VectorXd>& y) {
  const std::size_t n = x.rows();
  const std::size_t k = x.cols();
  if (static_cast<std::size_t>(y.size()) != n) {
    throw Error(ErrorCode::MalformedInput, "outcome length does not match design rows");
  }
  if (k == 0) throw Error(ErrorCode::MalformedInput, "design has no columns");
  if (n < k) {
    throw Error(ErrorCode::RankDeficient, "fewer rows (" + std::to_string(n) +
                                              ") than columns (" + std::to_string(k) + ")");
  }
  if (x.find(ColumnTag::intercept()) < 0) {
    throw Error(ErrorCode::MalformedInput, "design has no intercept");
  }

  OlsFit fit;
  fit.tags = x.tags();
  fit.design = x.matrix();
  fit.n = n;
  fit.k = k;
  if (!fit.design.allFinite() || !y.allFinite()) {
    throw Error(ErrorCode::MalformedInput, "non-finite entries in regression input");
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(fit.design);
  qr.setThreshold(1e-10);
  fit.rank = static_cast<std::size_t>(qr.rank());
  if (fit.rank < k) {
    std::string names;
    const auto& perm = qr.colsPermutation().indices();
    for (std::size_t j = fit.rank; j < k; ++j) {
      names += (names.empty() ? "" : ", ") + fit.tags[static_cast<std::size_t>(perm(static_cast<Eigen::Index>(j)))].label();
    }
    throw Error(ErrorCode::RankDeficient, "collinear regressors: " + names);
  }

  fit.coefficients = qr.solve(y);
  fit.fitted = fit.design * fit.coefficients;
  fit.residuals = y - fit.fitted;

  const Eigen::Index kk = static_cast<Eigen::Index>(k);
  const Eigen::MatrixXd r =
      qr.matrixQR().topLeftCorner(kk, kk).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv =
      r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(kk, kk));
  const Eigen::MatrixXd permuted = r_inv * r_inv.transpose();
  const auto& p = qr.colsPermutation();
  fit.xtx_inverse = p * permuted * p.transpose();

  const double mean = y.mean();
  const double tss = (y.array() - mean).square().sum();
  fit.r_squared = tss > 0.0 ? 1.0 - fit.residuals.squaredNorm() / tss : 0.0;
  return fit;
}

ClusterCov cluster_cov(const OlsFit& fit, std::span<const int> cluster_ids,
                       Correction correction, std::size_t cluster_level) {
  if (cluster_ids.size() != fit.n) {
    throw Error(ErrorCode::MalformedInput, "cluster ids do not match fitted rows");
  }
  std::unordered_map<int, Eigen::Index> slot;
  for (int id : cluster_ids) slot.emplace(id, static_cast<Eigen::Index>(slot.size()));
  const auto clusters = static_cast<Eigen::Index>(slot.size());
  if (clusters < 2) {
    throw Error(ErrorCode::TooFewClusters,
                "cluster-robust covariance needs at least 2 clusters, found " +
                    std::to_string(clusters));
  }

  const Eigen::Index k = static_cast<Eigen::Index>(fit.k);
  Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(clusters, k);
  for (std::size_t i = 0; i < fit.n; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    scores.row(slot.at(cluster_ids[i])) += fit.design.row(row) * fit.residuals(row);
  }
  const Eigen::MatrixXd meat = scores.transpose() * scores;
  Eigen::MatrixXd v = fit.xtx_inverse * meat * fit.xtx_inverse;
  if (correction == Correction::CR1) {
    const double c = static_cast<double>(clusters);
    const double n = static_cast<double>(fit.n);
    const double kd = static_cast<double>(fit.k);
    if (fit.n > fit.k) v *= (c / (c - 1.0)) * ((n - 1.0) / (n - kd));
  }
  ClusterCov out;
  out.matrix = 0.5 * (v + v.transpose());
  out.cluster_level = cluster_level;
  out.n_clusters = static_cast<std::size_t>(clusters);
  out.correction = correction;
  return out;
}

double within_estimator(const Dataset& dataset, const CodedGroups& coded, std::size_t level,
                        int target) {
  const Eigen::Index gm1 = coded.dummies.cols();
  if (target < 2 || target > gm1 + 1) {
    throw Error(ErrorCode::InvalidConfig, "target group index out of range");
  }
  const auto clusters = dataset.cluster_index(level);
  const auto n = static_cast<Eigen::Index>(dataset.size());
  const auto nc = static_cast<Eigen::Index>(dataset.cluster_count(level));

  Eigen::VectorXd size = Eigen::VectorXd::Zero(nc);
  Eigen::VectorXd y_sum = Eigen::VectorXd::Zero(nc);
  Eigen::MatrixXd d_sum = Eigen::MatrixXd::Zero(nc, gm1);
  const auto y = dataset.outcome();
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto c = clusters[static_cast<std::size_t>(i)];
    size(c) += 1.0;
    y_sum(c) += y[static_cast<std::size_t>(i)];
    d_sum.row(c) += coded.dummies.row(i);
  }

  // Within variation of the target dummy from integer counts: zero iff every
  // cluster is homogeneous with respect to it.
  bool target_varies = false;
  for (Eigen::Index c = 0; c < nc; ++c) {
    const double m = d_sum(c, target - 2);
    if (m > 0.0 && m < size(c)) target_varies = true;
  }
  if (!target_varies) {
    throw Error(ErrorCode::NoWithinVariance,
                "no " + dataset.hierarchy().level_names[level - 1] +
                    " mixes the target group with other groups");
  }

  Eigen::VectorXd y_dm(n);
  Eigen::MatrixXd d_dm(n, gm1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto c = clusters[static_cast<std::size_t>(i)];
    y_dm(i) = y[static_cast<std::size_t>(i)] - y_sum(c) / size(c);
    d_dm.row(i) = coded.dummies.row(i) - d_sum.row(c) / size(c);
  }
  const Eigen::MatrixXd gram = d_dm.transpose() * d_dm;
  const Eigen::VectorXd rhs = d_dm.transpose() * y_dm;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 1e-12 * gram.diagonal().maxCoeff()) {
    throw Error(ErrorCode::NoWithinVariance, "demeaned group dummies are collinear");
  }
  const Eigen::VectorXd beta = ldlt.solve(rhs);
  return beta(target - 2);
}

}  // namespace gapdecomp
