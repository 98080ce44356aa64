#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gapdecomp/dataset.hpp"

namespace gapdecomp {

/// Generative model for hierarchical populations.
///
/// Top clusters draw a group-share vector from Dirichlet(concentration *
/// group_weights); each child cluster draws Dirichlet(jitter * parent share)
/// (jitter <= 0 copies the parent share). Units in a finest cluster draw
/// their group from that cluster's share, and the outcome follows the
/// contextual model
///   y = alpha + beta^W_g(i) + sum_l sum_g beta^{lg} * share_l,g(i) + noise
/// with realized (self-inclusive) cluster shares.
struct SynthConfig {
  std::size_t groups = 2;
  std::size_t levels = 1;
  std::size_t top_clusters = 20;
  std::size_t children_min = 2;  // children per cluster below the top level
  std::size_t children_max = 4;
  std::size_t units_min = 20;  // units per finest cluster
  std::size_t units_max = 40;
  std::vector<double> group_weights;  // size G, default equal
  double concentration = 1.0;
  double jitter = 10.0;
  double alpha = 0.0;
  std::vector<double> within_gaps;  // size G-1
  Eigen::MatrixXd contextual;       // L x (G-1)
  double noise_sd = 1.0;
  std::uint64_t seed = 0;
  bool strict = false;  // fail instead of redrawing when a group is empty
  std::vector<std::string> group_labels;  // default g1..gG, g1 = reference
  std::vector<std::string> level_names;   // default level1..levelL

  /// Fills defaults (weights, labels, names, zero coefficients) and checks
  /// the invariants.
  void normalize();
};

struct TrueParams {
  double alpha = 0.0;
  std::vector<double> within_gaps;
  Eigen::MatrixXd contextual;
  double noise_sd = 0.0;
  std::string reference;
  std::vector<std::string> groups;  // comparison groups, g = 2..G
  std::uint64_t seed = 0;
  std::size_t attempts = 1;
};

struct SynthResult {
  Dataset dataset;
  TrueParams truth;
};

SynthResult generate(SynthConfig config);

/// CSV with columns unit_id,outcome,group,<level names finest first>.
std::string to_csv(const Dataset& dataset);

/// Least squares via the normal equations and Gaussian elimination with
/// partial pivoting. Independent of fit_ols; meant for small problems.
std::vector<double> oracle_ols(const std::vector<std::vector<double>>& x,
                               const std::vector<double>& y);

struct OmegaTriple {
  double regression = 0.0;
  double variance_ratio = 0.0;
  double mean_difference = 0.0;
};

/// Three routes to the two-group level-1 segregation index.
OmegaTriple oracle_omega(const Dataset& dataset, const std::string& reference);

}  // namespace gapdecomp
