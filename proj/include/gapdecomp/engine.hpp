#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "gapdecomp/dataset.hpp"
#include "gapdecomp/regress.hpp"

namespace gapdecomp {

enum class EquationKind { Total, Outcome, Mediation };

/// One fitted regression: coefficients by tag plus their cluster-robust
/// covariance. Mediation equations carry the (level, group) of their
/// left-hand-side proportion; group is 2..G.
struct EquationEstimate {
  EquationKind kind = EquationKind::Total;
  int level = 0;
  int group = 0;
  std::vector<ColumnTag> tags;
  Eigen::VectorXd coefficients;
  Eigen::MatrixXd covariance;  // empty when not estimated
  std::size_t n = 0;
  std::size_t n_clusters = 0;
  double r_squared = 0.0;

  std::string name() const;
  int find(const ColumnTag& tag) const;
};

/// Every coefficient the decompositions need.
///
/// Containers are indexed by position: comparison group g (2..G) sits at
/// index g-2 and level l (1..L) at index l-1.
///   total_gaps(g)            beta_g
///   within_gaps(g)           beta^W_g
///   contextual(l, g)         beta^{lg}
///   segregation[l](g, g')    omega_g^{lg'}: coefficient of D_g in the
///                            regression of the level-l share of g'
struct ParameterSet {
  std::string reference;
  std::vector<std::string> groups;
  std::vector<std::string> level_names;
  Eigen::VectorXd total_gaps;
  Eigen::VectorXd within_gaps;
  Eigen::MatrixXd contextual;
  std::vector<Eigen::MatrixXd> segregation;
  Eigen::MatrixXd mediation_intercepts;
  Eigen::MatrixXd max_proportion;  // L x (G-1); NaN when unknown
  std::vector<EquationEstimate> equations;

  std::size_t comparison_groups() const { return groups.size(); }
  std::size_t levels() const { return level_names.size(); }
  double omega(std::size_t level_index, std::size_t receiving, std::size_t mediator) const {
    return segregation[level_index](static_cast<Eigen::Index>(receiving),
                                    static_cast<Eigen::Index>(mediator));
  }
  int group_index(std::string_view label) const;

  /// Throws IncompleteParameters unless every slot is sized for G and L
  /// and finite.
  void validate() const;

  /// Builds a parameter set whose slots are read from the equations by tag.
  static ParameterSet from_equations(std::string reference, std::vector<std::string> groups,
                                     std::vector<std::string> level_names,
                                     std::vector<EquationEstimate> equations);

  /// Replaces the coefficients of every equation (same order as
  /// `equations`) and re-reads the slots.
  ParameterSet with_coefficients(const std::vector<Eigen::VectorXd>& coefficients) const;
};

struct EstimationOptions {
  std::optional<std::size_t> cluster_level;  // nullopt = coarsest level, 0 = unit
  Correction correction = Correction::CR1;
};

/// Mediator (l, g) is at index (l-1)*(G-1) + (g-2).
std::vector<MediatorColumn> compute_mediators(const Dataset& dataset, const CodedGroups& coded);

EquationEstimate fit_total_model(const Dataset& dataset, const CodedGroups& coded,
                                 const EstimationOptions& options = {});
EquationEstimate fit_outcome_model(const Dataset& dataset, const CodedGroups& coded,
                                   const std::vector<MediatorColumn>& mediators,
                                   const EstimationOptions& options = {});
std::vector<EquationEstimate> fit_mediation_models(const Dataset& dataset,
                                                   const CodedGroups& coded,
                                                   const std::vector<MediatorColumn>& mediators,
                                                   const EstimationOptions& options = {});

/// Runs all (G-1)*L + 2 regressions and assembles the parameter set.
ParameterSet estimate(const Dataset& dataset, const CodedGroups& coded,
                      const EstimationOptions& options = {});

/// beta^W_g plus the contextual effects of g at levels 1..level.
double between_gap(const ParameterSet& params, std::size_t level, std::size_t target);

struct Interval {
  double level = 0.0;
  double value_lo = 0.0;
  double value_hi = 0.0;
  double share_lo = 0.0;
  double share_hi = 0.0;
};

struct Component {
  std::string label;
  double value = 0.0;
  double share = 0.0;
  std::vector<Interval> ci;  // filled by inference, ascending level
  std::string stars;         // "", "n.s.", "*", "**", "***"
};

/// Components of one group's gap under one approach.
///
/// Labels (l, l' are level numbers, X a group label):
///   approach 1: within, seg.l<l>.g<X>
///   approach 2: within, between.l<l>, cross.l<l>.g<X>
///   approach 3: within, intake.l<l>, context.l<l>.c<l'> (l' <= l), cross.l<l>.g<X>
/// Shares are value / total_gap, where total_gap is the sum of components.
/// On fitted parameters that sum equals beta_g.
struct DecompositionResult {
  std::string target;
  std::size_t target_index = 0;
  int approach = 1;
  std::vector<Component> components;
  double total_gap = 0.0;
  double fitted_total = 0.0;  // beta_g from the total model (NaN if absent)
  std::size_t dropped_draws = 0;  // Monte Carlo draws with a zero total

  const Component* find(std::string_view label) const;
};

DecompositionResult decompose(const ParameterSet& params, int approach, std::size_t target);
DecompositionResult decompose(const ParameterSet& params, int approach, std::string_view target);

/// Serial mediation for two groups and two levels: the school share is
/// regressed on the own-group dummy and the district share.
struct SerialParams {
  double school_within = 0.0;    // omega^S_W
  double school_district = 0.0;  // omega^S_D
  double district = 0.0;         // omega^D
  EquationEstimate equation;

  double school_total() const { return school_within + school_district * district; }
};

SerialParams serial_fit(const Dataset& dataset, const CodedGroups& coded,
                        const EstimationOptions& options = {});

DecompositionResult serial_decompose(const SerialParams& serial, const ParameterSet& params,
                                     int approach);

}  // namespace gapdecomp
