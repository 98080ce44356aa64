#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gapdecomp/engine.hpp"

namespace gapdecomp {

inline constexpr std::size_t kDefaultDraws = 20000;
inline constexpr std::size_t kMinDraws = 1000;
inline constexpr double kDefaultLevels[] = {0.95, 0.99, 0.999};

/// Monte Carlo draws of every fitted coefficient. Columns are grouped by
/// equation in ParameterSet::equations order.
struct DrawMatrix {
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> values;
  std::vector<std::size_t> equation_offsets;  // first column of each equation
  std::vector<std::string> equation_names;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;  // e.g. clipped non-PSD covariances

  std::size_t n_draws() const { return static_cast<std::size_t>(values.rows()); }
  std::vector<Eigen::VectorXd> coefficients(std::size_t draw) const;
};

/// Each equation is sampled independently from N(coefficients, covariance).
/// Draw i uses its own Philox stream (seed, i), so the matrix does not
/// depend on `threads`. Negative eigenvalues are clipped to zero.
DrawMatrix draw_parameters(const ParameterSet& params, std::size_t n_draws, std::uint64_t seed,
                           unsigned threads = 1);

struct CiRequest {
  int approach = 1;
  std::size_t target = 0;
};

struct ComponentCis {
  DecompositionResult point;  // point decomposition with ci, stars and dropped_draws filled
};

/// Percentile intervals (linear interpolation between order statistics) of
/// each component value and share across the draws. Draws whose components
/// sum to zero are dropped and counted.
std::vector<ComponentCis> component_cis(const DrawMatrix& draws, const ParameterSet& params,
                                        std::span<const CiRequest> requests,
                                        std::span<const double> levels, unsigned threads = 1);

ComponentCis component_cis(const DrawMatrix& draws, const ParameterSet& params, int approach,
                           std::size_t target, std::span<const double> levels,
                           unsigned threads = 1);

/// "***" if the 99.9% value interval excludes zero, "**" for 99%, "*" for
/// 95%, otherwise "n.s.". Levels absent from `ci` are skipped.
std::string significance_stars(const std::vector<Interval>& ci);

double percentile(std::vector<double>& values, double p);

}  // namespace gapdecomp
