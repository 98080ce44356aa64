#pragma once

// Shared fixtures for the unit and acceptance suites.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gapdecomp/engine.hpp"
#include "gapdecomp/synth.hpp"

namespace fixtures {

using gapdecomp::ColumnTag;
using gapdecomp::EquationEstimate;
using gapdecomp::EquationKind;
using gapdecomp::ParameterSet;

// Parameter set built straight from slot values; no equations attached.
inline ParameterSet make_params(std::vector<std::string> groups, std::vector<std::string> levels,
                                Eigen::VectorXd within, Eigen::MatrixXd contextual,
                                std::vector<Eigen::MatrixXd> segregation,
                                Eigen::VectorXd total = {}) {
  ParameterSet p;
  p.reference = "ref";
  p.groups = std::move(groups);
  p.level_names = std::move(levels);
  p.within_gaps = std::move(within);
  p.contextual = std::move(contextual);
  p.segregation = std::move(segregation);
  p.total_gaps = std::move(total);
  return p;
}

inline Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

inline Eigen::MatrixXd scalar(double v) { return Eigen::MatrixXd::Constant(1, 1, v); }

// Two groups, one level: published school-level coefficients.
inline ParameterSet two_group() {
  return make_params({"minority"}, {"school"}, vec({-0.072}), scalar(-0.606), {scalar(0.638)},
                     vec({-0.459}));
}

// Two groups, school and district.
inline ParameterSet two_level() {
  Eigen::MatrixXd ctx(2, 1);
  ctx << -0.305, -0.747;
  return make_params({"minority"}, {"school", "district"}, vec({-0.072}), ctx,
                     {scalar(0.638), scalar(0.258)}, vec({-0.459}));
}

// Four groups, one level, with equations and diagonal covariances so that
// Monte Carlo intervals can be drawn. Segregation standard errors are not
// published; 0.01 (the rounding step of the indices) is assumed.
inline ParameterSet four_group(double omega_se = 0.01) {
  const std::vector<std::string> groups{"Afro", "Indigenous", "Other"};
  auto diag = [](std::initializer_list<double> se) {
    Eigen::VectorXd v = vec(se);
    return Eigen::MatrixXd(v.array().square().matrix().asDiagonal());
  };
  std::vector<EquationEstimate> eqs;

  EquationEstimate total;
  total.kind = EquationKind::Total;
  total.tags = {ColumnTag::intercept(), ColumnTag::dummy(2), ColumnTag::dummy(3),
                ColumnTag::dummy(4)};
  total.coefficients = vec({0.031, -0.592, -0.518, -0.142});
  total.covariance = diag({0.002, 0.008, 0.011, 0.011});
  eqs.push_back(total);

  EquationEstimate outcome;
  outcome.kind = EquationKind::Outcome;
  outcome.tags = {ColumnTag::intercept(),    ColumnTag::dummy(2),       ColumnTag::dummy(3),
                  ColumnTag::dummy(4),       ColumnTag::mediator(1, 2), ColumnTag::mediator(1, 3),
                  ColumnTag::mediator(1, 4)};
  outcome.coefficients = vec({0.043, -0.089, -0.112, -0.026, -0.707, -0.669, -0.172});
  outcome.covariance = diag({0.002, 0.015, 0.017, 0.015, 0.017, 0.022, 0.022});
  eqs.push_back(outcome);

  // rows: receiving group; columns: share of Afro, Indigenous, Other
  const double omega[3][3] = {{0.70, 0.00, 0.02}, {0.01, 0.59, 0.02}, {0.04, 0.02, 0.43}};
  for (int mediator = 0; mediator < 3; ++mediator) {
    EquationEstimate m;
    m.kind = EquationKind::Mediation;
    m.level = 1;
    m.group = mediator + 2;
    m.tags = {ColumnTag::intercept(), ColumnTag::dummy(2), ColumnTag::dummy(3),
              ColumnTag::dummy(4)};
    m.coefficients = vec({0.05, omega[0][mediator], omega[1][mediator], omega[2][mediator]});
    m.covariance = diag({omega_se, omega_se, omega_se, omega_se});
    eqs.push_back(m);
  }
  return ParameterSet::from_equations("White", groups, {"school"}, std::move(eqs));
}

// Uniform random parameter set; segregation indices in (-0.2, 1).
inline ParameterSet random_params(std::mt19937_64& rng, std::size_t G, std::size_t L) {
  std::uniform_real_distribution<double> coef(-1.5, 1.5), omega(-0.2, 1.0);
  const auto gm1 = static_cast<Eigen::Index>(G - 1);
  std::vector<std::string> groups, levels;
  for (std::size_t g = 2; g <= G; ++g) groups.push_back("G" + std::to_string(g));
  for (std::size_t l = 1; l <= L; ++l) levels.push_back("L" + std::to_string(l));
  Eigen::VectorXd within(gm1);
  for (Eigen::Index g = 0; g < gm1; ++g) within(g) = coef(rng);
  Eigen::MatrixXd ctx(static_cast<Eigen::Index>(L), gm1);
  for (Eigen::Index i = 0; i < ctx.size(); ++i) ctx.data()[i] = coef(rng);
  std::vector<Eigen::MatrixXd> seg;
  for (std::size_t l = 0; l < L; ++l) {
    Eigen::MatrixXd m(gm1, gm1);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = omega(rng);
    seg.push_back(m);
  }
  return make_params(groups, levels, within, ctx, seg);
}

// Small random hierarchical population for identity checks.
inline gapdecomp::SynthConfig random_config(std::uint64_t seed, std::size_t G, std::size_t L,
                                            double noise_sd = 1.0) {
  std::mt19937_64 rng(seed * 7919 + 13);
  std::uniform_real_distribution<double> coef(-0.8, 0.8);
  gapdecomp::SynthConfig c;
  c.groups = G;
  c.levels = L;
  c.top_clusters = 6 + seed % 5;
  c.children_min = 2;
  c.children_max = 3;
  c.units_min = 8;
  c.units_max = 20;
  c.concentration = 1.5;
  c.jitter = 6.0;
  c.seed = seed;
  c.noise_sd = noise_sd;
  c.within_gaps.resize(G - 1);
  for (auto& w : c.within_gaps) w = coef(rng);
  c.contextual.resize(static_cast<Eigen::Index>(L), static_cast<Eigen::Index>(G - 1));
  for (Eigen::Index i = 0; i < c.contextual.size(); ++i) c.contextual.data()[i] = coef(rng);
  return c;
}

// Gauss-Jordan inverse with partial pivoting.
inline std::vector<std::vector<double>> invert(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  std::vector<std::vector<double>> inv(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    std::swap(a[c], a[piv]);
    std::swap(inv[c], inv[piv]);
    const double d = a[c][c];
    for (std::size_t j = 0; j < n; ++j) {
      a[c][j] /= d;
      inv[c][j] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        a[r][j] -= f * a[c][j];
        inv[r][j] -= f * inv[c][j];
      }
    }
  }
  return inv;
}

// Sandwich covariance with the meat written as X' E X, E(i,j) = e_i e_j
// whenever units i and j share a cluster. Plain loops, no Eigen solvers.
inline std::vector<std::vector<double>> dense_sandwich(const std::vector<std::vector<double>>& x,
                                                       const std::vector<double>& y,
                                                       const std::vector<int>& cluster, bool cr1) {
  const std::size_t n = x.size(), k = x.front().size();
  std::vector<std::vector<double>> xtx(k, std::vector<double>(k, 0.0));
  std::vector<double> xty(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < k; ++a) {
      xty[a] += x[i][a] * y[i];
      for (std::size_t b = 0; b < k; ++b) xtx[a][b] += x[i][a] * x[i][b];
    }
  }
  const auto bread = invert(xtx);
  std::vector<double> beta(k, 0.0);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) beta[a] += bread[a][b] * xty[b];
  }
  std::vector<double> e(n);
  for (std::size_t i = 0; i < n; ++i) {
    double fit = 0.0;
    for (std::size_t a = 0; a < k; ++a) fit += x[i][a] * beta[a];
    e[i] = y[i] - fit;
  }
  std::vector<std::vector<double>> meat(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (cluster[i] != cluster[j]) continue;
      const double w = e[i] * e[j];
      for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b < k; ++b) meat[a][b] += x[i][a] * w * x[j][b];
      }
    }
  }
  std::vector<int> ids(cluster);
  std::sort(ids.begin(), ids.end());
  const auto C = static_cast<double>(std::unique(ids.begin(), ids.end()) - ids.begin());
  const double factor =
      cr1 ? C / (C - 1.0) * (static_cast<double>(n) - 1.0) / static_cast<double>(n - k) : 1.0;
  std::vector<std::vector<double>> tmp(k, std::vector<double>(k, 0.0)), out = tmp;
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) {
      for (std::size_t c = 0; c < k; ++c) tmp[a][b] += bread[a][c] * meat[c][b];
    }
  }
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) {
      for (std::size_t c = 0; c < k; ++c) out[a][b] += tmp[a][c] * bread[c][b];
      out[a][b] *= factor;
    }
  }
  return out;
}

}  // namespace fixtures
