#include "gapdecomp/engine.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "gapdecomp/error.hpp"

namespace gapdecomp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<int> cluster_ids_for(const Dataset& dataset, const EstimationOptions& options,
                                 std::size_t& level) {
  level = options.cluster_level.value_or(dataset.levels());
  if (level > dataset.levels()) {
    throw Error(ErrorCode::InvalidConfig, "cluster level " + std::to_string(level) +
                                              " exceeds hierarchy depth " +
                                              std::to_string(dataset.levels()));
  }
  if (level == 0) {
    std::vector<int> ids(dataset.size());
    std::iota(ids.begin(), ids.end(), 0);
    return ids;
  }
  const auto span = dataset.cluster_index(level);
  return {span.begin(), span.end()};
}

EquationEstimate finish(EquationKind kind, int level, int group, const OlsFit& fit,
                        const Dataset& dataset, const EstimationOptions& options) {
  EquationEstimate eq;
  eq.kind = kind;
  eq.level = level;
  eq.group = group;
  eq.tags = fit.tags;
  eq.coefficients = fit.coefficients;
  eq.n = fit.n;
  eq.r_squared = fit.r_squared;
  std::size_t cluster_level = 0;
  const auto ids = cluster_ids_for(dataset, options, cluster_level);
  const auto cov = cluster_cov(fit, ids, options.correction, cluster_level);
  eq.covariance = cov.matrix;
  eq.n_clusters = cov.n_clusters;
  return eq;
}

void add_dummies(DesignMatrix& x, const CodedGroups& coded) {
  for (Eigen::Index c = 0; c < coded.dummies.cols(); ++c) {
    x.add_column(ColumnTag::dummy(static_cast<int>(c) + 2), coded.dummies.col(c));
  }
}

double read(const EquationEstimate& eq, const Eigen::VectorXd& coefficients, const ColumnTag& tag) {
  const int j = eq.find(tag);
  if (j < 0) {
    throw Error(ErrorCode::IncompleteParameters, eq.name() + " has no " + tag.label());
  }
  return coefficients(j);
}

void fill_slots(ParameterSet& p, const std::vector<EquationEstimate>& equations,
                const std::vector<const Eigen::VectorXd*>& coefficients) {
  const auto gm1 = static_cast<Eigen::Index>(p.groups.size());
  const auto L = static_cast<Eigen::Index>(p.level_names.size());
  p.total_gaps = Eigen::VectorXd::Constant(gm1, kNaN);
  p.within_gaps = Eigen::VectorXd::Constant(gm1, kNaN);
  p.contextual = Eigen::MatrixXd::Constant(L, gm1, kNaN);
  p.mediation_intercepts = Eigen::MatrixXd::Constant(L, gm1, kNaN);
  p.segregation.assign(static_cast<std::size_t>(L), Eigen::MatrixXd::Constant(gm1, gm1, kNaN));

  for (std::size_t e = 0; e < equations.size(); ++e) {
    const auto& eq = equations[e];
    const auto& b = *coefficients[e];
    switch (eq.kind) {
      case EquationKind::Total:
        for (Eigen::Index g = 0; g < gm1; ++g) {
          p.total_gaps(g) = read(eq, b, ColumnTag::dummy(static_cast<int>(g) + 2));
        }
        break;
      case EquationKind::Outcome:
        for (Eigen::Index g = 0; g < gm1; ++g) {
          p.within_gaps(g) = read(eq, b, ColumnTag::dummy(static_cast<int>(g) + 2));
          for (Eigen::Index l = 0; l < L; ++l) {
            p.contextual(l, g) = read(
                eq, b, ColumnTag::mediator(static_cast<int>(l) + 1, static_cast<int>(g) + 2));
          }
        }
        break;
      case EquationKind::Mediation: {
        if (eq.level < 1 || eq.level > L || eq.group < 2 || eq.group > gm1 + 1) {
          throw Error(ErrorCode::IncompleteParameters, eq.name() + " does not fit this shape");
        }
        const auto l = static_cast<std::size_t>(eq.level - 1);
        const Eigen::Index mediator = eq.group - 2;
        p.mediation_intercepts(static_cast<Eigen::Index>(l), mediator) =
            read(eq, b, ColumnTag::intercept());
        for (Eigen::Index g = 0; g < gm1; ++g) {
          p.segregation[l](g, mediator) = read(eq, b, ColumnTag::dummy(static_cast<int>(g) + 2));
        }
        break;
      }
    }
  }
}

}  // namespace

std::string EquationEstimate::name() const {
  switch (kind) {
    case EquationKind::Total: return "total";
    case EquationKind::Outcome: return "outcome";
    case EquationKind::Mediation:
      return "mediation.l" + std::to_string(level) + ".g" + std::to_string(group);
  }
  return "?";
}

int EquationEstimate::find(const ColumnTag& tag) const {
  for (std::size_t j = 0; j < tags.size(); ++j) {
    if (tags[j] == tag) return static_cast<int>(j);
  }
  return -1;
}

int ParameterSet::group_index(std::string_view label) const {
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (groups[i] == label) return static_cast<int>(i);
  }
  return -1;
}

void ParameterSet::validate() const {
  const auto gm1 = static_cast<Eigen::Index>(groups.size());
  const auto L = static_cast<Eigen::Index>(level_names.size());
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::IncompleteParameters, what);
  };
  if (gm1 < 1) fail("no comparison groups");
  if (L < 1) fail("no levels");
  if (within_gaps.size() != gm1 || !within_gaps.allFinite()) fail("within gaps missing");
  if (contextual.rows() != L || contextual.cols() != gm1 || !contextual.allFinite()) {
    fail("contextual effects missing");
  }
  if (segregation.size() != static_cast<std::size_t>(L)) fail("segregation matrix missing");
  for (const auto& m : segregation) {
    if (m.rows() != gm1 || m.cols() != gm1 || !m.allFinite()) fail("segregation matrix missing");
  }
}

ParameterSet ParameterSet::from_equations(std::string reference, std::vector<std::string> groups,
                                          std::vector<std::string> level_names,
                                          std::vector<EquationEstimate> equations) {
  ParameterSet p;
  p.reference = std::move(reference);
  p.groups = std::move(groups);
  p.level_names = std::move(level_names);
  p.equations = std::move(equations);
  std::vector<const Eigen::VectorXd*> coefficients;
  for (const auto& eq : p.equations) coefficients.push_back(&eq.coefficients);
  fill_slots(p, p.equations, coefficients);
  p.max_proportion = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(p.level_names.size()),
                                               static_cast<Eigen::Index>(p.groups.size()), kNaN);
  return p;
}

ParameterSet ParameterSet::with_coefficients(
    const std::vector<Eigen::VectorXd>& coefficients) const {
  if (coefficients.size() != equations.size()) {
    throw Error(ErrorCode::IncompleteParameters, "coefficient vectors do not match equations");
  }
  ParameterSet p;
  p.reference = reference;
  p.groups = groups;
  p.level_names = level_names;
  p.max_proportion = max_proportion;
  std::vector<const Eigen::VectorXd*> ptrs;
  for (const auto& c : coefficients) ptrs.push_back(&c);
  fill_slots(p, equations, ptrs);
  return p;
}

std::vector<MediatorColumn> compute_mediators(const Dataset& dataset, const CodedGroups& coded) {
  std::vector<MediatorColumn> out;
  for (std::size_t l = 1; l <= dataset.levels(); ++l) {
    for (const auto& label : coded.coding.comparison_groups) {
      out.push_back(compute_proportions(dataset, l, label));
    }
  }
  return out;
}

EquationEstimate fit_total_model(const Dataset& dataset, const CodedGroups& coded,
                                 const EstimationOptions& options) {
  DesignMatrix x(dataset.size());
  x.add_intercept();
  add_dummies(x, coded);
  const auto y = dataset.outcome();
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
  return finish(EquationKind::Total, 0, 0, fit_ols(x, yv), dataset, options);
}

EquationEstimate fit_outcome_model(const Dataset& dataset, const CodedGroups& coded,
                                   const std::vector<MediatorColumn>& mediators,
                                   const EstimationOptions& options) {
  DesignMatrix x(dataset.size());
  x.add_intercept();
  add_dummies(x, coded);
  for (const auto& m : mediators) {
    const int g = coded.coding.code_of(m.group) + 1;
    x.add_column(ColumnTag::mediator(static_cast<int>(m.level), g), m.values);
  }
  const auto y = dataset.outcome();
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
  return finish(EquationKind::Outcome, 0, 0, fit_ols(x, yv), dataset, options);
}

std::vector<EquationEstimate> fit_mediation_models(const Dataset& dataset,
                                                   const CodedGroups& coded,
                                                   const std::vector<MediatorColumn>& mediators,
                                                   const EstimationOptions& options) {
  DesignMatrix x(dataset.size());
  x.add_intercept();
  add_dummies(x, coded);
  std::vector<EquationEstimate> out;
  for (const auto& m : mediators) {
    const int g = coded.coding.code_of(m.group) + 1;
    out.push_back(finish(EquationKind::Mediation, static_cast<int>(m.level), g, fit_ols(x, m.values),
                         dataset, options));
  }
  return out;
}

ParameterSet estimate(const Dataset& dataset, const CodedGroups& coded,
                      const EstimationOptions& options) {
  const auto mediators = compute_mediators(dataset, coded);
  std::vector<EquationEstimate> equations;
  equations.push_back(fit_total_model(dataset, coded, options));
  equations.push_back(fit_outcome_model(dataset, coded, mediators, options));
  for (auto& eq : fit_mediation_models(dataset, coded, mediators, options)) {
    equations.push_back(std::move(eq));
  }
  auto params = ParameterSet::from_equations(coded.coding.reference, coded.coding.comparison_groups,
                                             dataset.hierarchy().level_names, std::move(equations));
  const auto gm1 = static_cast<Eigen::Index>(params.groups.size());
  for (std::size_t i = 0; i < mediators.size(); ++i) {
    const auto l = static_cast<Eigen::Index>(i) / gm1;
    const auto g = static_cast<Eigen::Index>(i) % gm1;
    params.max_proportion(l, g) = mediators[i].values.maxCoeff();
  }
  return params;
}

double between_gap(const ParameterSet& params, std::size_t level, std::size_t target) {
  if (level < 1 || level > params.levels() || target >= params.comparison_groups()) {
    throw Error(ErrorCode::InvalidConfig, "between gap requested outside the parameter shape");
  }
  const auto t = static_cast<Eigen::Index>(target);
  double gap = params.within_gaps(t);
  for (std::size_t l = 0; l < level; ++l) gap += params.contextual(static_cast<Eigen::Index>(l), t);
  return gap;
}

SerialParams serial_fit(const Dataset& dataset, const CodedGroups& coded,
                        const EstimationOptions& options) {
  if (coded.coding.groups() != 2 || dataset.levels() != 2) {
    throw Error(ErrorCode::WrongShape,
                "serial mediation needs exactly 2 groups and 2 levels, got G=" +
                    std::to_string(coded.coding.groups()) +
                    " L=" + std::to_string(dataset.levels()));
  }
  const auto& minority = coded.coding.comparison_groups[0];
  const auto school = compute_proportions(dataset, 1, minority);
  const auto district = compute_proportions(dataset, 2, minority);

  DesignMatrix conditional(dataset.size());
  conditional.add_intercept();
  conditional.add_column(ColumnTag::dummy(2), coded.dummies.col(0));
  conditional.add_column(ColumnTag::mediator(2, 2), district.values);

  DesignMatrix parallel(dataset.size());
  parallel.add_intercept();
  parallel.add_column(ColumnTag::dummy(2), coded.dummies.col(0));

  SerialParams out;
  try {
    const auto fit = fit_ols(conditional, school.values);
    out.equation = finish(EquationKind::Mediation, 1, 2, fit, dataset, options);
    out.school_within = fit.coefficient(ColumnTag::dummy(2));
    out.school_district = fit.coefficient(ColumnTag::mediator(2, 2));
    out.district = fit_ols(parallel, district.values).coefficient(ColumnTag::dummy(2));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::RankDeficient) throw;
    throw Error(ErrorCode::WrongShape,
                std::string("serial mediation is not identified (") + e.what() +
                    "); the district share needs variation beyond the group dummy, which "
                    "requires several districts with different compositions");
  }
  return out;
}

DecompositionResult serial_decompose(const SerialParams& serial, const ParameterSet& params,
                                     int approach) {
  if (params.comparison_groups() != 1 || params.levels() != 2) {
    throw Error(ErrorCode::WrongShape, "serial decomposition needs G=2 and L=2 parameters");
  }
  ParameterSet reparam = params;
  reparam.segregation[0](0, 0) = serial.school_total();
  reparam.segregation[1](0, 0) = serial.district;
  return decompose(reparam, approach, std::size_t{0});
}

}  // namespace gapdecomp
