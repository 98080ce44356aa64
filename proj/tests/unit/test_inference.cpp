#include <cmath>

#include "doctest.h"

#include "fixtures.hpp"
#include "gapdecomp/error.hpp"
#include "gapdecomp/inference.hpp"
#include "gapdecomp/synth.hpp"

using namespace gapdecomp;
using fixtures::vec;

namespace {

EquationEstimate equation(EquationKind kind, int level, int group, std::vector<ColumnTag> tags,
                          Eigen::VectorXd b, Eigen::VectorXd se) {
  EquationEstimate eq;
  eq.kind = kind;
  eq.level = level;
  eq.group = group;
  eq.tags = std::move(tags);
  eq.coefficients = std::move(b);
  eq.covariance = se.array().square().matrix().asDiagonal();
  return eq;
}

// Published two-group, one-level coefficients with their standard errors.
// The segregation index has no published error; 0.005 is assumed.
ParameterSet two_group_with_se(double scale = 1.0) {
  std::vector<EquationEstimate> eqs;
  const std::vector<ColumnTag> base{ColumnTag::intercept(), ColumnTag::dummy(2)};
  eqs.push_back(equation(EquationKind::Total, 0, 0, base, vec({0.031, -0.459}),
                         scale * vec({0.002, 0.006})));
  eqs.push_back(equation(EquationKind::Outcome, 0, 0,
                         {ColumnTag::intercept(), ColumnTag::dummy(2), ColumnTag::mediator(1, 2)},
                         vec({0.046, -0.072, -0.606}), scale * vec({0.002, 0.010, 0.012})));
  eqs.push_back(equation(EquationKind::Mediation, 1, 2, base, vec({0.024, 0.638}),
                         scale * vec({0.002, 0.005})));
  return ParameterSet::from_equations("White", {"minority"}, {"school"}, std::move(eqs));
}

}  // namespace

TEST_SUITE("inference") {
  TEST_CASE("draws are identical across runs and thread counts") {
    const auto p = fixtures::four_group();
    const auto a = draw_parameters(p, 2000, 17, 1);
    const auto b = draw_parameters(p, 2000, 17, 1);
    const auto c = draw_parameters(p, 2000, 17, 4);
    CHECK(a.values == b.values);
    CHECK(a.values == c.values);
    const auto d = draw_parameters(p, 2000, 18, 1);
    CHECK(a.values != d.values);
    CHECK(a.equation_names == std::vector<std::string>{"total", "outcome", "mediation.l1.g2",
                                                       "mediation.l1.g3", "mediation.l1.g4"});

    const std::vector<CiRequest> req{{1, 0}, {2, 1}, {3, 2}};
    const auto one = component_cis(a, p, req, kDefaultLevels, 1);
    const auto many = component_cis(a, p, req, kDefaultLevels, 3);
    for (std::size_t r = 0; r < req.size(); ++r) {
      for (std::size_t k = 0; k < one[r].point.components.size(); ++k) {
        const auto& x = one[r].point.components[k];
        const auto& y = many[r].point.components[k];
        for (std::size_t i = 0; i < x.ci.size(); ++i) {
          CHECK(x.ci[i].value_lo == y.ci[i].value_lo);
          CHECK(x.ci[i].share_hi == y.ci[i].share_hi);
        }
      }
    }
  }

  TEST_CASE("zero covariance collapses every draw onto the estimates") {
    auto p = two_group_with_se(0.0);
    const auto draws = draw_parameters(p, 1000, 1);
    for (std::size_t i = 0; i < draws.n_draws(); ++i) {
      const auto coefs = draws.coefficients(i);
      for (std::size_t e = 0; e < coefs.size(); ++e) CHECK(coefs[e] == p.equations[e].coefficients);
    }
    const auto res = component_cis(draws, p, 3, 0, kDefaultLevels);
    for (const auto& c : res.point.components) {
      for (const auto& iv : c.ci) {
        CHECK(iv.value_lo == doctest::Approx(c.value).epsilon(1e-14));
        CHECK(iv.value_hi == doctest::Approx(c.value).epsilon(1e-14));
      }
      CHECK(c.stars == "***");
    }
  }

  TEST_CASE("one-dimensional draws have the requested spread") {
    ParameterSet p;
    const double se = 0.3;
    p.equations.push_back(
        equation(EquationKind::Total, 0, 0, {ColumnTag::intercept()}, vec({1.0}), vec({se})));
    const std::size_t n = 20000;
    const auto draws = draw_parameters(p, n, 2024);
    const Eigen::VectorXd x = draws.values.col(0);
    const double mean = x.mean();
    const double sd = std::sqrt((x.array() - mean).square().sum() / double(n - 1));
    CHECK(std::abs(sd - se) < 3.0 * se / std::sqrt(2.0 * double(n)));
    CHECK(std::abs(mean - 1.0) < 4.0 * se / std::sqrt(double(n)));
  }

  TEST_CASE("intervals nest and bracket the estimate") {
    const auto p = fixtures::four_group();
    const auto draws = draw_parameters(p, 5000, 3);
    for (int a = 1; a <= 3; ++a) {
      const auto res = component_cis(draws, p, a, 0, kDefaultLevels);
      CHECK(res.point.dropped_draws == 0);
      for (const auto& c : res.point.components) {
        REQUIRE(c.ci.size() == 3);
        for (std::size_t i = 0; i + 1 < c.ci.size(); ++i) {
          CHECK(c.ci[i + 1].value_lo <= c.ci[i].value_lo);
          CHECK(c.ci[i + 1].value_hi >= c.ci[i].value_hi);
          CHECK(c.ci[i + 1].share_lo <= c.ci[i].share_lo);
          CHECK(c.ci[i + 1].share_hi >= c.ci[i].share_hi);
        }
        CHECK(c.ci[2].value_lo <= c.value);
        CHECK(c.value <= c.ci[2].value_hi);
      }
    }
  }

  TEST_CASE("published significance") {
    SUBCASE("every two-group component is significant") {
      const auto p = two_group_with_se();
      const auto draws = draw_parameters(p, kDefaultDraws, 0);
      for (int a = 1; a <= 3; ++a) {
        for (const auto& c : component_cis(draws, p, a, 0, kDefaultLevels).point.components) {
          INFO(c.label);
          CHECK(c.stars == "***");
        }
      }
    }
    SUBCASE("cross exposure of the first group is not significant") {
      const auto p = fixtures::four_group();
      const auto draws = draw_parameters(p, kDefaultDraws, 0);
      const auto res = component_cis(draws, p, 2, 0, kDefaultLevels).point;
      CHECK(res.find("cross.l1.gIndigenous")->stars == "n.s.");
      CHECK(res.find("within")->stars == "***");
      CHECK(res.find("between.l1")->stars == "***");
    }
  }

  TEST_CASE("stars") {
    auto iv = [](double level, double lo, double hi) { return Interval{level, lo, hi, 0, 0}; };
    CHECK(significance_stars({iv(0.95, 0.1, 1), iv(0.99, -0.1, 1), iv(0.999, -1, 1)}) == "*");
    CHECK(significance_stars({iv(0.95, 0.1, 1), iv(0.99, 0.05, 1), iv(0.999, -1, 1)}) == "**");
    CHECK(significance_stars({iv(0.95, -2, -1), iv(0.99, -2, -1), iv(0.999, -3, -0.5)}) == "***");
    CHECK(significance_stars({iv(0.95, -1, 1)}) == "n.s.");
  }

  TEST_CASE("percentile interpolates between order statistics") {
    std::vector<double> v{4, 1, 3, 2};
    CHECK(percentile(v, 0.5) == doctest::Approx(2.5));
    CHECK(percentile(v, 0.0) == 1.0);
    CHECK(percentile(v, 1.0) == 4.0);
    CHECK(percentile(v, 0.25) == doctest::Approx(1.75));
  }

  TEST_CASE("invalid requests") {
    const auto p = two_group_with_se();
    CHECK_THROWS_AS(draw_parameters(p, 999, 0), Error);
    const auto draws = draw_parameters(p, 1000, 0);
    const double bad[] = {1.5};
    CHECK_THROWS_AS(component_cis(draws, p, 1, 0, bad), Error);
  }

  TEST_CASE("indefinite covariance is clipped with a warning") {
    auto p = two_group_with_se();
    p.equations[0].covariance(0, 1) = p.equations[0].covariance(1, 0) = 1.0;
    const auto draws = draw_parameters(p, 1000, 0);
    REQUIRE(draws.warnings.size() == 1);
    CHECK(draws.warnings[0].find("total") != std::string::npos);
    CHECK(draws.values.allFinite());
  }

  TEST_CASE("intervals on fitted data") {
    const auto data = generate(fixtures::random_config(12, 3, 2)).dataset;
    const auto p = estimate(data, encode_groups(data, "g1"));
    const auto draws = draw_parameters(p, 1000, 5, 2);
    const std::vector<CiRequest> req{{1, 0}, {2, 0}, {3, 1}};
    const auto res = component_cis(draws, p, req, kDefaultLevels, 2);
    REQUIRE(res.size() == 3);
    for (const auto& r : res) {
      for (const auto& c : r.point.components) CHECK(!c.stars.empty());
    }
  }
}
