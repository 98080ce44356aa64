#include <set>

#include "doctest.h"

#include "fixtures.hpp"
#include "gapdecomp/error.hpp"
#include "gapdecomp/synth.hpp"

using namespace gapdecomp;

TEST_SUITE("synth") {
  TEST_CASE("shape follows the configuration") {
    SynthConfig c;
    c.groups = 4;
    c.levels = 2;
    c.top_clusters = 5;
    c.seed = 1;
    const auto r = generate(c);
    CHECK(r.dataset.levels() == 2);
    CHECK(r.dataset.group_labels() == std::vector<std::string>{"g1", "g2", "g3", "g4"});
    CHECK(r.dataset.cluster_count(2) == 5);
    CHECK(r.dataset.cluster_count(1) >= 10);
    CHECK(r.dataset.cluster_count(1) <= 20);
    CHECK(check_nesting(r.dataset).passed());
    CHECK(r.truth.reference == "g1");
    CHECK(r.truth.groups == std::vector<std::string>{"g2", "g3", "g4"});
  }

  TEST_CASE("same seed, same data") {
    const auto cfg = fixtures::random_config(9, 3, 2);
    CHECK(to_csv(generate(cfg).dataset) == to_csv(generate(cfg).dataset));
    auto other = cfg;
    other.seed = 10;
    CHECK(to_csv(generate(cfg).dataset) != to_csv(generate(other).dataset));
  }

  TEST_CASE("CSV round trip") {
    const auto d = generate(fixtures::random_config(3, 3, 3)).dataset;
    const auto back = parse_dataset(
        to_csv(d), {"outcome", "group", d.hierarchy().level_names, "unit_id"}, d.hierarchy());
    REQUIRE(back.size() == d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
      CHECK(back.outcome()[i] == d.outcome()[i]);
      CHECK(back.unit_id(i) == d.unit_id(i));
      CHECK(back.group_index()[i] == d.group_index()[i]);
      for (std::size_t l = 1; l <= 3; ++l) CHECK(back.cluster_index(l)[i] == d.cluster_index(l)[i]);
    }
  }

  TEST_CASE("noise-free data are recovered exactly") {
    for (std::size_t L = 1; L <= 3; ++L) {
      auto cfg = fixtures::random_config(20 + L, 3, L, 0.0);
      cfg.alpha = 0.3;
      const auto r = generate(cfg);
      const auto p = estimate(r.dataset, encode_groups(r.dataset, "g1"));
      for (std::size_t g = 0; g < 2; ++g) {
        CHECK(std::abs(p.within_gaps(static_cast<Eigen::Index>(g)) - cfg.within_gaps[g]) < 1e-8);
        for (Eigen::Index l = 0; l < static_cast<Eigen::Index>(L); ++l) {
          CHECK(std::abs(p.contextual(l, static_cast<Eigen::Index>(g)) -
                         cfg.contextual(l, static_cast<Eigen::Index>(g))) < 1e-8);
        }
      }
    }
  }

  TEST_CASE("without segregation the total gap is the within gap") {
    SynthConfig c;
    c.groups = 2;
    c.levels = 1;
    // self-inclusive shares bias omega by about 1/cluster size, so clusters
    // are large relative to their number
    c.top_clusters = 10;
    c.units_min = 4000;
    c.units_max = 4000;
    c.concentration = 1e7;
    c.jitter = 0.0;
    c.noise_sd = 0.0;
    c.within_gaps = {-0.4};
    c.contextual = Eigen::MatrixXd::Constant(1, 1, -1.0);
    c.seed = 5;
    const auto r = generate(c);
    const auto coded = encode_groups(r.dataset, "g1");
    const auto p = estimate(r.dataset, coded);
    // the only segregation left is sampling noise in the realized shares
    const double omega_se = std::sqrt(p.equations[2].covariance(1, 1));
    CHECK(std::abs(p.omega(0, 0, 0)) < 3.0 * omega_se + 1e-12);
    const double gap_se = std::sqrt(p.equations[0].covariance(1, 1));
    CHECK(std::abs(p.total_gaps(0) - (-0.4)) < 3.0 * gap_se + 1e-12);
  }

  TEST_CASE("two groups, strong segregation: identity and recovery") {
    SynthConfig c;
    c.groups = 2;
    c.levels = 1;
    c.top_clusters = 200;
    c.units_min = 100;
    c.units_max = 100;
    c.concentration = 0.5;
    c.within_gaps = {-0.2};
    c.contextual = Eigen::MatrixXd::Constant(1, 1, -0.6);
    c.seed = 77;
    const auto r = generate(c);
    const auto p = estimate(r.dataset, encode_groups(r.dataset, "g1"));
    CHECK(p.omega(0, 0, 0) > 0.5);
    CHECK(std::abs(p.total_gaps(0) - (p.within_gaps(0) + p.omega(0, 0, 0) * p.contextual(0, 0))) <
          1e-8);
    const double se = std::sqrt(p.equations[1].covariance(1, 1));
    CHECK(std::abs(p.within_gaps(0) - (-0.2)) < 3.0 * se);
  }

  TEST_CASE("empty groups are redrawn, or rejected in strict mode") {
    SynthConfig c;
    c.groups = 3;
    c.levels = 1;
    c.top_clusters = 1;
    c.units_min = 3;
    c.units_max = 3;
    c.group_weights = {1.0, 1.0, 0.02};
    c.concentration = 0.3;
    c.seed = 4;
    const auto r = generate(c);
    CHECK(r.dataset.group_labels().size() == 3);
    CHECK(r.truth.attempts >= 1);
    bool strict_failed = false;
    c.strict = true;
    for (std::uint64_t seed = 0; seed < 20 && !strict_failed; ++seed) {
      c.seed = seed;
      try {
        generate(c);
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptyGroup);
        strict_failed = true;
      }
    }
    CHECK(strict_failed);
  }

  TEST_CASE("invalid configurations") {
    SynthConfig c;
    c.groups = 1;
    CHECK_THROWS_AS(generate(c), Error);
    c.groups = 3;
    c.within_gaps = {0.1};
    CHECK_THROWS_AS(generate(c), Error);
    c.within_gaps = {};
    c.units_min = 5;
    c.units_max = 2;
    CHECK_THROWS_AS(generate(c), Error);
  }

  TEST_CASE("oracles") {
    SUBCASE("ols") {
      const auto b = oracle_ols({{1, 0}, {1, 1}, {1, 2}, {1, 3}, {1, 4}}, {2, 5, 8, 11, 14});
      CHECK(b[0] == doctest::Approx(2.0));
      CHECK(b[1] == doctest::Approx(3.0));
      CHECK_THROWS_AS(oracle_ols({{1, 1}, {1, 1}, {1, 1}}, {1, 2, 3}), Error);
    }
    SUBCASE("omega routes on D1-like data") {
      const auto d = parse_dataset("y,g,s\n1.5,W,A\n0.5,W,A\n-0.2,M,A\n-0.5,M,B\n-1.1,M,B\n-0.4,W,B\n",
                                   {"y", "g", {"s"}, ""}, Hierarchy{{"s"}});
      const auto o = oracle_omega(d, "W");
      CHECK(o.regression == doctest::Approx(1.0 / 9.0));
      CHECK(o.variance_ratio == doctest::Approx(1.0 / 9.0));
      CHECK(o.mean_difference == doctest::Approx(1.0 / 9.0));
    }
    SUBCASE("perfect and no segregation") {
      const auto seg = parse_dataset("y,g,s\n1,W,A\n2,W,A\n3,M,B\n4,M,B\n", {"y", "g", {"s"}, ""},
                                     Hierarchy{{"s"}});
      const auto o = oracle_omega(seg, "W");
      CHECK(o.regression == doctest::Approx(1.0));
      CHECK(o.variance_ratio == doctest::Approx(1.0));
      CHECK(o.mean_difference == doctest::Approx(1.0));
      const auto mixed = parse_dataset("y,g,s\n1,W,A\n2,M,A\n3,M,B\n4,W,B\n", {"y", "g", {"s"}, ""},
                                       Hierarchy{{"s"}});
      const auto z = oracle_omega(mixed, "W");
      CHECK(std::abs(z.regression) < 1e-12);
      CHECK(std::abs(z.variance_ratio) < 1e-12);
      CHECK(std::abs(z.mean_difference) < 1e-12);
    }
  }
}
