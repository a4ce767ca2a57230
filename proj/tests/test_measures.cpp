#include <numeric>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "thetadim/errors.hpp"
#include "thetadim/generators.hpp"
#include "thetadim/measures.hpp"

using namespace thetadim;

namespace {

std::shared_ptr<const DyadicSet> shared(DyadicSet s) {
  return std::make_shared<const DyadicSet>(std::move(s));
}

}  // namespace

TEST_SUITE("measures") {

TEST_CASE("discrete measure basics") {
  const auto set = shared(gen_unit_cube(1, 4));
  const DiscreteMeasure mu = DiscreteMeasure::uniform(set);
  CHECK(mu.total_mass() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(mu.cube_mass(1, 0) == doctest::Approx(0.5));
  const auto masses = mu.level_masses(2);
  REQUIRE(masses.size() == 4);
  for (double m : masses) CHECK(m == doctest::Approx(0.25));
  CHECK(mu.scaled(3.0).total_mass() == doctest::Approx(3.0));

  std::vector<double> w(16, 0.0);
  w[3] = -1.0;
  CHECK_THROWS_AS(DiscreteMeasure(set, w), DomainError);
  CHECK_THROWS_AS(DiscreteMeasure(set, std::vector<double>(3, 1.0)), ConfigError);
}

TEST_CASE("coarsening keeps cube masses") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    const DyadicSet set = testing::random_tree(rng, 2, 7, 0.4);
    const DiscreteMeasure mu = testing::random_probability(rng, set);
    const DiscreteMeasure coarse = coarsen(mu, 4);
    CHECK(coarse.base().depth() == 4);
    CHECK(coarse.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
    const auto a = mu.level_masses(3);
    const auto b = coarse.level_masses(3);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
  }
}

TEST_CASE("ball mass") {
  const auto set = shared(gen_unit_cube(1, 10));
  const DiscreteMeasure mu = DiscreteMeasure::uniform(set);
  const std::vector<double> half{0.5};
  CHECK(ball_mass(mu, half, 2.0) == doctest::Approx(1.0));
  CHECK(std::abs(ball_mass(mu, half, 0.25) - 0.5) <= 2.0 / 1024);
  const std::vector<double> center{(37 + 0.5) / 1024};
  CHECK(ball_mass(mu, center, 0.4 / 1024) == doctest::Approx(1.0 / 1024));
  CHECK_THROWS_AS(ball_mass(mu, half, 0.0), DomainError);

  std::mt19937_64 rng(43);
  const DyadicSet tree = testing::random_tree(rng, 2, 6, 0.5);
  const DiscreteMeasure nu = testing::random_probability(rng, tree);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::vector<double> x{u(rng), u(rng)};
    const double r = 0.3 * u(rng) + 1e-3;
    // Oracle: leaves whose closed cube comes within r of x.
    double expected = 0.0;
    for (std::size_t i = 0; i < tree.leaves().size(); ++i) {
      const DyadicCube c = tree.cube(tree.depth(), i);
      double d2 = 0.0;
      for (int a = 0; a < 2; ++a) {
        const double lo = c.lower()[a];
        const double gap = std::max({lo - x[a], 0.0, x[a] - (lo + c.side())});
        d2 += gap * gap;
      }
      if (std::sqrt(d2) < r) expected += nu.weights()[i];
    }
    CHECK(ball_mass(nu, x, r) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("frostman construction on the interval") {
  const auto set = shared(gen_unit_cube(1, 16));
  const FrostmanResult res = build_joint_frostman(set, 0.5, 0.9, 0.5, std::exp2(-8));
  const FrostmanTrace& tr = res.trace;
  CHECK(tr.m == 16);
  CHECK(tr.top == 8);
  CHECK(tr.ell == 8);
  CHECK(res.measure.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
  const auto level8 = res.measure.level_masses(8);
  for (double m : level8) CHECK(m <= std::exp2(-8 * 0.5) / tr.normalization * (1 + 1e-12));
  const FrostmanAudit audit = audit_frostman(res);
  CHECK(tr.normalization > 0.0);
  CHECK(tr.normalization >= audit.normalization_floor * (1 - 1e-12));
  CHECK(audit.caps_hold());
  CHECK(audit.chain_holds());
}

TEST_CASE("frostman construction on a point") {
  const unsigned zero[] = {0};
  const auto set = shared(gen_pattern_fractal(1, zero, 12));
  const FrostmanResult res = build_joint_frostman(set, 0.5, 0.5, 0.5, std::exp2(-5));
  REQUIRE(res.measure.weights().size() == 1);
  CHECK(res.measure.weights()[0] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("caps, chain and normalization on random trees") {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int built = 0;
  for (int trial = 0; trial < 400 && built < 100; ++trial) {
    const int dim = 1 + trial % 3;
    const int depth = 9 - dim;
    const auto set = shared(testing::random_tree(rng, dim, depth, 0.3 + 0.6 * u(rng)));
    const double theta = 0.3 + 0.5 * u(rng);
    const double delta = 0.3 * u(rng) + 0.05;
    const double t = dim * (0.2 + 0.75 * u(rng));
    FrostmanResult res;
    try {
      res = build_joint_frostman(set, t, 0.5 * t, theta, delta);
    } catch (const ResolutionError&) {
      continue;
    } catch (const DegenerateScaleError&) {
      continue;
    }
    ++built;
    const FrostmanAudit audit = audit_frostman(res);
    CHECK(audit.caps_hold(1e-12));
    CHECK(audit.chain_holds(1e-12));
    CHECK(audit.mass_error <= 1e-12);
    for (double phi : res.trace.leaf_phi) CHECK(phi >= 1.0);
    for (double m : res.trace.stage_masses.front()) CHECK(m > 0.0);
    for (double w : res.measure.weights()) CHECK(w >= 0.0);
    // Level totals before normalization never grow along the chain.
    for (std::size_t i = 1; i < res.trace.stage_masses.size(); ++i) {
      const auto& a = res.trace.stage_masses[i - 1];
      const auto& b = res.trace.stage_masses[i];
      CHECK(std::accumulate(b.begin(), b.end(), 0.0) <=
            std::accumulate(a.begin(), a.end(), 0.0) * (1 + 1e-12));
    }
    // The saturated cubes form an antichain of occupied cubes.
    std::vector<int> hits(set->leaves().size(), 0);
    for (const CoverCube& c : res.trace.saturated_cover) {
      CHECK(set->contains(c.level, c.code));
      const int shift = set->dim() * (set->depth() - c.level);
      for (std::size_t i = 0; i < hits.size(); ++i) hits[i] += (set->leaves()[i] >> shift) == c.code;
    }
    CHECK(*std::max_element(hits.begin(), hits.end()) <= 1);
  }
  CHECK(built >= 100);
}

TEST_CASE("frostman scale errors") {
  const auto set = shared(gen_unit_cube(1, 8));
  CHECK_THROWS_AS(build_joint_frostman(set, 0.5, 0.5, 0.5, std::exp2(-6)), ResolutionError);
  // delta and delta^(1/theta) in the same level.
  CHECK_THROWS_AS(build_joint_frostman(set, 0.5, 0.5, 0.99, 0.3), DegenerateScaleError);
  CHECK_THROWS_AS(build_joint_frostman(set, 0.5, 0.5, 1.0, 0.3), DomainError);
  CHECK_THROWS_AS(build_joint_frostman(set, 1.5, 0.5, 0.5, 0.3), DomainError);
}

TEST_CASE("ball profile") {
  SUBCASE("uniform interval") {
    const auto set = shared(gen_unit_cube(1, 10));
    const DiscreteMeasure mu = DiscreteMeasure::uniform(set);
    const ProfileReport rep =
        verify_frostman_profile(mu, frostman_profile(1.0, 1.0, 0.5, 1.0 / 16), 2000);
    // A ball of radius r meets at most 2r + 2 leaf sides of the interval.
    const double h = cube_side(10);
    double oracle = 0.0;
    for (double r : rep.radii) oracle = std::max(oracle, std::min(1.0, 2 * r + 2 * h) / r);
    CHECK(rep.c() <= oracle * (1 + 1e-12));
    // 2 + 2h/r stays below 3 from two leaf sides on; the whole grid allows 4.
    CHECK(rep.c() <= 4.0);
    for (std::size_t k = 0; k < rep.radii.size(); ++k) {
      if (rep.radii[k] >= 2 * h) CHECK(rep.max_ratio[k] <= 3.0);
    }
    CHECK(rep.bounded);
  }
  SUBCASE("point mass diverges") {
    const std::vector<double> x{0.4};
    const auto set = shared(gen_point(x, 12));
    const DiscreteMeasure mu = DiscreteMeasure::uniform(set);
    const ProfileReport rep =
        verify_frostman_profile(mu, frostman_profile(0.8, 0.6, 0.5, 1.0 / 8), 10);
    CHECK(rep.growth_exponent > 0.5);
    CHECK_FALSE(rep.bounded);
  }
  SUBCASE("profile shapes") {
    const ProfileSpec f = frostman_profile(0.9, 0.5, 0.5, 0.01);
    CHECK(f.fine_scale == doctest::Approx(1e-4));
    CHECK(profile_bound(f, 1e-5) == doctest::Approx(std::pow(1e-4, 0.4) * std::pow(1e-5, 0.5)));
    CHECK(profile_bound(f, 1e-3) == doctest::Approx(std::pow(1e-3, 0.9)));
    const ProfileSpec j = joint_profile(0.9, 0.5, 0.5, 0.01);
    CHECK(j.fine_scale == doctest::Approx(0.01));
    CHECK(j.coarse_scale == doctest::Approx(0.1));
  }
}

TEST_CASE("profile constant of the capped measure across scales") {
  const auto set = shared(gen_unit_cube(1, 16));
  std::vector<double> c_high;
  std::vector<double> c_half;
  for (int k : {6, 7, 8}) {
    const double delta = std::exp2(-k);
    for (double t : {0.9, 0.5}) {
      const auto res = build_joint_frostman(set, t, 0.9, 0.5, delta);
      const auto rep = verify_frostman_profile(res.measure, frostman_profile(t, 0.9, 0.5, delta), 2000);
      // For t = 1/2 the measure is Lebesgue and c scales like delta^(1 - t).
      (t == 0.9 ? c_high : c_half).push_back(t == 0.9 ? rep.c() : rep.c() / std::pow(delta, 1 - t));
    }
  }
  for (const auto* values : {&c_high, &c_half}) {
    const auto [lo, hi] = std::minmax_element(values->begin(), values->end());
    CHECK(*hi <= 1.2 * *lo);
  }
}

TEST_CASE("measure files round trip") {
  std::mt19937_64 rng(53);
  const DyadicSet set = testing::random_tree(rng, 3, 4, 0.4);
  const DiscreteMeasure mu = testing::random_probability(rng, set);
  std::stringstream io;
  write_measure(io, mu, "random");
  const DiscreteMeasure back = read_measure(io);
  REQUIRE(back.weights().size() == mu.weights().size());
  CHECK(testing::code_set(back.base().leaves()) == testing::code_set(set.leaves()));
  for (std::size_t i = 0; i < mu.weights().size(); ++i) {
    CHECK(back.weights()[i] == doctest::Approx(mu.weights()[i]).epsilon(1e-15));
  }
  std::stringstream bad("d,depth,total_mass\n1,2,1\n0,0.5\n");
  CHECK_THROWS_AS(read_measure(bad), IoError);
}

TEST_CASE("trace summary and cap rules") {
  const auto set = shared(gen_unit_cube(2, 8));
  const auto res = build_joint_frostman(set, 1.5, 1.0, 0.5, 0.25, CapRule::kUniformReset);
  const std::string j = frostman_trace_json(res.trace);
  CHECK(j.find("\"normalization\"") != std::string::npos);
  CHECK(std::string(cap_rule_name(parse_cap_rule("uniform-reset"))) == "uniform-reset");
  CHECK_THROWS_AS(parse_cap_rule("bogus"), ConfigError);
}

}  // TEST_SUITE
