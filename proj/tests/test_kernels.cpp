#include "doctest.h"
#include "support.hpp"
#include "thetadim/covering.hpp"
#include "thetadim/errors.hpp"
#include "thetadim/generators.hpp"
#include "thetadim/kernels.hpp"

using namespace thetadim;

namespace {

KernelSpec spec(double r, double theta, double s, int m = 0) {
  KernelSpec k;
  k.r = r;
  k.theta = theta;
  k.s = s;
  k.weight_m = m;
  return k;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("kernel values") {
  const KernelSpec k = spec(0.1, 0.5, 1.0);
  CHECK(kernel_eval(0.05, k) == 1.0);
  CHECK(kernel_eval(0.2, k) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(kernel_eval(0.4, k) == 0.0);
  CHECK(k.support() == doctest::Approx(std::sqrt(0.1)));
  CHECK(weighted_kernel_eval(0.2, spec(0.1, 0.5, 1.0, 1)) == doctest::Approx(2.5));
  CHECK_THROWS_AS(validate(spec(1.5, 0.5, 1.0)), DomainError);
  CHECK_THROWS_AS(validate(spec(0.1, 0.0, 1.0)), DomainError);
  CHECK_THROWS_AS(validate(spec(0.1, 0.5, -1.0)), DomainError);
}

TEST_CASE("kernel shape") {
  std::mt19937_64 rng(59);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const KernelSpec k = spec(0.01 + 0.3 * u(rng), 0.2 + 0.8 * u(rng), 2.0 * u(rng));
    double previous = 2.0;
    for (double x = 0.0; x < 1.5; x += 1e-3) {
      const double v = kernel_eval(x, k);
      CHECK(v <= previous);
      if (x < k.r) CHECK(v == 1.0);
      previous = v;
    }
    // Continuous at r, the only jump sits at the support.
    CHECK(kernel_eval(k.r * (1 - 1e-12), k) == doctest::Approx(kernel_eval(k.r, k)).epsilon(1e-9));
    CHECK(kernel_eval(k.support(), k) == 0.0);
    CHECK(kernel_eval(k.support() * (1 - 1e-12), k) > 0.0);
  }
}

TEST_CASE("energy equals the full double sum") {
  SUBCASE("uniform interval") {
    const auto set = std::make_shared<const DyadicSet>(gen_unit_cube(1, 8));
    const DiscreteMeasure mu = DiscreteMeasure::uniform(set);
    const KernelSpec k = spec(std::exp2(-6), 0.5, 0.5);
    CHECK(testing::relative_error(energy(mu, k), testing::reference_energy(mu, k)) <= 1e-12);
  }
  SUBCASE("random sets and weights") {
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
      const int dim = 1 + trial % 3;
      const DyadicSet set = testing::random_tree(rng, dim, 8 - dim, 0.35);
      const DiscreteMeasure mu = testing::random_probability(rng, set);
      const KernelSpec k = spec(0.02 + 0.1 * u(rng), 0.3 + 0.6 * u(rng), dim * u(rng), trial % 2);
      CHECK(testing::relative_error(energy(mu, k), testing::reference_energy(mu, k)) <= 1e-12);
    }
  }
}

TEST_CASE("energy is quadratic and independent of the worker count") {
  std::mt19937_64 rng(67);
  const DyadicSet set = testing::random_tree(rng, 2, 7, 0.4);
  const DiscreteMeasure mu = testing::random_probability(rng, set);
  const KernelSpec k = spec(0.03, 0.5, 1.2, 1);
  const double e = energy(mu, k, 1);
  CHECK(energy(mu.scaled(3.0), k) == doctest::Approx(9.0 * e).epsilon(1e-12));
  CHECK(energy(mu, k, 4) == e);

  // Bilinear: E(a + b) = E(a) + 2 E(a, b) + E(b) with E(a, b) from the polarization.
  const DiscreteMeasure nu = testing::random_probability(rng, set);
  std::vector<double> sum(mu.weights().size());
  for (std::size_t i = 0; i < sum.size(); ++i) {
    sum[i] = mu.weights()[i] + nu.weights()[i];
  }
  const auto base = mu.base_ptr();
  const double e_sum = energy(DiscreteMeasure(base, sum), k);
  const double cross = 0.5 * (e_sum - energy(mu, k) - energy(nu, k));
  CHECK(cross > 0.0);
  CHECK(e_sum == doctest::Approx(energy(mu, k) + 2 * cross + energy(nu, k)).epsilon(1e-12));
}

TEST_CASE("energy examples") {
  const std::vector<double> x{0.3, 0.3};
  const auto point = std::make_shared<const DyadicSet>(gen_point(x, 10));
  CHECK(energy(DiscreteMeasure::uniform(point), spec(0.01, 0.5, 1.0)) == 1.0);

  const auto two = std::make_shared<const DyadicSet>(DyadicSet::from_leaves(1, 6, {0, 63}));
  CHECK(energy(DiscreteMeasure::uniform(two), spec(0.05, 0.5, 1.0)) == doctest::Approx(0.5));
}

TEST_CASE("capacity bound") {
  SUBCASE("point mass") {
    const std::vector<double> x{0.6};
    const auto point = std::make_shared<const DyadicSet>(gen_point(x, 12));
    const KernelSpec k = spec(std::exp2(-8), 0.5, 0.7);
    const double bound = capacity_lower_bound(DiscreteMeasure::uniform(point), k);
    CHECK(bound == doctest::Approx(std::pow(k.r, k.s)));
    CoveringQuery q;
    q.s = k.s;
    q.theta = k.theta;
    q.delta = k.support();
    CHECK(optimal_cover_cost(*point, q).cost >= bound);
  }
  SUBCASE("uniform interval") {
    const auto set = std::make_shared<const DyadicSet>(gen_unit_cube(1, 12));
    const KernelSpec k = spec(std::exp2(-8), 0.5, 0.5);
    CoveringQuery q;
    q.s = k.s;
    q.theta = k.theta;
    q.delta = k.support();
    CHECK(capacity_lower_bound(DiscreteMeasure::uniform(set), k) <= optimal_cover_cost(*set, q).cost);
  }
  SUBCASE("preconditions") {
    const auto set = std::make_shared<const DyadicSet>(gen_unit_cube(1, 6));
    const DiscreteMeasure mu = DiscreteMeasure::uniform(set);
    CHECK_THROWS_AS(capacity_lower_bound(mu, spec(0.05, 0.5, 1.0, 1)), ConfigError);
    CHECK_THROWS_AS(capacity_lower_bound(mu.scaled(2.0), spec(0.05, 0.5, 1.0)), PreconditionError);
  }
}

TEST_CASE("capacity bound against the covering cost on random triples") {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  int violations = 0;
  while (checked < 120) {
    const int dim = 1 + static_cast<int>(rng() % 3);
    const int depth = 12 / dim - (dim == 1 ? 4 : 0);
    const DyadicSet set = testing::random_tree(rng, dim, depth, 0.2 + 0.6 * u(rng));
    const DiscreteMeasure mu = testing::random_probability(rng, set);
    const KernelSpec k = spec(std::exp2(-(2 + (depth - 2) * u(rng))), 0.3 + 0.7 * u(rng) * 0.99,
                              dim * u(rng));
    CoveringQuery q;
    q.s = k.s;
    q.theta = k.theta;
    q.delta = k.support();
    if (!(q.delta < 1.0)) continue;
    double cost = 0.0;
    try {
      cost = optimal_cover_cost(set, q).cost;
    } catch (const ResolutionError&) {
      continue;
    }
    const double slack = std::pow(3.0, k.s) * std::pow(dim, k.s / 2);
    violations += capacity_lower_bound(mu, k) > cost * slack ? 1 : 0;
    ++checked;
  }
  CHECK(violations == 0);
}

}  // TEST_SUITE
