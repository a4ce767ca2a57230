#include "doctest.h"
#include "support.hpp"
#include "thetadim/covering.hpp"
#include "thetadim/errors.hpp"
#include "thetadim/generators.hpp"

using namespace thetadim;

namespace {

bool is_tree(const DyadicSet& set) {
  for (int n = 0; n < set.depth(); ++n) {
    for (std::size_t i = 0; i < set.count(n); ++i) {
      if (set.child_count(n, i) == 0) return false;
    }
    for (MortonCode code : set.cubes(n + 1)) {
      if (!set.contains(n, code >> set.dim())) return false;
    }
  }
  return set.count(0) == 1;
}

std::set<MortonCode> transformed(const DyadicSet& s, bool swap, bool flip_x, bool flip_y) {
  const std::uint64_t top = (std::uint64_t{1} << s.depth()) - 1;
  std::set<MortonCode> out;
  for (MortonCode code : s.leaves()) {
    CubeIndex idx = decode_morton(code, 2, s.depth());
    if (swap) std::swap(idx[0], idx[1]);
    if (flip_x) idx[0] = top - idx[0];
    if (flip_y) idx[1] = top - idx[1];
    out.insert(encode_morton(idx, 2, s.depth()));
  }
  return out;
}

}  // namespace

TEST_SUITE("generators") {

TEST_CASE("sequence set cells") {
  // Bucket {0} and 1/n into eighths, x = 1 in the last one.
  std::set<MortonCode> expected{0};
  for (int n = 1; n < 100000; ++n) {
    const double x = 1.0 / n;
    expected.insert(x >= 1.0 ? 7 : static_cast<MortonCode>(std::floor(x * 8)));
  }
  const DyadicSet s = gen_sequence_set(1.0, 3);
  CHECK(testing::code_set(s.leaves()) == expected);
  CHECK(s.leaves().size() == 5);
  CHECK(is_tree(s));
  CHECK_THROWS_AS(gen_sequence_set(0.0, 3), DomainError);
}

TEST_CASE("sequence set box dimension") {
  const DyadicSet s = gen_sequence_set(1.0, 14);
  const auto est = dim_estimate(s, 1.0, default_schedule(1, 14, 1.0));
  CHECK(std::abs(est.value - 0.5) <= 0.15);
}

TEST_CASE("pattern fractals") {
  const unsigned zero[] = {0};
  const DyadicSet point = gen_pattern_fractal(1, zero, 10);
  CHECK(point.leaves().size() == 1);
  CHECK(point.leaves()[0] == 0);

  const unsigned both[] = {0, 1};
  CHECK(gen_pattern_fractal(1, both, 10).leaves().size() == 1024);

  const unsigned diagonal[] = {0, 3};
  const DyadicSet diag = gen_pattern_fractal(2, diagonal, 10);
  CHECK(diag.leaves().size() == 1024);
  CHECK(dyadic_dimension(diag) == 1.0);
  for (MortonCode code : diag.leaves()) {
    const CubeIndex idx = decode_morton(code, 2, 10);
    CHECK(idx[0] == idx[1]);
  }
  CHECK(is_tree(diag));

  CHECK_THROWS_AS(gen_pattern_fractal(2, std::span<const unsigned>{}, 4), DomainError);
  const unsigned bad[] = {4};
  CHECK_THROWS(gen_pattern_fractal(2, bad, 4));
}

TEST_CASE("products") {
  const std::vector<double> a{0.2};
  const std::vector<double> b{0.7};
  const DyadicSet pp = gen_product(gen_point(a, 6), gen_point(b, 6));
  CHECK(pp.leaves().size() == 1);
  const CubeIndex idx = decode_morton(pp.leaves()[0], 2, 6);
  CHECK(idx[0] == closed_cell(0.2, 6));
  CHECK(idx[1] == closed_cell(0.7, 6));

  CHECK(gen_product(gen_unit_cube(1, 6), gen_unit_cube(1, 6)).leaves().size() == 4096);

  const DyadicSet e1 = gen_sequence_set(1.0, 12);
  const DyadicSet f = gen_product(e1, gen_unit_cube(1, 12));
  CHECK(f.leaves().size() == e1.leaves().size() * 4096);
  CHECK(dyadic_dimension(f) >= 1.0);
  CHECK(is_tree(f));

  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const DyadicSet x = testing::random_tree(rng, 1, 5, 0.6);
    const DyadicSet y = testing::random_tree(rng, 2, 5, 0.3);
    const DyadicSet xy = gen_product(x, y);
    CHECK(xy.dim() == 3);
    CHECK(xy.leaves().size() == x.leaves().size() * y.leaves().size());
    CHECK(is_tree(xy));
  }

  CHECK_THROWS_AS(gen_product(gen_unit_cube(1, 5), gen_unit_cube(1, 6)), ConfigError);
}

TEST_CASE("rotated sequence") {
  SUBCASE("two circles") {
    const DyadicSet s = gen_rotated_sequence(0.5, 4, 2);
    CHECK(is_tree(s));
    const double r1 = 0.5;
    const double r2 = 0.5 / std::sqrt(2.0);
    for (std::size_t i = 0; i < s.leaves().size(); ++i) {
      const auto c = testing::leaf_center(s, i);
      const double rho = std::hypot(c[0] - 0.5, c[1] - 0.5);
      const double gap = std::min(std::abs(rho - r1), std::abs(rho - r2));
      // The center cell is always present.
      if (rho > 0.1) CHECK(gap <= 2.0 / 16.0);
    }
  }
  SUBCASE("dihedral symmetry") {
    const DyadicSet s = gen_rotated_sequence(0.5, 10);
    const auto base = testing::code_set(s.leaves());
    const std::size_t allowance = 4 * 4 * (std::size_t{1} << 10);
    for (int g = 1; g < 8; ++g) {
      const auto image = transformed(s, g & 1, g & 2, g & 4);
      std::vector<MortonCode> diff;
      std::set_symmetric_difference(base.begin(), base.end(), image.begin(), image.end(),
                                    std::back_inserter(diff));
      CHECK(diff.size() <= allowance);
    }
  }
  SUBCASE("domain") {
    CHECK_THROWS_AS(gen_rotated_sequence(1.0, 8), DomainError);
    CHECK_THROWS_AS(gen_rotated_sequence(0.0, 8), DomainError);
    CHECK(default_rotated_sequence_terms(0.5, 14) == 1000000);
    CHECK(default_rotated_sequence_terms(0.5, 4) == 256);
  }
}

TEST_CASE("unit cube and point") {
  CHECK(gen_unit_cube(3, 4).leaves().size() == 4096);
  const std::vector<double> x{1.0, 0.0};
  const DyadicSet p = gen_point(x, 5);
  const CubeIndex idx = decode_morton(p.leaves()[0], 2, 5);
  CHECK(idx[0] == 31);
  CHECK(idx[1] == 0);
  CHECK(closed_cell(0.5, 3) == 4);
}

}  // TEST_SUITE
