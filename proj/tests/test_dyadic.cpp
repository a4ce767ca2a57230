#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "thetadim/errors.hpp"
#include "thetadim/generators.hpp"

using namespace thetadim;

namespace {

void check_tree(const DyadicSet& set) {
  if (set.empty()) return;
  CHECK(set.count(0) == 1);
  for (int n = 0; n < set.depth(); ++n) {
    CHECK(set.count(n) <= set.count(n + 1));
    for (std::size_t i = 0; i < set.count(n); ++i) {
      const auto first = set.child_begin(n, i);
      const auto last = set.child_end(n, i);
      REQUIRE(first < last);
      CHECK(last - first <= (1u << set.dim()));
      for (auto c = first; c < last; ++c) CHECK((set.cubes(n + 1)[c] >> set.dim()) == set.cubes(n)[i]);
    }
    for (MortonCode code : set.cubes(n + 1)) CHECK(set.contains(n, code >> set.dim()));
  }
}

}  // namespace

TEST_SUITE("dyadic") {

TEST_CASE("morton codes round trip") {
  std::mt19937_64 rng(7);
  for (int dim = 1; dim <= 3; ++dim) {
    const int level = 60 / dim;
    for (int trial = 0; trial < 200; ++trial) {
      CubeIndex idx{};
      for (int a = 0; a < dim; ++a) idx[a] = rng() >> (64 - level);
      const MortonCode code = encode_morton(idx, dim, level);
      CHECK(decode_morton(code, dim, level) == idx);
    }
  }
  // Axis 0 is the most significant bit of every digit.
  CHECK(encode_morton(CubeIndex{1, 0}, 2, 1) == 2);
  CHECK(encode_morton(CubeIndex{0, 1}, 2, 1) == 1);
}

TEST_CASE("cube geometry") {
  DyadicCube c{3, 2, CubeIndex{1, 5}};
  CHECK(c.side() == 0.125);
  CHECK(c.diameter() == doctest::Approx(std::sqrt(2.0) * 0.125).epsilon(1e-15));
  CHECK(c.lower()[0] == 0.125);
  CHECK(c.center()[1] == 0.6875);
}

TEST_CASE("build from points") {
  SUBCASE("single point in one dimension") {
    const std::vector<Point> pts{{0.0}};
    const DyadicSet s = build_from_points(pts, 2);
    for (int n = 0; n <= 2; ++n) {
      REQUIRE(s.count(n) == 1);
      CHECK(s.cubes(n)[0] == 0);
    }
  }
  SUBCASE("two points on the diagonal") {
    const std::vector<Point> pts{{0.1, 0.1}, {0.9, 0.9}};
    const DyadicSet s = build_from_points(pts, 1);
    REQUIRE(s.count(1) == 2);
    CHECK(s.contains(1, encode_morton(CubeIndex{0, 0}, 2, 1)));
    CHECK(s.contains(1, encode_morton(CubeIndex{1, 1}, 2, 1)));
  }
  SUBCASE("random cloud matches direct containment") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Point> pts(1000);
    std::set<MortonCode> expected;
    for (auto& p : pts) {
      p = {u(rng), u(rng)};
      CubeIndex idx{};
      idx[0] = static_cast<std::uint64_t>(std::floor(p[0] * 8));
      idx[1] = static_cast<std::uint64_t>(std::floor(p[1] * 8));
      expected.insert(encode_morton(idx, 2, 3));
    }
    const DyadicSet s = build_from_points(pts, 3);
    CHECK(s.count(3) <= 64);
    CHECK(testing::code_set(s.leaves()) == expected);
    check_tree(s);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(build_from_points(std::vector<Point>{}, 3), EmptySetError);
    CHECK_THROWS_AS(build_from_points(std::vector<Point>{{1.0}}, 3), DomainError);
    CHECK_THROWS_AS(build_from_points(std::vector<Point>{{-0.25, 0.5}}, 3), DomainError);
  }
}

TEST_CASE("re-ingesting leaf centers is idempotent") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = 1 + trial % 3;
    const DyadicSet s = testing::random_tree(rng, dim, 5, 0.4);
    std::vector<Point> centers;
    for (std::size_t i = 0; i < s.leaves().size(); ++i) centers.push_back(testing::leaf_center(s, i));
    const DyadicSet again = build_from_points(centers, s.depth());
    CHECK(testing::code_set(again.leaves()) == testing::code_set(s.leaves()));
  }
}

TEST_CASE("tree invariants on random sets") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const int dim = 1 + trial % 3;
    const DyadicSet s = testing::random_tree(rng, dim, 6, 0.3 + 0.02 * trial);
    check_tree(s);
    CHECK(s.total_cubes() >= static_cast<std::size_t>(s.depth() + 1));
    const auto profile = branching_profile(s);
    for (int n : profile.min_children) {
      CHECK(n >= 1);
      CHECK(n <= (1 << dim));
    }
    CHECK(profile.dyadic_dimension >= 0.0);
    CHECK(profile.dyadic_dimension <= dim);
  }
}

TEST_CASE("from_leaves accepts duplicates and the empty list") {
  const DyadicSet s = DyadicSet::from_leaves(1, 3, {5, 5, 1, 5});
  CHECK(s.count(3) == 2);
  CHECK(DyadicSet::from_leaves(2, 3, {}).empty());
}

TEST_CASE("minimum branching") {
  const DyadicSet interval = gen_unit_cube(1, 8);
  for (int n = 0; n < 8; ++n) CHECK(min_branching(interval, n) == 2);
  const std::vector<double> x{0.3};
  const DyadicSet point = gen_point(x, 8);
  for (int n = 0; n < 8; ++n) CHECK(min_branching(point, n) == 1);
  CHECK_THROWS_AS(min_branching(point, 8), RangeError);
  CHECK_THROWS_AS(min_branching(point, -1), RangeError);

  // {1/k : k <= 64} x [0, 1]
  std::vector<MortonCode> first;
  for (int k = 1; k <= 64; ++k) first.push_back(closed_cell(1.0 / k, 12));
  const DyadicSet column = gen_product(DyadicSet::from_leaves(1, 12, first), gen_unit_cube(1, 12));
  for (int n = 0; n < 12; ++n) CHECK(min_branching(column, n) >= 2);
  CHECK(dyadic_dimension(column) >= 1.0);
}

TEST_CASE("dyadic dimension") {
  for (int d = 1; d <= 3; ++d) CHECK(dyadic_dimension(gen_unit_cube(d, 10 / d)) == d);
  const std::vector<double> x{0.5, 0.25};
  CHECK(dyadic_dimension(gen_point(x, 10)) == 0.0);
  CHECK_THROWS_AS(dyadic_dimension(DyadicSet::from_leaves(1, 4, {})), EmptySetError);

  // Full branching only from the burn-in level on still gives d.
  std::vector<MortonCode> leaves;
  for (MortonCode c = 0; c < (1u << 6); ++c) leaves.push_back((MortonCode{0} << 12) | c);
  CHECK(dyadic_dimension(DyadicSet::from_leaves(2, 9, leaves), 6) == 2.0);
  CHECK(dyadic_dimension(DyadicSet::from_leaves(2, 9, leaves), 2) < 2.0);
}

TEST_CASE("leaf file round trip") {
  std::mt19937_64 rng(17);
  const DyadicSet s = testing::random_tree(rng, 2, 6, 0.5);
  std::stringstream io;
  write_leaf_file(io, s, "random\ntree");
  const std::string text = io.str();
  CHECK(text.rfind("# random\n# tree\nd=2 depth=6\n", 0) == 0);
  const DyadicSet back = read_leaf_file(io);
  CHECK(back.dim() == 2);
  CHECK(back.depth() == 6);
  CHECK(testing::code_set(back.leaves()) == testing::code_set(s.leaves()));

  std::stringstream bad("d=2 depth=3\n1,2,3\n");
  CHECK_THROWS(read_leaf_file(bad));
}

TEST_CASE("truncation keeps the coarser levels") {
  std::mt19937_64 rng(19);
  const DyadicSet s = testing::random_tree(rng, 2, 7, 0.4);
  const DyadicSet t = s.truncated(4);
  CHECK(t.depth() == 4);
  for (int n = 0; n <= 4; ++n) CHECK(testing::code_set(t.cubes(n)) == testing::code_set(s.cubes(n)));
}

TEST_CASE("grid capacity") {
  CHECK_NOTHROW(check_grid(2, 31));
  CHECK_THROWS(check_grid(2, 32));
  CHECK_THROWS(check_grid(7, 2));
}

}  // TEST_SUITE
