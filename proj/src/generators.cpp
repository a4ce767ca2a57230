#include "thetadim/generators.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "thetadim/errors.hpp"

namespace thetadim {

namespace {

// Appends the leaves (half-open cells) met by a circle of radius R centered
// at (1/2, 1/2), for every R in [inner, outer].
void rasterize_annulus(double inner, double outer, int depth, std::vector<MortonCode>& out) {
  const double h = cube_side(depth);
  const std::int64_t cells = std::int64_t{1} << depth;
  const double inner2 = inner > 0.0 ? inner * inner : 0.0;
  const double outer2 = outer * outer;

  auto cell_of = [&](double x) {
    return std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(x / h)), 0, cells - 1);
  };
  auto emit = [&](std::int64_t row, double lo, double hi) {
    for (std::int64_t i = cell_of(lo); i <= cell_of(hi); ++i) {
      CubeIndex index{};
      index[0] = static_cast<std::uint64_t>(i);
      index[1] = static_cast<std::uint64_t>(row);
      out.push_back(encode_morton(index, 2, depth));
    }
  };

  for (std::int64_t j = cell_of(0.5 - outer); j <= cell_of(0.5 + outer); ++j) {
    const double y0 = static_cast<double>(j) * h - 0.5;
    const double y1 = y0 + h;
    const double dy_min = (y0 <= 0.0 && y1 >= 0.0) ? 0.0 : std::min(std::abs(y0), std::abs(y1));
    const double dy_max = std::max(std::abs(y0), std::abs(y1));
    if (dy_min * dy_min > outer2) continue;
    // Within this row the circles reach |x - 1/2| in [near, far].
    const double far = std::sqrt(outer2 - dy_min * dy_min);
    const double near = std::sqrt(std::max(0.0, inner2 - dy_max * dy_max));
    if (near == 0.0) {
      emit(j, 0.5 - far, 0.5 + far);
    } else {
      emit(j, 0.5 - far, 0.5 - near);
      emit(j, 0.5 + near, 0.5 + far);
    }
  }
}

}  // namespace

std::uint64_t closed_cell(double x, int depth) {
  const std::uint64_t cells = std::uint64_t{1} << depth;
  if (x <= 0.0) return 0;
  const double scaled = std::floor(x * std::ldexp(1.0, depth));
  if (scaled >= static_cast<double>(cells)) return cells - 1;
  return static_cast<std::uint64_t>(scaled);
}

std::uint64_t default_rotated_sequence_terms(double p, int depth) {
  const double terms = std::ceil(std::exp2(static_cast<double>(depth) / p));
  return terms >= 1e6 ? std::uint64_t{1000000} : static_cast<std::uint64_t>(terms);
}

DyadicSet gen_rotated_sequence(double p, int depth, std::optional<std::uint64_t> n_max) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("gen_rotated_sequence: p must lie in (0, 1)");
  check_grid(2, depth);
  const std::uint64_t terms = n_max.value_or(default_rotated_sequence_terms(p, depth));
  if (terms < 1) throw DomainError("gen_rotated_sequence: n_max must be at least 1");

  const double h = cube_side(depth);
  auto radius = [p](std::uint64_t n) { return 0.5 * std::pow(static_cast<double>(n), -p); };

  // Gaps R_n - R_{n+1} shrink with n. Once a gap is below half a cell every
  // cell meeting the band [R_n_max, R_n] meets one of its circles, so the
  // remaining circles are rasterized as one annulus.
  std::uint64_t fill_from = terms + 1;
  {
    std::uint64_t lo = 1;
    std::uint64_t hi = terms;
    if (terms >= 2 && radius(terms - 1) - radius(terms) <= 0.5 * h) {
      while (lo < hi) {
        const std::uint64_t mid = lo + (hi - lo) / 2;
        if (radius(mid) - radius(mid + 1) <= 0.5 * h) hi = mid;
        else lo = mid + 1;
      }
      fill_from = lo;
    }
  }

  std::vector<MortonCode> leaves;
  const std::uint64_t separate = std::min(terms, fill_from - 1);
  for (std::uint64_t n = 1; n <= separate; ++n) {
    const double r = radius(n);
    rasterize_annulus(r, r, depth, leaves);
  }
  if (fill_from <= terms) {
    rasterize_annulus(radius(terms), radius(fill_from), depth, leaves);
  }
  CubeIndex center{};
  center[0] = center[1] = closed_cell(0.5, depth);
  leaves.push_back(encode_morton(center, 2, depth));
  return DyadicSet::from_leaves(2, depth, std::move(leaves));
}

DyadicSet gen_sequence_set(double p, int depth) {
  if (!(p > 0.0)) throw DomainError("gen_sequence_set: p must be positive");
  check_grid(1, depth);
  const double h = cube_side(depth);
  std::vector<MortonCode> leaves{0};
  for (std::uint64_t n = 1;; ++n) {
    const double x = std::pow(static_cast<double>(n), -p);
    leaves.push_back(closed_cell(x, depth));
    // Once consecutive terms are less than a cell apart, every cell between
    // the origin and x holds a term.
    if (x - std::pow(static_cast<double>(n + 1), -p) < h) {
      for (std::uint64_t c = closed_cell(x, depth); c > 0; --c) leaves.push_back(c - 1);
      break;
    }
  }
  return DyadicSet::from_leaves(1, depth, std::move(leaves));
}

DyadicSet gen_pattern_fractal(int dim, std::span<const unsigned> pattern, int depth) {
  check_grid(dim, depth);
  if (pattern.empty()) throw DomainError("gen_pattern_fractal: empty pattern");
  const unsigned digits = 1u << dim;
  std::set<unsigned> sorted;
  for (unsigned digit : pattern) {
    if (digit >= digits) {
      throw DomainError("gen_pattern_fractal: digit " + std::to_string(digit) +
                        " outside [0, 2^d)");
    }
    sorted.insert(digit);
  }
  std::vector<MortonCode> level{0};
  for (int n = 0; n < depth; ++n) {
    std::vector<MortonCode> next;
    next.reserve(level.size() * sorted.size());
    for (MortonCode code : level) {
      for (unsigned digit : sorted) next.push_back((code << dim) | digit);
    }
    level = std::move(next);
  }
  return DyadicSet::from_leaves(dim, depth, std::move(level));
}

DyadicSet gen_unit_cube(int dim, int depth) {
  check_grid(dim, depth);
  const std::uint64_t count = std::uint64_t{1} << (dim * depth);
  std::vector<MortonCode> leaves(count);
  for (std::uint64_t i = 0; i < count; ++i) leaves[i] = i;
  return DyadicSet::from_leaves(dim, depth, std::move(leaves));
}

DyadicSet gen_point(std::span<const double> x, int depth) {
  const int dim = static_cast<int>(x.size());
  check_grid(dim, depth);
  CubeIndex index{};
  for (int i = 0; i < dim; ++i) {
    if (!(x[i] >= 0.0 && x[i] <= 1.0)) throw DomainError("gen_point: coordinate outside [0, 1]");
    index[i] = closed_cell(x[i], depth);
  }
  return DyadicSet::from_leaves(dim, depth, {encode_morton(index, dim, depth)});
}

DyadicSet gen_product(const DyadicSet& a, const DyadicSet& b) {
  if (a.depth() != b.depth()) {
    throw ConfigError("gen_product: depth mismatch (" + std::to_string(a.depth()) + " vs " +
                      std::to_string(b.depth()) + ")");
  }
  const int dim = a.dim() + b.dim();
  const int depth = a.depth();
  check_grid(dim, depth);
  std::vector<CubeIndex> right;
  right.reserve(b.leaves().size());
  for (MortonCode code : b.leaves()) right.push_back(decode_morton(code, b.dim(), depth));
  std::vector<MortonCode> leaves;
  leaves.reserve(a.leaves().size() * b.leaves().size());
  for (MortonCode ca : a.leaves()) {
    CubeIndex index = decode_morton(ca, a.dim(), depth);
    for (const auto& rb : right) {
      for (int i = 0; i < b.dim(); ++i) index[a.dim() + i] = rb[i];
      leaves.push_back(encode_morton(index, dim, depth));
    }
  }
  return DyadicSet::from_leaves(dim, depth, std::move(leaves));
}

}  // namespace thetadim
