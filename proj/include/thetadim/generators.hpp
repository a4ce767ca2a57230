#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "thetadim/dyadic.hpp"

namespace thetadim {

// Union of the circles of radius n^-p / 2 (n = 1..n_max) centered at
// (1/2, 1/2), together with the center point. A leaf is occupied iff one of
// the circles passes through it (the dyadic hull); circles closer together
// than half a leaf are treated as a solid annulus. n_max defaults to
// ceil(2^(depth/p)) capped at 10^6.
DyadicSet gen_rotated_sequence(double p, int depth, std::optional<std::uint64_t> n_max = {});

std::uint64_t default_rotated_sequence_terms(double p, int depth);

// {0} together with {n^-p : n >= 1} in d = 1. The closed interval [0, 1] is
// mapped onto the grid with x = 1 attributed to the last cell.
DyadicSet gen_sequence_set(double p, int depth);

// Digit-restricted self-similar set: a cube is occupied iff every child digit
// along its address belongs to `pattern` (digits in [0, 2^d)).
DyadicSet gen_pattern_fractal(int dim, std::span<const unsigned> pattern, int depth);

// [0, 1]^d at the given depth.
DyadicSet gen_unit_cube(int dim, int depth);

// Single point x in [0, 1]^d.
DyadicSet gen_point(std::span<const double> x, int depth);

// Cartesian product; a's axes come first.
DyadicSet gen_product(const DyadicSet& a, const DyadicSet& b);

// Grid cell for a coordinate of the closed unit interval.
std::uint64_t closed_cell(double x, int depth);

}  // namespace thetadim
