#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "thetadim/covering.hpp"
#include "thetadim/dyadic.hpp"
#include "thetadim/measures.hpp"

namespace thetadim {

// W + a: `frame` is an orthonormal basis of W, `normals` one of its orthogonal
// complement, and `offset` the translation a, which lies in the complement.
struct AffinePlane {
  int ambient_dim = 2;
  std::vector<Point> frame;
  std::vector<Point> normals;
  Point offset;

  int codim() const { return static_cast<int>(normals.size()); }
};

// Throws DomainError unless the frame and normals form an orthonormal basis
// and the offset is orthogonal to the frame (to 1e-10).
void validate(const AffinePlane& plane);

// W spanned by the orthonormalized span of d - m standard Gaussian vectors
// (a rotation-invariant choice). Offset zero.
AffinePlane sample_plane(int d, int m, std::uint64_t seed);

// The coordinate hyperplane orthogonal to `normal_axis` through the origin.
// In d = 2, normal_axis = 1 gives the horizontal lines y = c.
AffinePlane axis_plane(int d, int normal_axis);

// The line through the origin with direction (cos angle, sin angle).
AffinePlane line_plane(double angle);

// Copy of a codimension-one plane moved to <x, u> = c, u its normal.
AffinePlane at_offset(const AffinePlane& direction, double c);
// <a, u> for a codimension-one plane.
double offset_coordinate(const AffinePlane& plane);
// Angle in [0, pi) of the direction of a line in the plane.
double line_angle(const AffinePlane& plane);
// Human-readable frame: the angle for lines, the normal for planes in 3D.
std::string frame_label(const AffinePlane& plane);

// Range of <x, u> over the closed cube, for a codimension-one plane.
std::pair<double, double> projection_interval(const AffinePlane& plane, const DyadicCube& cube);
// The same over [0, 1]^d.
std::pair<double, double> unit_projection_interval(const AffinePlane& plane);

// Exact test: the closed cube meets the plane.
bool cube_meets_plane(const DyadicCube& cube, const AffinePlane& plane);

// `count` offsets spread evenly over the projection of [0, 1]^d onto the
// normal, minus `margin` at each end, with an irrational phase so that no
// offset is a dyadic rational.
std::vector<double> generic_offsets(const AffinePlane& direction, std::size_t count,
                                    double margin = 0.0625);

// Occupied level-L cubes that meet the plane. Supports d in {2, 3} and
// codimension one; other shapes throw NotImplementedError.
DyadicSet slice_set(const DyadicSet& set, const AffinePlane& plane, int level);

// The slice of the rotated-sequence set by a line, built from the circle
// equations instead of a rasterized set: the point (1/2, 1/2) + h u + x v (u
// the normal, v the direction) is stored at 1/2 + x of a 1-D grid, so the
// slice keeps its geometry at depths far beyond the 2-D grid. Every circle
// meeting the line is included unless n_max is given. Lines within 10^-3.5
// of the center meet too many circles and throw RangeError.
DyadicSet rotated_sequence_line_slice(double p, const AffinePlane& line, int depth,
                                      std::optional<std::uint64_t> n_max = {});

struct TubeMeasure {
  DiscreteMeasure measure;  // same base as the input
  bool empty = false;
};

// mu restricted to the leaves whose center lies within `width` of the plane,
// scaled by (2 width)^-m.
TubeMeasure tube_measure(const DiscreteMeasure& mu, const AffinePlane& plane, double width);

struct SliceRow {
  double offset = 0.0;
  double slice_dim = 0.0;  // 0 for an empty slice
  std::size_t slice_cubes = 0;
  bool empty = false;
  bool clamped = false;
  bool violation = false;
};

struct SliceReport {
  AffinePlane direction;
  double theta = 1.0;
  double tolerance = 0.15;
  DimensionEstimate ambient;
  double bound = 0.0;  // ambient estimate - m
  std::vector<SliceRow> rows;
  std::size_t violations = 0;

  double violation_fraction() const {
    return rows.empty() ? 0.0 : static_cast<double>(violations) / static_cast<double>(rows.size());
  }
};

// Estimates the ambient dimension once and the dimension of every slice at
// the given offsets, all on the same schedule (the default schedule of the
// set when empty).
SliceReport slice_scan(const DyadicSet& set, double theta, const AffinePlane& direction,
                       std::span<const double> offsets, std::span<const double> schedule,
                       double tolerance, const EstimateOptions& options = {});

struct TubeMassRow {
  double r = 0.0;
  double mass = 0.0;
  double ratio = 0.0;  // mass / (2r)^m
};

struct TubeMassProfile {
  std::vector<TubeMassRow> rows;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  // Slope of log ratio against log(1/r); near m for an atom on the plane.
  double growth_exponent = 0.0;
  bool degenerate = false;  // growth_exponent > 1/2
};

// Mass of the leaves whose projection onto the normal meets the open interval
// (c - r, c + r), for every radius. Radii must be positive and decreasing.
TubeMassProfile tube_mass_profile(const DiscreteMeasure& mu, const AffinePlane& direction,
                                  double c, std::span<const double> radii);

}  // namespace thetadim
