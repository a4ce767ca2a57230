#include "thetadim/slicing.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "thetadim/errors.hpp"
#include "thetadim/generators.hpp"
#include "thetadim/parallel.hpp"

namespace thetadim {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

void require_hyperplane(const AffinePlane& plane, const char* who) {
  if (plane.codim() != 1) {
    throw NotImplementedError(std::string(who) + ": only codimension-one planes are supported");
  }
}

// Least-squares slope of ys against xs.
double slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

}  // namespace

void validate(const AffinePlane& plane) {
  const int d = plane.ambient_dim;
  if (d < 2 || d > kMaxDim) throw DomainError("plane: ambient dimension out of range");
  if (plane.frame.empty() || plane.normals.empty() ||
      static_cast<int>(plane.frame.size() + plane.normals.size()) != d) {
    throw DomainError("plane: frame and normals must split the ambient space");
  }
  std::vector<Point> basis = plane.frame;
  basis.insert(basis.end(), plane.normals.begin(), plane.normals.end());
  for (std::size_t i = 0; i < basis.size(); ++i) {
    if (static_cast<int>(basis[i].size()) != d) throw DomainError("plane: vector of wrong length");
    for (std::size_t j = i; j < basis.size(); ++j) {
      const double expected = i == j ? 1.0 : 0.0;
      if (std::abs(dot(basis[i], basis[j]) - expected) > 1e-10) {
        throw DomainError("plane: basis is not orthonormal");
      }
    }
  }
  if (static_cast<int>(plane.offset.size()) != d) throw DomainError("plane: offset of wrong length");
  for (const auto& f : plane.frame) {
    if (std::abs(dot(f, plane.offset)) > 1e-10) {
      throw DomainError("plane: offset is not orthogonal to the frame");
    }
  }
}

AffinePlane sample_plane(int d, int m, std::uint64_t seed) {
  if (d < 2 || d > kMaxDim) throw DomainError("sample_plane: d out of range");
  if (m < 1 || m > d - 1) throw DomainError("sample_plane: m must lie in [1, d - 1]");
  const int k = d - m;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  for (;;) {
    Eigen::MatrixXd g(d, k);
    for (int j = 0; j < k; ++j) {
      for (int i = 0; i < d; ++i) g(i, j) = gauss(rng);
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    bool degenerate = false;
    for (int j = 0; j < k; ++j) degenerate |= std::abs(r(j, j)) < 1e-6;
    if (degenerate) continue;
    const Eigen::MatrixXd q = qr.householderQ();
    AffinePlane plane;
    plane.ambient_dim = d;
    plane.offset.assign(d, 0.0);
    for (int j = 0; j < d; ++j) {
      Point column(d);
      for (int i = 0; i < d; ++i) column[i] = q(i, j);
      (j < k ? plane.frame : plane.normals).push_back(std::move(column));
    }
    return plane;
  }
}

AffinePlane axis_plane(int d, int normal_axis) {
  if (d < 2 || d > kMaxDim) throw DomainError("axis_plane: d out of range");
  if (normal_axis < 0 || normal_axis >= d) throw DomainError("axis_plane: axis out of range");
  AffinePlane plane;
  plane.ambient_dim = d;
  plane.offset.assign(d, 0.0);
  for (int a = 0; a < d; ++a) {
    Point e(d, 0.0);
    e[a] = 1.0;
    (a == normal_axis ? plane.normals : plane.frame).push_back(std::move(e));
  }
  return plane;
}

AffinePlane line_plane(double angle) {
  AffinePlane plane;
  plane.ambient_dim = 2;
  plane.frame = {{std::cos(angle), std::sin(angle)}};
  plane.normals = {{-std::sin(angle), std::cos(angle)}};
  plane.offset = {0.0, 0.0};
  return plane;
}

AffinePlane at_offset(const AffinePlane& direction, double c) {
  require_hyperplane(direction, "at_offset");
  AffinePlane plane = direction;
  for (int i = 0; i < plane.ambient_dim; ++i) plane.offset[i] = c * plane.normals[0][i];
  return plane;
}

double offset_coordinate(const AffinePlane& plane) {
  require_hyperplane(plane, "offset_coordinate");
  return dot(plane.offset, plane.normals[0]);
}

double line_angle(const AffinePlane& plane) {
  if (plane.ambient_dim != 2 || plane.frame.size() != 1) {
    throw DomainError("line_angle: not a line in the plane");
  }
  double a = std::atan2(plane.frame[0][1], plane.frame[0][0]);
  if (a < 0.0) a += std::numbers::pi;
  if (a >= std::numbers::pi) a -= std::numbers::pi;
  return a;
}

std::string frame_label(const AffinePlane& plane) {
  char buf[64];
  if (plane.ambient_dim == 2 && plane.frame.size() == 1) {
    std::snprintf(buf, sizeof buf, "angle=%.12g", line_angle(plane));
    return buf;
  }
  std::string out = "normal=";
  for (std::size_t j = 0; j < plane.normals.size(); ++j) {
    if (j > 0) out += '|';
    for (int i = 0; i < plane.ambient_dim; ++i) {
      std::snprintf(buf, sizeof buf, "%s%.12g", i > 0 ? ";" : "", plane.normals[j][i]);
      out += buf;
    }
  }
  return out;
}

std::pair<double, double> projection_interval(const AffinePlane& plane, const DyadicCube& cube) {
  require_hyperplane(plane, "projection_interval");
  const auto& u = plane.normals[0];
  const Coords lo = cube.lower();
  const double side = cube.side();
  double base = 0.0, neg = 0.0, pos = 0.0;
  for (int a = 0; a < plane.ambient_dim; ++a) {
    base += lo[a] * u[a];
    (u[a] < 0.0 ? neg : pos) += side * u[a];
  }
  return {base + neg, base + pos};
}

std::pair<double, double> unit_projection_interval(const AffinePlane& plane) {
  DyadicCube unit;
  unit.level = 0;
  unit.dim = plane.ambient_dim;
  return projection_interval(plane, unit);
}

bool cube_meets_plane(const DyadicCube& cube, const AffinePlane& plane) {
  const auto [lo, hi] = projection_interval(plane, cube);
  const double c = offset_coordinate(plane);
  return lo <= c && c <= hi;
}

std::vector<double> generic_offsets(const AffinePlane& direction, std::size_t count,
                                    double margin) {
  if (count == 0) throw DomainError("generic_offsets: count must be positive");
  const auto [lo, hi] = unit_projection_interval(direction);
  const double span = hi - lo - 2.0 * margin;
  if (!(margin >= 0.0) || !(span > 0.0)) throw DomainError("generic_offsets: margin too large");
  const double phase = std::numbers::sqrt2 / 2.0;
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) {
    out[k] = lo + margin + span * (static_cast<double>(k) + phase) / static_cast<double>(count);
  }
  return out;
}

DyadicSet slice_set(const DyadicSet& set, const AffinePlane& plane, int level) {
  if (plane.ambient_dim != set.dim()) throw ConfigError("slice_set: dimension mismatch");
  if (set.dim() < 2 || set.dim() > 3 || plane.codim() != 1) {
    throw NotImplementedError("slice_set: only lines in 2D and planes in 3D are supported");
  }
  if (level < 0 || level > set.depth()) throw DomainError("slice_set: level outside [0, depth]");
  std::vector<MortonCode> hits;
  if (!set.empty()) {
    std::vector<std::size_t> frontier{0};
    for (int n = 0; n <= level; ++n) {
      std::vector<std::size_t> next;
      for (std::size_t i : frontier) {
        if (!cube_meets_plane(set.cube(n, i), plane)) continue;
        if (n == level) {
          hits.push_back(set.cubes(n)[i]);
        } else {
          for (std::uint32_t c = set.child_begin(n, i); c < set.child_end(n, i); ++c) {
            next.push_back(c);
          }
        }
      }
      frontier = std::move(next);
    }
  }
  return DyadicSet::from_leaves(set.dim(), level, std::move(hits));
}

DyadicSet rotated_sequence_line_slice(double p, const AffinePlane& line, int depth,
                                      std::optional<std::uint64_t> n_max) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("rotated_sequence_line_slice: p must lie in (0, 1)");
  if (line.ambient_dim != 2 || line.codim() != 1) {
    throw ConfigError("rotated_sequence_line_slice: expects a line in the plane");
  }
  check_grid(1, depth);
  const Point& u = line.normals[0];
  const double h = offset_coordinate(line) - 0.5 * (u[0] + u[1]);
  // R_n = n^-p / 2 > |h| exactly for n < (2|h|)^(-1/p).
  const double crossing = std::pow(2.0 * std::abs(h), -1.0 / p);
  if (!(crossing < 1e7) && !n_max) {
    throw RangeError("rotated_sequence_line_slice: line too close to the center");
  }
  const std::uint64_t terms =
      std::min<std::uint64_t>(n_max.value_or(std::uint64_t{10000000}),
                              static_cast<std::uint64_t>(std::ceil(crossing)));
  std::vector<MortonCode> leaves;
  for (std::uint64_t n = 1; n <= terms; ++n) {
    const double radius = 0.5 * std::pow(static_cast<double>(n), -p);
    if (!(radius > std::abs(h))) break;
    const double x = std::sqrt(radius * radius - h * h);
    leaves.push_back(closed_cell(0.5 - x, depth));
    leaves.push_back(closed_cell(0.5 + x, depth));
  }
  return DyadicSet::from_leaves(1, depth, std::move(leaves));
}

TubeMeasure tube_measure(const DiscreteMeasure& mu, const AffinePlane& plane, double width) {
  if (!(width > 0.0)) throw DomainError("tube_measure: width must be positive");
  const DyadicSet& set = mu.base();
  if (plane.ambient_dim != set.dim()) throw ConfigError("tube_measure: dimension mismatch");
  const int m = plane.codim();
  std::vector<double> shift(m);
  for (int j = 0; j < m; ++j) shift[j] = dot(plane.offset, plane.normals[j]);
  const double scale = std::pow(2.0 * width, -static_cast<double>(m));
  const auto in = mu.weights();
  std::vector<double> out(in.size(), 0.0);
  bool empty = true;
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (in[i] == 0.0) continue;
    const Coords c = set.cube(set.depth(), i).center();
    const std::span<const double> x(c.data(), set.dim());
    double d2 = 0.0;
    for (int j = 0; j < m; ++j) {
      const double g = dot(x, plane.normals[j]) - shift[j];
      d2 += g * g;
    }
    if (std::sqrt(d2) <= width) {
      out[i] = in[i] * scale;
      empty = false;
    }
  }
  return {DiscreteMeasure(mu.base_ptr(), std::move(out)), empty};
}

SliceReport slice_scan(const DyadicSet& set, double theta, const AffinePlane& direction,
                       std::span<const double> offsets, std::span<const double> schedule,
                       double tolerance, const EstimateOptions& options) {
  require_hyperplane(direction, "slice_scan");
  if (!(tolerance >= 0.0)) throw DomainError("slice_scan: tolerance must be nonnegative");
  const auto [lo, hi] = unit_projection_interval(direction);
  for (double c : offsets) {
    if (c < lo || c > hi) throw DomainError("slice_scan: offset outside the projection of the unit cube");
  }
  std::vector<double> scales(schedule.begin(), schedule.end());
  if (scales.empty()) scales = default_schedule(set.dim(), set.depth(), theta);

  SliceReport report;
  report.direction = direction;
  report.theta = theta;
  report.tolerance = tolerance;
  report.ambient = dim_estimate(set, theta, scales, options);
  report.bound = report.ambient.value - direction.codim();
  report.rows.resize(offsets.size());

  EstimateOptions inner = options;
  inner.jobs = 1;
  parallel_for(offsets.size(), options.jobs, [&](std::size_t k) {
    SliceRow& row = report.rows[k];
    row.offset = offsets[k];
    const DyadicSet slice = slice_set(set, at_offset(direction, offsets[k]), set.depth());
    row.empty = slice.empty();
    if (!row.empty) {
      row.slice_cubes = slice.leaves().size();
      const DimensionEstimate est = dim_estimate(slice, theta, scales, inner);
      row.slice_dim = est.value;
      row.clamped = est.any_clamped;
    }
    row.violation = row.slice_dim > report.bound + tolerance;
  });
  for (const auto& row : report.rows) report.violations += row.violation ? 1 : 0;
  return report;
}

namespace {

double tube_walk(const DiscreteMeasure& mu, const AffinePlane& plane, double lo, double hi,
                 int level, std::size_t i) {
  const DyadicSet& set = mu.base();
  const auto [plo, phi] = projection_interval(plane, set.cube(level, i));
  if (phi <= lo || plo >= hi) return 0.0;
  if (level == set.depth() || (lo < plo && phi < hi)) return mu.cube_mass(level, i);
  double acc = 0.0;
  for (std::uint32_t c = set.child_begin(level, i); c < set.child_end(level, i); ++c) {
    acc += tube_walk(mu, plane, lo, hi, level + 1, c);
  }
  return acc;
}

}  // namespace

TubeMassProfile tube_mass_profile(const DiscreteMeasure& mu, const AffinePlane& direction,
                                  double c, std::span<const double> radii) {
  require_hyperplane(direction, "tube_mass_profile");
  if (direction.ambient_dim != mu.base().dim()) {
    throw ConfigError("tube_mass_profile: dimension mismatch");
  }
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (!(radii[k] > 0.0)) throw DomainError("tube_mass_profile: radii must be positive");
    if (k > 0 && !(radii[k] < radii[k - 1])) {
      throw DomainError("tube_mass_profile: radii must be decreasing");
    }
  }
  TubeMassProfile profile;
  std::vector<double> xs, ys;
  for (double r : radii) {
    TubeMassRow row;
    row.r = r;
    row.mass = mu.base().empty() ? 0.0 : tube_walk(mu, direction, c - r, c + r, 0, 0);
    row.ratio = row.mass / (2.0 * r);
    if (row.mass > 0.0) {
      xs.push_back(-std::log(r));
      ys.push_back(std::log(row.ratio));
    }
    profile.rows.push_back(row);
  }
  if (!profile.rows.empty()) {
    auto [mn, mx] = std::minmax_element(profile.rows.begin(), profile.rows.end(),
                                        [](const auto& a, const auto& b) { return a.ratio < b.ratio; });
    profile.min_ratio = mn->ratio;
    profile.max_ratio = mx->ratio;
  }
  if (xs.size() >= 2) profile.growth_exponent = slope(xs, ys);
  profile.degenerate = profile.growth_exponent > 0.5;
  return profile;
}

}  // namespace thetadim
