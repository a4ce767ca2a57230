#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "thetadim/dyadic.hpp"

namespace thetadim {

// Restricted covering problem: cover the set by cubes with diameters in
// [delta^(1/theta), upper_slack * delta] minimizing sum |U|^s.
struct CoveringQuery {
  double s = 1.0;
  double theta = 1.0;
  double delta = 0.5;
  double upper_slack = 1.0;
  // Multiplies every cube diameter in the cost (not in the level mapping).
  double diameter_scale = 1.0;
};

struct LevelRange {
  int coarse = 0;
  int fine = 0;
  bool clamped = false;  // fine level was cut at the set depth
};

// L_coarse is the smallest L with sqrt(d) 2^-L <= upper_slack * delta, L_fine
// the largest L with sqrt(d) 2^-L >= delta^(1/theta), clamped to max_depth.
// Throws ResolutionError when the range is empty at this depth.
LevelRange level_range(const CoveringQuery& q, int dim, int max_depth);

struct CoverCube {
  int level = 0;
  MortonCode code = 0;
};

struct CoveringResult {
  double cost = 0.0;
  LevelRange levels;
  std::size_t cover_size = 0;
  std::vector<CoverCube> cover;  // filled on request
};

CoveringResult optimal_cover_cost(const DyadicSet& set, const CoveringQuery& q,
                                  bool want_cover = false);

// Exhaustive minimum over every antichain cover in the level range. Throws
// OverLimitError when more than `limit` cubes lie in the range.
double brute_force_cover_cost(const DyadicSet& set, const CoveringQuery& q,
                              std::size_t limit = 64);

// Evaluates the optimal cover cost of one (set, level range) pair for many
// exponents without reallocating.
class CoverEvaluator {
 public:
  CoverEvaluator(const DyadicSet& set, LevelRange range, double diameter_scale = 1.0);

  double cost(double s) const;
  // Cost together with the number of cubes in the optimal cover.
  double cost(double s, std::size_t& cover_size) const;
  // Minimum number of cubes (the s = 0 cost).
  std::size_t min_count() const { return min_count_; }
  const LevelRange& range() const { return range_; }

 private:
  const DyadicSet* set_;
  LevelRange range_;
  double diameter_scale_;
  std::size_t min_count_ = 0;
  mutable std::vector<double> cost_a_, cost_b_;
  mutable std::vector<std::size_t> size_a_, size_b_;
};

enum class Aggregation { kLiminf, kLimsup, kRegression };

Aggregation parse_aggregation(const std::string& name);
const char* aggregation_name(Aggregation mode);

struct EstimateOptions {
  Aggregation mode = Aggregation::kRegression;
  double epsilon = 1.0;
  double upper_slack = 1.0;
  double s_tolerance = 1e-3;
  int max_iterations = 40;
  bool epsilon_sensitivity = true;
  int jobs = 1;
};

// Per-scale record: the exponent where the optimal cost crosses epsilon.
struct ScaleCrossing {
  double delta = 0.0;
  LevelRange levels;
  double s_cross = 0.0;
  double cost_at_cross = 0.0;
  std::size_t cover_size = 0;
  bool saturated = false;  // cost stays above epsilon up to s = d
};

struct DimensionEstimate {
  double theta = 1.0;
  double value = 0.0;
  Aggregation mode = Aggregation::kRegression;
  std::vector<ScaleCrossing> per_scale;
  int depth = 0;
  double epsilon = 1.0;
  bool any_clamped = false;
  // Regression diagnostics: the zero-slope exponent fit and its residual RMS
  // (log cost units). Unused for the crossing modes.
  double regression_rms = 0.0;
  // Tail aggregate of crossings at epsilon / 10 and epsilon * 10 (NaN when
  // a scale never reaches that threshold).
  double epsilon_low_value = 0.0;
  double epsilon_high_value = 0.0;
};

// Finite-scale estimate of dim_theta.
//  liminf / limsup: min / max of the epsilon crossings over the finest half
//    of the schedule.
//  regression: the exponent s at which the least-squares slope of
//    log S^s(delta_k) against log(1/delta_k) over the same tail vanishes.
DimensionEstimate dim_estimate(const DyadicSet& set, double theta,
                               std::span<const double> schedule,
                               const EstimateOptions& options = {});

// Coarse scales sqrt(d) 2^-k for k = k_min.. up to the finest k whose fine
// level stays within the depth at this theta; at least `min_scales` entries
// (extending into clamped scales when needed).
std::vector<double> default_schedule(int dim, int depth, double theta, int k_min = 2,
                                     int min_scales = 3);

struct ThetaPoint {
  double theta = 1.0;
  DimensionEstimate estimate;
};

// One estimate per theta, sorted by theta. A non-empty schedule is shared by
// every theta; on a shared schedule the crossing modes are nondecreasing in
// theta (up to the bisection tolerance). An empty schedule gives each theta
// its own default_schedule.
std::vector<ThetaPoint> theta_sweep(const DyadicSet& set, std::vector<double> thetas,
                                    std::span<const double> schedule,
                                    const EstimateOptions& options = {});

// Plain box counting: least-squares slope of log2 N_L against L over
// L in [level_lo, level_hi].
double box_counting_dimension(const DyadicSet& set, int level_lo, int level_hi);

}  // namespace thetadim
