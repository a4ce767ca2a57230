#include "thetadim/covering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "thetadim/errors.hpp"
#include "thetadim/parallel.hpp"

namespace thetadim {

namespace {

constexpr double kScaleTolerance = 1e-12;

void validate_query(const CoveringQuery& q) {
  if (!(q.theta > 0.0 && q.theta <= 1.0)) throw DomainError("theta must lie in (0, 1]");
  if (!(q.delta > 0.0 && q.delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
  if (!(q.s >= 0.0)) throw DomainError("exponent s must be nonnegative");
  if (!(q.upper_slack >= 1.0)) throw DomainError("upper_slack must be at least 1");
  if (!(q.diameter_scale > 0.0)) throw DomainError("diameter_scale must be positive");
}

double level_cost(int dim, int level, double scale, double s) {
  return std::pow(scale * cube_diameter(dim, level), s);
}

double least_squares_slope(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

}  // namespace

LevelRange level_range(const CoveringQuery& q, int dim, int max_depth) {
  validate_query(q);
  const double upper = q.upper_slack * q.delta * (1.0 + kScaleTolerance);
  const double lower = std::pow(q.delta, 1.0 / q.theta) * (1.0 - kScaleTolerance);
  const double min_delta = cube_diameter(dim, max_depth) / q.upper_slack;

  LevelRange range;
  int coarse = 0;
  while (cube_diameter(dim, coarse) > upper) ++coarse;
  if (coarse > max_depth) {
    throw ResolutionError("delta = " + std::to_string(q.delta) +
                              " is finer than the set resolution (depth " +
                              std::to_string(max_depth) + ")",
                          min_delta);
  }
  if (cube_diameter(dim, coarse) < lower) {
    throw ResolutionError("no dyadic diameter lies in [delta^(1/theta), C delta] for delta = " +
                              std::to_string(q.delta),
                          min_delta);
  }
  int fine = coarse;
  // 1100 levels take any positive double below the smallest subnormal.
  while (fine < 1100 && cube_diameter(dim, fine + 1) >= lower) ++fine;
  range.coarse = coarse;
  range.clamped = fine > max_depth;
  range.fine = std::min(fine, max_depth);
  return range;
}

CoverEvaluator::CoverEvaluator(const DyadicSet& set, LevelRange range, double diameter_scale)
    : set_(&set), range_(range), diameter_scale_(diameter_scale) {
  if (set.empty()) throw EmptySetError("covering: empty set");
  if (range.coarse > range.fine || range.fine > set.depth()) {
    throw RangeError("covering: invalid level range");
  }
  min_count_ = set.count(range.coarse);
}

double CoverEvaluator::cost(double s) const {
  std::size_t ignored = 0;
  return cost(s, ignored);
}

double CoverEvaluator::cost(double s, std::size_t& cover_size) const {
  const DyadicSet& set = *set_;
  const int dim = set.dim();
  const int fine = range_.fine;
  const double fine_cost = level_cost(dim, fine, diameter_scale_, s);
  if (fine == 0) {
    cover_size = 1;
    return fine_cost;
  }
  // cost_a_/size_a_ hold level L + 1, cost_b_/size_b_ receive level L.
  for (int level = fine - 1; level >= 0; --level) {
    const std::size_t n = set.count(level);
    cost_b_.resize(n);
    size_b_.resize(n);
    const bool can_take = level >= range_.coarse;
    const double take = can_take ? level_cost(dim, level, diameter_scale_, s) : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint32_t first = set.child_begin(level, i);
      const std::uint32_t last = set.child_end(level, i);
      double split = 0.0;
      std::size_t split_size = 0;
      if (level + 1 == fine) {
        split = fine_cost * static_cast<double>(last - first);
        split_size = last - first;
      } else {
        for (std::uint32_t j = first; j < last; ++j) {
          split += cost_a_[j];
          split_size += size_a_[j];
        }
      }
      if (can_take && take <= split) {
        cost_b_[i] = take;
        size_b_[i] = 1;
      } else {
        cost_b_[i] = split;
        size_b_[i] = split_size;
      }
    }
    std::swap(cost_a_, cost_b_);
    std::swap(size_a_, size_b_);
  }
  cover_size = size_a_[0];
  return cost_a_[0];
}

CoveringResult optimal_cover_cost(const DyadicSet& set, const CoveringQuery& q, bool want_cover) {
  if (set.empty()) throw EmptySetError("optimal_cover_cost: empty set");
  CoveringResult result;
  result.levels = level_range(q, set.dim(), set.depth());
  const LevelRange& r = result.levels;
  if (!want_cover) {
    CoverEvaluator eval(set, r, q.diameter_scale);
    result.cost = eval.cost(q.s, result.cover_size);
    return result;
  }

  const int dim = set.dim();
  std::vector<std::vector<double>> cost(r.fine + 1);
  std::vector<std::vector<char>> take(r.fine + 1);
  cost[r.fine].assign(set.count(r.fine), level_cost(dim, r.fine, q.diameter_scale, q.s));
  take[r.fine].assign(set.count(r.fine), 1);
  for (int level = r.fine - 1; level >= 0; --level) {
    const std::size_t n = set.count(level);
    cost[level].resize(n);
    take[level].assign(n, 0);
    const double own = level_cost(dim, level, q.diameter_scale, q.s);
    for (std::size_t i = 0; i < n; ++i) {
      double split = 0.0;
      for (std::uint32_t j = set.child_begin(level, i); j < set.child_end(level, i); ++j) {
        split += cost[level + 1][j];
      }
      if (level >= r.coarse && own <= split) {
        cost[level][i] = own;
        take[level][i] = 1;
      } else {
        cost[level][i] = split;
      }
    }
  }
  result.cost = cost[0][0];
  std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [level, i] = stack.back();
    stack.pop_back();
    if (take[level][i]) {
      result.cover.push_back({level, set.cubes(level)[i]});
      continue;
    }
    for (std::uint32_t j = set.child_end(level, i); j-- > set.child_begin(level, i);) {
      stack.emplace_back(level + 1, j);
    }
  }
  result.cover_size = result.cover.size();
  return result;
}

namespace {

using Cover = std::vector<std::pair<int, std::size_t>>;

// All antichain covers of the subtree rooted at (level, i).
std::vector<Cover> enumerate_covers(const DyadicSet& set, const LevelRange& r, int level,
                                    std::size_t i, std::size_t max_covers) {
  std::vector<Cover> out;
  if (level >= r.coarse) out.push_back({{level, i}});
  if (level == r.fine) return out;
  std::vector<Cover> partial{Cover{}};
  for (std::uint32_t j = set.child_begin(level, i); j < set.child_end(level, i); ++j) {
    const auto child = enumerate_covers(set, r, level + 1, j, max_covers);
    std::vector<Cover> next;
    if (partial.size() * child.size() > max_covers) {
      throw OverLimitError("brute_force_cover_cost: too many antichain covers");
    }
    next.reserve(partial.size() * child.size());
    for (const auto& head : partial) {
      for (const auto& tail : child) {
        Cover joined = head;
        joined.insert(joined.end(), tail.begin(), tail.end());
        next.push_back(std::move(joined));
      }
    }
    partial = std::move(next);
  }
  if (out.size() + partial.size() > max_covers) {
    throw OverLimitError("brute_force_cover_cost: too many antichain covers");
  }
  out.insert(out.end(), partial.begin(), partial.end());
  return out;
}

}  // namespace

double brute_force_cover_cost(const DyadicSet& set, const CoveringQuery& q, std::size_t limit) {
  if (set.empty()) throw EmptySetError("brute_force_cover_cost: empty set");
  const LevelRange r = level_range(q, set.dim(), set.depth());
  std::size_t in_range = 0;
  for (int level = r.coarse; level <= r.fine; ++level) in_range += set.count(level);
  if (in_range > limit) {
    throw OverLimitError("brute_force_cover_cost: " + std::to_string(in_range) +
                         " cubes in range exceed the limit " + std::to_string(limit));
  }
  const auto covers = enumerate_covers(set, r, 0, 0, 5'000'000);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& cover : covers) {
    double total = 0.0;
    for (const auto& [level, i] : cover) {
      (void)i;
      total += std::pow(q.diameter_scale * std::sqrt(static_cast<double>(set.dim())) *
                            std::ldexp(1.0, -level),
                        q.s);
    }
    best = std::min(best, total);
  }
  return best;
}

Aggregation parse_aggregation(const std::string& name) {
  if (name == "liminf") return Aggregation::kLiminf;
  if (name == "limsup") return Aggregation::kLimsup;
  if (name == "regression") return Aggregation::kRegression;
  throw ConfigError("unknown aggregation mode '" + name + "'");
}

const char* aggregation_name(Aggregation mode) {
  switch (mode) {
    case Aggregation::kLiminf: return "liminf";
    case Aggregation::kLimsup: return "limsup";
    case Aggregation::kRegression: return "regression";
  }
  return "?";
}

namespace {

struct Crossing {
  double s = 0.0;
  bool saturated = false;
};

Crossing epsilon_crossing(const CoverEvaluator& eval, int dim, double epsilon,
                          const EstimateOptions& opt) {
  const double log_eps = std::log(epsilon);
  const double f0 = std::log(static_cast<double>(eval.min_count())) - log_eps;
  if (f0 < -kScaleTolerance) {
    throw NonBracketedError("cost stays below epsilon = " + std::to_string(epsilon) +
                            " for every s >= 0");
  }
  if (f0 <= kScaleTolerance) return {0.0, false};
  double lo = 0.0;
  double hi = static_cast<double>(dim);
  if (std::log(eval.cost(hi)) - log_eps > 0.0) return {hi, true};
  for (int it = 0; it < opt.max_iterations && hi - lo > opt.s_tolerance; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (std::log(eval.cost(mid)) - log_eps > 0.0) lo = mid;
    else hi = mid;
  }
  return {0.5 * (lo + hi), false};
}

double tail_aggregate(std::span<const double> values, Aggregation mode) {
  const std::size_t tail = (values.size() + 1) / 2;
  auto first = values.end() - static_cast<std::ptrdiff_t>(tail);
  switch (mode) {
    case Aggregation::kLiminf: return *std::min_element(first, values.end());
    case Aggregation::kLimsup: return *std::max_element(first, values.end());
    case Aggregation::kRegression:
      return std::accumulate(first, values.end(), 0.0) / static_cast<double>(tail);
  }
  return 0.0;
}

}  // namespace

DimensionEstimate dim_estimate(const DyadicSet& set, double theta,
                               std::span<const double> schedule, const EstimateOptions& opt) {
  if (set.empty()) throw EmptySetError("dim_estimate: empty set");
  if (!(theta > 0.0 && theta <= 1.0)) throw DomainError("dim_estimate: theta must lie in (0, 1]");
  if (!(opt.epsilon > 0.0)) throw DomainError("dim_estimate: epsilon must be positive");
  if (schedule.empty()) throw ConfigError("dim_estimate: empty schedule");
  for (std::size_t k = 1; k < schedule.size(); ++k) {
    if (!(schedule[k] < schedule[k - 1])) {
      throw ConfigError("dim_estimate: schedule must be strictly decreasing");
    }
  }
  if (opt.mode == Aggregation::kRegression && schedule.size() < 2) {
    throw ConfigError("dim_estimate: regression needs at least two scales");
  }

  const int dim = set.dim();
  const std::size_t count = schedule.size();
  std::vector<CoverEvaluator> evals;
  evals.reserve(count);
  DimensionEstimate est;
  est.theta = theta;
  est.mode = opt.mode;
  est.depth = set.depth();
  est.epsilon = opt.epsilon;
  est.per_scale.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    CoveringQuery q;
    q.theta = theta;
    q.delta = schedule[k];
    q.upper_slack = opt.upper_slack;
    const LevelRange r = level_range(q, dim, set.depth());
    evals.emplace_back(set, r);
    est.per_scale[k].delta = schedule[k];
    est.per_scale[k].levels = r;
    est.any_clamped = est.any_clamped || r.clamped;
  }

  auto crossings_at = [&](double epsilon) {
    std::vector<Crossing> out(count);
    parallel_for(count, opt.jobs,
                 [&](std::size_t k) { out[k] = epsilon_crossing(evals[k], dim, epsilon, opt); });
    return out;
  };

  const auto main = crossings_at(opt.epsilon);
  std::vector<double> s_values(count);
  for (std::size_t k = 0; k < count; ++k) {
    ScaleCrossing& row = est.per_scale[k];
    row.s_cross = main[k].s;
    row.saturated = main[k].saturated;
    row.cost_at_cross = evals[k].cost(row.s_cross, row.cover_size);
    s_values[k] = row.s_cross;
  }

  if (opt.epsilon_sensitivity) {
    // NaN when some scale never reaches the shifted threshold.
    auto aggregate = [&](double epsilon) {
      try {
        const auto cs = crossings_at(epsilon);
        std::vector<double> v(count);
        for (std::size_t k = 0; k < count; ++k) v[k] = cs[k].s;
        return tail_aggregate(v, opt.mode);
      } catch (const NonBracketedError&) {
        return std::numeric_limits<double>::quiet_NaN();
      }
    };
    est.epsilon_low_value = aggregate(opt.epsilon / 10.0);
    est.epsilon_high_value = aggregate(opt.epsilon * 10.0);
  }

  if (opt.mode != Aggregation::kRegression) {
    est.value = tail_aggregate(s_values, opt.mode);
    return est;
  }

  // The fit uses the same tail as the crossing modes: coarse scales see the
  // set as a solid blob and only bend the fit toward d. Clamped scales are
  // left out when two unclamped ones remain, since below the stored depth the
  // leaves are full cubes and the cost flattens out.
  std::vector<std::size_t> usable;
  for (std::size_t k = 0; k < count; ++k) {
    if (!est.per_scale[k].levels.clamped) usable.push_back(k);
  }
  if (usable.size() < 2) {
    usable.resize(count);
    std::iota(usable.begin(), usable.end(), std::size_t{0});
  }
  const std::size_t fit = std::max<std::size_t>(2, (usable.size() + 1) / 2);
  usable.erase(usable.begin(), usable.end() - static_cast<std::ptrdiff_t>(fit));
  std::vector<double> x(fit);
  for (std::size_t k = 0; k < fit; ++k) x[k] = std::log(1.0 / schedule[usable[k]]);
  std::vector<double> y(fit);
  auto slope_at = [&](double s) {
    parallel_for(fit, opt.jobs,
                 [&](std::size_t k) { y[k] = std::log(evals[usable[k]].cost(s)); });
    return least_squares_slope(x, y);
  };
  double value = 0.0;
  if (slope_at(0.0) <= kScaleTolerance) {
    value = 0.0;
  } else if (slope_at(static_cast<double>(dim)) >= 0.0) {
    value = static_cast<double>(dim);
  } else {
    double lo = 0.0;
    double hi = static_cast<double>(dim);
    for (int it = 0; it < opt.max_iterations && hi - lo > opt.s_tolerance; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (slope_at(mid) > 0.0) lo = mid;
      else hi = mid;
    }
    value = 0.5 * (lo + hi);
  }
  est.value = value;

  // Residual RMS of log cost around its mean at the fitted exponent (flat
  // profile means a clean zero-slope fit).
  slope_at(value);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(fit);
  double ss = 0.0;
  for (double v : y) ss += (v - my) * (v - my);
  est.regression_rms = std::sqrt(ss / static_cast<double>(fit));
  return est;
}

std::vector<double> default_schedule(int dim, int depth, double theta, int k_min,
                                     int min_scales) {
  std::vector<double> unclamped;
  std::vector<double> clamped;
  for (int k = std::max(k_min, 0); k <= depth; ++k) {
    const double delta = cube_diameter(dim, k);
    if (!(delta < 1.0)) continue;
    CoveringQuery q;
    q.theta = theta;
    q.delta = delta;
    try {
      const LevelRange r = level_range(q, dim, depth);
      (r.clamped ? clamped : unclamped).push_back(delta);
    } catch (const ResolutionError&) {
      break;
    }
  }
  for (std::size_t i = 0;
       static_cast<int>(unclamped.size()) < min_scales && i < clamped.size(); ++i) {
    unclamped.push_back(clamped[i]);
  }
  return unclamped;
}

std::vector<ThetaPoint> theta_sweep(const DyadicSet& set, std::vector<double> thetas,
                                    std::span<const double> schedule,
                                    const EstimateOptions& options) {
  if (thetas.empty()) throw ConfigError("theta_sweep: empty theta grid");
  std::sort(thetas.begin(), thetas.end());
  const std::vector<double> shared(schedule.begin(), schedule.end());
  std::vector<ThetaPoint> out(thetas.size());
  EstimateOptions inner = options;
  const int outer_jobs = options.jobs;
  inner.jobs = 1;
  parallel_for(thetas.size(), outer_jobs, [&](std::size_t i) {
    out[i].theta = thetas[i];
    const std::vector<double> own =
        shared.empty() ? default_schedule(set.dim(), set.depth(), thetas[i]) : shared;
    out[i].estimate = dim_estimate(set, thetas[i], own, inner);
  });
  return out;
}

double box_counting_dimension(const DyadicSet& set, int level_lo, int level_hi) {
  if (set.empty()) throw EmptySetError("box_counting_dimension: empty set");
  if (level_lo < 0 || level_hi > set.depth() || level_hi <= level_lo) {
    throw RangeError("box_counting_dimension: invalid level window");
  }
  std::vector<double> x;
  std::vector<double> y;
  for (int level = level_lo; level <= level_hi; ++level) {
    x.push_back(static_cast<double>(level));
    y.push_back(std::log2(static_cast<double>(set.count(level))));
  }
  return least_squares_slope(x, y);
}

}  // namespace thetadim
