#include "thetadim/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "thetadim/errors.hpp"
#include "thetadim/parallel.hpp"

namespace thetadim {

double KernelSpec::support() const { return std::pow(r, theta); }

void validate(const KernelSpec& spec) {
  if (!(spec.r > 0.0 && spec.r < 1.0)) throw DomainError("kernel: r must lie in (0, 1)");
  if (!(spec.theta > 0.0 && spec.theta <= 1.0)) {
    throw DomainError("kernel: theta must lie in (0, 1]");
  }
  if (!(spec.s >= 0.0)) throw DomainError("kernel: s must be nonnegative");
  if (spec.weight_m < 0) throw DomainError("kernel: weight_m must be nonnegative");
}

double kernel_eval(double dist, const KernelSpec& spec) {
  if (dist < spec.r) return 1.0;
  if (dist < spec.support()) return std::pow(spec.r / dist, spec.s);
  return 0.0;
}

double weighted_kernel_eval(double dist, const KernelSpec& spec) {
  const double k = kernel_eval(dist, spec);
  if (spec.weight_m == 0 || k == 0.0) return k;
  return k * std::pow(dist, -static_cast<double>(spec.weight_m));
}

namespace {

struct EnergyContext {
  const DiscreteMeasure* mu;
  const DyadicSet* set;
  KernelSpec spec;
  double support;
  double support2;
  double floor;
  double r;
  double log_r;
  int dim;
};

double pair_value(const EnergyContext& ctx, double dist) {
  dist = std::max(dist, ctx.floor);
  if (dist >= ctx.support) return 0.0;
  const double m = static_cast<double>(ctx.spec.weight_m);
  if (dist < ctx.r) return m == 0.0 ? 1.0 : std::exp(-m * std::log(dist));
  // (r / dist)^s * dist^-m
  const double ld = std::log(dist);
  return std::exp(ctx.spec.s * (ctx.log_r - ld) - m * ld);
}

void row_walk(const EnergyContext& ctx, const Coords& x, int level, std::size_t i, double& acc) {
  const DyadicSet& set = *ctx.set;
  const DyadicCube cube = set.cube(level, i);
  const Coords lo = cube.lower();
  const double side = cube.side();
  double near2 = 0.0;
  for (int a = 0; a < ctx.dim; ++a) {
    const double gap = std::max({lo[a] - x[a], x[a] - (lo[a] + side), 0.0});
    near2 += gap * gap;
  }
  if (near2 >= ctx.support2) return;
  if (level == set.depth()) {
    const double w = ctx.mu->weights()[i];
    if (w == 0.0) return;
    const Coords c = cube.center();
    double d2 = 0.0;
    for (int a = 0; a < ctx.dim; ++a) d2 += (c[a] - x[a]) * (c[a] - x[a]);
    acc += w * pair_value(ctx, std::sqrt(d2));
    return;
  }
  for (std::uint32_t c = set.child_begin(level, i); c < set.child_end(level, i); ++c) {
    const auto [first, last] = ctx.mu->leaf_range(level + 1, c);
    if (ctx.mu->range_mass(first, last) == 0.0) continue;
    row_walk(ctx, x, level + 1, c, acc);
  }
}

}  // namespace

double energy(const DiscreteMeasure& mu, const KernelSpec& spec, int jobs) {
  validate(spec);
  const DyadicSet& set = mu.base();
  if (set.empty() || mu.is_zero()) return 0.0;
  EnergyContext ctx{&mu,
                    &set,
                    spec,
                    spec.support(),
                    spec.support() * spec.support(),
                    cube_side(set.depth()) / 2.0,
                    spec.r,
                    std::log(spec.r),
                    set.dim()};
  const auto weights = mu.weights();
  std::vector<double> rows(weights.size(), 0.0);
  parallel_for(weights.size(), jobs, [&](std::size_t i) {
    if (weights[i] == 0.0) return;
    const Coords x = set.cube(set.depth(), i).center();
    double acc = 0.0;
    row_walk(ctx, x, 0, 0, acc);
    rows[i] = weights[i] * acc;
  });
  double total = 0.0;
  for (double v : rows) total += v;
  return total;
}

double capacity_lower_bound(const DiscreteMeasure& mu, const KernelSpec& spec, int jobs) {
  if (spec.weight_m != 0) throw ConfigError("capacity_lower_bound: needs the plain kernel");
  if (std::abs(mu.total_mass() - 1.0) > 1e-9) {
    throw PreconditionError("capacity_lower_bound: measure must be a probability measure");
  }
  const double e = energy(mu, spec, jobs);
  if (!(e > 0.0)) throw ZeroEnergyError("capacity_lower_bound: zero energy");
  return std::pow(spec.r, spec.s) / e;
}

}  // namespace thetadim
