#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <vector>

#include "thetadim/dyadic.hpp"
#include "thetadim/kernels.hpp"
#include "thetadim/measures.hpp"

namespace testing {

using namespace thetadim;

// Random leaves at `depth`: each occupied cube keeps every child with
// probability `keep`, and always at least one.
inline DyadicSet random_tree(std::mt19937_64& rng, int dim, int depth, double keep) {
  std::bernoulli_distribution coin(keep);
  const unsigned children = 1u << dim;
  std::vector<MortonCode> level{0};
  for (int n = 0; n < depth; ++n) {
    std::vector<MortonCode> next;
    for (MortonCode code : level) {
      std::vector<MortonCode> kept;
      for (unsigned c = 0; c < children; ++c) {
        if (coin(rng)) kept.push_back((code << dim) | c);
      }
      if (kept.empty()) {
        kept.push_back((code << dim) | std::uniform_int_distribution<unsigned>(0, children - 1)(rng));
      }
      next.insert(next.end(), kept.begin(), kept.end());
    }
    level = std::move(next);
  }
  return DyadicSet::from_leaves(dim, depth, level);
}

inline DiscreteMeasure random_probability(std::mt19937_64& rng, const DyadicSet& set) {
  auto base = std::make_shared<const DyadicSet>(set);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> w(set.leaves().size());
  double total = 0.0;
  for (double& x : w) total += x = u(rng);
  for (double& x : w) x /= total;
  return DiscreteMeasure(base, std::move(w));
}

inline std::vector<double> leaf_center(const DyadicSet& set, std::size_t i) {
  const DyadicCube c = set.cube(set.depth(), i);
  const Coords x = c.center();
  return {x.begin(), x.begin() + set.dim()};
}

// The kernel written out from its definition.
inline double reference_kernel(double dist, double r, double theta, double s, int m) {
  double value = 0.0;
  if (dist < r) value = 1.0;
  else if (dist < std::pow(r, theta)) value = std::pow(r / dist, s);
  return value * std::pow(dist, -m);
}

// Full double sum over every pair of leaf centers, no pruning.
inline double reference_energy(const DiscreteMeasure& mu, const KernelSpec& k) {
  const DyadicSet& set = mu.base();
  const double floor = 0.5 * cube_side(set.depth());
  const auto w = mu.weights();
  long double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const auto a = leaf_center(set, i);
    for (std::size_t j = 0; j < w.size(); ++j) {
      const auto b = leaf_center(set, j);
      double d2 = 0.0;
      for (std::size_t t = 0; t < a.size(); ++t) d2 += (a[t] - b[t]) * (a[t] - b[t]);
      const double dist = std::max(std::sqrt(d2), floor);
      total += static_cast<long double>(w[i]) * w[j] *
               reference_kernel(dist, k.r, k.theta, k.s, k.weight_m);
    }
  }
  return static_cast<double>(total);
}

inline std::set<MortonCode> code_set(std::span<const MortonCode> codes) {
  return {codes.begin(), codes.end()};
}

inline double relative_error(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace testing
