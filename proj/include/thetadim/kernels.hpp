#pragma once

#include "thetadim/measures.hpp"

namespace thetadim {

// phi^s_{r,theta}(x) = 1 for |x| < r, (r/|x|)^s for r <= |x| < r^theta and 0
// beyond, optionally multiplied by |x|^-weight_m.
struct KernelSpec {
  double r = 0.1;
  double theta = 0.5;
  double s = 1.0;
  int weight_m = 0;

  double support() const;  // r^theta
};

void validate(const KernelSpec& spec);

// Plain kernel value (weight_m is ignored).
double kernel_eval(double dist, const KernelSpec& spec);
// kernel_eval(dist) * dist^-weight_m.
double weighted_kernel_eval(double dist, const KernelSpec& spec);

// sum_i sum_j w_i w_j k(|c_i - c_j|) over leaf centers c, with distances
// floored at half the leaf side. Pairs farther apart than the kernel support
// are pruned through the cube tree. Rows are summed independently and merged
// in leaf order, so the value does not depend on `jobs`.
double energy(const DiscreteMeasure& mu, const KernelSpec& spec, int jobs = 1);

// r^s / energy for a probability measure and the plain kernel.
double capacity_lower_bound(const DiscreteMeasure& mu, const KernelSpec& spec, int jobs = 1);

}  // namespace thetadim
