#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "thetadim/covering.hpp"
#include "thetadim/dyadic.hpp"

namespace thetadim {

// Nonnegative weights on the leaves of a DyadicSet (aligned with
// set.leaves()). Immutable.
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;
  DiscreteMeasure(std::shared_ptr<const DyadicSet> base, std::vector<double> weights);

  // Equal weight on every leaf, total mass 1.
  static DiscreteMeasure uniform(std::shared_ptr<const DyadicSet> base);

  const DyadicSet& base() const { return *base_; }
  const std::shared_ptr<const DyadicSet>& base_ptr() const { return base_; }
  std::span<const double> weights() const { return weights_; }
  double total_mass() const { return total_; }
  bool is_zero() const { return total_ == 0.0; }

  // Leaves [first, last) below cube i of `level`.
  std::pair<std::size_t, std::size_t> leaf_range(int level, std::size_t i) const;
  // Mass of the leaves in [first, last).
  double range_mass(std::size_t first, std::size_t last) const;
  double cube_mass(int level, std::size_t i) const;
  // Masses of every occupied cube at `level`, summed bottom-up.
  std::vector<double> level_masses(int level) const;

  DiscreteMeasure scaled(double factor) const;

 private:
  std::shared_ptr<const DyadicSet> base_;
  std::vector<double> weights_;
  std::vector<long double> prefix_;
  double total_ = 0.0;
};

// The same measure on the set truncated at `level` (weights summed per cube).
DiscreteMeasure coarsen(const DiscreteMeasure& mu, int level);

// Sum of the weights of the leaves whose cube meets the open ball B(x, r).
double ball_mass(const DiscreteMeasure& mu, std::span<const double> x, double r);

// How a cube whose mass exceeds its cap is brought down to the cap.
enum class CapRule {
  // Scale the whole subtree by cap / mass.
  kRescale,
  // Redistribute cap uniformly by child counts, discarding the previous shape.
  kUniformReset,
};

struct FrostmanTrace {
  double t = 0.0;
  double alpha = 0.0;
  double theta = 0.0;
  double delta = 0.0;
  CapRule rule = CapRule::kRescale;
  int m = 0;    // 2^-(m+1) < delta^(1/theta) <= 2^-m
  int top = 0;  // coarsest level with sqrt(d) 2^-top <= delta
  int ell = 0;  // m - top
  int depth = 0;
  // caps[j - top] = 2^(-j t) for j = top..m.
  std::vector<double> caps;
  // stage_masses[i] holds the level-m cube masses of mu_{m-i}, i = 0..ell.
  std::vector<std::vector<double>> stage_masses;
  // Unnormalized final masses of the cubes of every level top..m.
  std::vector<std::vector<double>> level_masses;
  std::vector<std::size_t> capped_per_level;  // index j - top
  // Product of child counts from level m down to each leaf.
  std::vector<double> leaf_phi;
  double normalization = 0.0;  // total mass before normalizing
  // Coarsest cube on every branch whose final mass meets its cap.
  std::vector<CoverCube> saturated_cover;
  std::size_t unsaturated_cover_cubes = 0;
  double cover_cost = 0.0;  // sum |Q|^t over saturated_cover
};

struct FrostmanResult {
  DiscreteMeasure measure;
  FrostmanTrace trace;
};

// Capped dyadic mass distribution: 2^-mt on every occupied level-m cube,
// split uniformly by child counts below, then capped top-down to 2^-jt on
// each level j = m-1 .. top, then normalized. alpha is recorded for the
// profile check; it is not required to lie below the dyadic dimension.
FrostmanResult build_joint_frostman(std::shared_ptr<const DyadicSet> set, double t, double alpha,
                                    double theta, double delta,
                                    CapRule rule = CapRule::kRescale);

struct FrostmanAudit {
  double worst_cap_ratio = 0.0;     // max over cubes of mass / cap
  double worst_chain_ratio = 0.0;   // max over stages and cubes of later / earlier
  bool totals_nonincreasing = true;
  double mass_error = 0.0;          // |total - 1|
  double normalization_floor = 0.0; // d^(-t/2) * optimal cover cost at (t, theta, delta)
  bool caps_hold(double tol = 1e-12) const { return worst_cap_ratio <= 1.0 + tol; }
  bool chain_holds(double tol = 1e-12) const {
    return worst_chain_ratio <= 1.0 + tol && totals_nonincreasing;
  }
};

// Re-derives the cap and monotone-chain properties from the returned measure
// and the recorded stages.
FrostmanAudit audit_frostman(const FrostmanResult& result);

// Two-regime ball bound: fine^(outer - inner) r^inner below the fine scale,
// r^outer between the fine and the coarse scale.
struct ProfileSpec {
  double fine_scale = 0.0;
  double coarse_scale = 0.0;
  double outer_exponent = 0.0;
  double inner_exponent = 0.0;
};

// Regimes (0, delta^(1/theta)) and [delta^(1/theta), delta] with exponents
// (alpha, t), as produced by build_joint_frostman.
ProfileSpec frostman_profile(double t, double alpha, double theta, double delta);
// Regimes (0, delta) and [delta, delta^theta] with exponents (h, s).
ProfileSpec joint_profile(double s, double h, double theta, double delta);
double profile_bound(const ProfileSpec& spec, double r);

struct ProfileReport {
  double c_fine = 0.0;    // max ratio over radii below the fine scale
  double c_coarse = 0.0;  // max ratio over radii in [fine, coarse]
  double c() const { return c_fine > c_coarse ? c_fine : c_coarse; }
  bool fine_resolved = false;  // some radius below the fine scale exceeds a leaf side
  std::vector<double> radii;
  std::vector<double> max_ratio;  // per radius, over centers
  std::vector<double> worst_center;
  double worst_radius = 0.0;
  std::size_t centers = 0;
  // Least-squares slope of log max_ratio against log(1/r); a positive slope
  // means the ratio grows as r shrinks.
  double growth_exponent = 0.0;
  bool bounded = true;
};

// Max of mu(B(x, r)) / bound(r) over leaf centers (every k-th leaf so that at
// most sample_count are used) and log-spaced radii from one leaf side up to
// the coarse scale.
ProfileReport verify_frostman_profile(const DiscreteMeasure& mu, const ProfileSpec& spec,
                                      std::size_t sample_count, int radii_per_regime = 10,
                                      int jobs = 1);

// Text format: '#' comments, a header line `d,depth,total_mass`, one line of
// values, then one line per leaf: indices followed by the weight.
void write_measure(std::ostream& out, const DiscreteMeasure& mu, std::string_view comment = {});
DiscreteMeasure read_measure(std::istream& in);
void save_measure(const std::string& path, const DiscreteMeasure& mu,
                  std::string_view comment = {});
DiscreteMeasure load_measure(const std::string& path);

// Summary of a trace (array fields are reduced to per-level statistics).
std::string frostman_trace_json(const FrostmanTrace& trace);

const char* cap_rule_name(CapRule rule);
CapRule parse_cap_rule(const std::string& name);

}  // namespace thetadim
