#include "thetadim/measures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "thetadim/errors.hpp"
#include "thetadim/parallel.hpp"

namespace thetadim {

DiscreteMeasure::DiscreteMeasure(std::shared_ptr<const DyadicSet> base, std::vector<double> weights)
    : base_(std::move(base)), weights_(std::move(weights)) {
  if (!base_) throw ConfigError("DiscreteMeasure: null base set");
  if (weights_.size() != base_->leaves().size()) {
    throw ConfigError("DiscreteMeasure: weight count does not match the leaf count");
  }
  prefix_.assign(weights_.size() + 1, 0.0L);
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (!(weights_[i] >= 0.0) || !std::isfinite(weights_[i])) {
      throw DomainError("DiscreteMeasure: weights must be finite and nonnegative");
    }
    prefix_[i + 1] = prefix_[i] + weights_[i];
  }
  total_ = static_cast<double>(prefix_.back());
}

DiscreteMeasure DiscreteMeasure::uniform(std::shared_ptr<const DyadicSet> base) {
  if (!base || base->empty()) throw EmptySetError("DiscreteMeasure::uniform: empty set");
  const std::size_t n = base->leaves().size();
  return DiscreteMeasure(std::move(base), std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

std::pair<std::size_t, std::size_t> DiscreteMeasure::leaf_range(int level, std::size_t i) const {
  std::size_t first = i;
  std::size_t last = i + 1;
  for (int n = level; n < base_->depth(); ++n) {
    first = base_->child_begin(n, first);
    last = base_->child_end(n, last - 1);
  }
  return {first, last};
}

double DiscreteMeasure::range_mass(std::size_t first, std::size_t last) const {
  return static_cast<double>(prefix_[last] - prefix_[first]);
}

double DiscreteMeasure::cube_mass(int level, std::size_t i) const {
  const auto [first, last] = leaf_range(level, i);
  return range_mass(first, last);
}

std::vector<double> DiscreteMeasure::level_masses(int level) const {
  if (level < 0 || level > base_->depth()) throw RangeError("level_masses: level out of range");
  std::vector<double> cur = weights_;
  for (int n = base_->depth() - 1; n >= level; --n) {
    std::vector<double> up(base_->count(n), 0.0);
    for (std::size_t i = 0; i < up.size(); ++i) {
      double sum = 0.0;
      for (std::uint32_t c = base_->child_begin(n, i); c < base_->child_end(n, i); ++c) {
        sum += cur[c];
      }
      up[i] = sum;
    }
    cur = std::move(up);
  }
  return cur;
}

DiscreteMeasure DiscreteMeasure::scaled(double factor) const {
  std::vector<double> w = weights_;
  for (double& v : w) v *= factor;
  return DiscreteMeasure(base_, std::move(w));
}

DiscreteMeasure coarsen(const DiscreteMeasure& mu, int level) {
  const DyadicSet& set = mu.base();
  if (level < 0 || level > set.depth()) throw RangeError("coarsen: level out of range");
  if (level == set.depth()) return mu;
  auto coarse = std::make_shared<const DyadicSet>(set.truncated(level));
  return DiscreteMeasure(coarse, mu.level_masses(level));
}

namespace {

struct CubeBox {
  Coords lo{};
  double side = 0.0;
};

CubeBox cube_box(const DyadicSet& set, int level, std::size_t i) {
  const DyadicCube cube = set.cube(level, i);
  return {cube.lower(), cube.side()};
}

// Squared distances from x to the nearest and farthest points of the box.
std::pair<double, double> box_distances2(const CubeBox& box, std::span<const double> x) {
  double near2 = 0.0;
  double far2 = 0.0;
  for (std::size_t a = 0; a < x.size(); ++a) {
    const double lo = box.lo[a];
    const double hi = lo + box.side;
    const double below = lo - x[a];
    const double above = x[a] - hi;
    const double gap = std::max({below, above, 0.0});
    near2 += gap * gap;
    const double reach = std::max(std::abs(x[a] - lo), std::abs(x[a] - hi));
    far2 += reach * reach;
  }
  return {near2, far2};
}

void ball_walk(const DiscreteMeasure& mu, std::span<const double> x, double r2, int level,
               std::size_t i, double& acc) {
  const DyadicSet& set = mu.base();
  const auto [near2, far2] = box_distances2(cube_box(set, level, i), x);
  if (near2 >= r2) return;
  if (far2 < r2 || level == set.depth()) {
    acc += mu.cube_mass(level, i);
    return;
  }
  for (std::uint32_t c = set.child_begin(level, i); c < set.child_end(level, i); ++c) {
    ball_walk(mu, x, r2, level + 1, c, acc);
  }
}

}  // namespace

double ball_mass(const DiscreteMeasure& mu, std::span<const double> x, double r) {
  if (!(r > 0.0)) throw DomainError("ball_mass: radius must be positive");
  const DyadicSet& set = mu.base();
  if (static_cast<int>(x.size()) != set.dim()) throw ConfigError("ball_mass: dimension mismatch");
  if (set.empty()) return 0.0;
  double acc = 0.0;
  ball_walk(mu, x, r * r, 0, 0, acc);
  return acc;
}

const char* cap_rule_name(CapRule rule) {
  return rule == CapRule::kRescale ? "rescale" : "uniform-reset";
}

CapRule parse_cap_rule(const std::string& name) {
  if (name == "rescale") return CapRule::kRescale;
  if (name == "uniform-reset") return CapRule::kUniformReset;
  throw ConfigError("unknown cap rule '" + name + "' (expected rescale or uniform-reset)");
}

FrostmanResult build_joint_frostman(std::shared_ptr<const DyadicSet> set_ptr, double t,
                                    double alpha, double theta, double delta, CapRule rule) {
  if (!set_ptr || set_ptr->empty()) throw EmptySetError("build_joint_frostman: empty set");
  const DyadicSet& set = *set_ptr;
  const int dim = set.dim();
  if (!(theta > 0.0 && theta < 1.0)) {
    throw DomainError("build_joint_frostman: theta must lie in (0, 1)");
  }
  if (!(t > 0.0 && t <= dim)) throw DomainError("build_joint_frostman: t must lie in (0, d]");
  if (!(alpha > 0.0)) throw DomainError("build_joint_frostman: alpha must be positive");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw DomainError("build_joint_frostman: delta must lie in (0, 1)");
  }

  FrostmanTrace tr;
  tr.t = t;
  tr.alpha = alpha;
  tr.theta = theta;
  tr.delta = delta;
  tr.rule = rule;
  tr.depth = set.depth();
  const double fine_exp = -std::log2(delta) / theta;
  tr.m = static_cast<int>(std::floor(fine_exp + 1e-9));
  tr.top = std::max(0, static_cast<int>(std::ceil(std::log2(std::sqrt(dim) / delta) - 1e-9)));
  tr.ell = tr.m - tr.top;
  if (tr.m > set.depth()) {
    throw ResolutionError("build_joint_frostman: level m = " + std::to_string(tr.m) +
                              " exceeds depth " + std::to_string(set.depth()),
                          std::exp2(-static_cast<double>(set.depth()) * theta));
  }
  if (tr.ell < 1) {
    throw DegenerateScaleError("build_joint_frostman: delta and delta^(1/theta) resolve to "
                               "levels " + std::to_string(tr.top) + " and " +
                               std::to_string(tr.m) + "; need at least one level between");
  }

  const int m = tr.m;
  const int top = tr.top;
  for (int j = top; j <= m; ++j) tr.caps.push_back(std::exp2(-static_cast<double>(j) * t));

  // Level-m index range below every cube of levels top..m.
  std::vector<std::vector<std::uint32_t>> first(m - top + 1), last(m - top + 1);
  {
    const std::size_t nm = set.count(m);
    first[m - top].resize(nm);
    last[m - top].resize(nm);
    for (std::size_t i = 0; i < nm; ++i) {
      first[m - top][i] = static_cast<std::uint32_t>(i);
      last[m - top][i] = static_cast<std::uint32_t>(i + 1);
    }
    for (int j = m - 1; j >= top; --j) {
      const std::size_t nj = set.count(j);
      first[j - top].resize(nj);
      last[j - top].resize(nj);
      for (std::size_t i = 0; i < nj; ++i) {
        first[j - top][i] = first[j + 1 - top][set.child_begin(j, i)];
        last[j - top][i] = last[j + 1 - top][set.child_end(j, i) - 1];
      }
    }
  }
  auto subtree_sum = [&](const std::vector<double>& level_m, int j, std::size_t i) {
    double sum = 0.0;
    for (std::uint32_t q = first[j - top][i]; q < last[j - top][i]; ++q) sum += level_m[q];
    return sum;
  };
  // Writes value / Phi into the level-m cubes below cube i of level j.
  auto spread = [&](std::vector<double>& level_m, int j, std::size_t i, double value,
                    auto&& self) -> void {
    if (j == m) {
      level_m[i] = value;
      return;
    }
    const std::uint32_t b = set.child_begin(j, i);
    const std::uint32_t e = set.child_end(j, i);
    const double share = value / static_cast<double>(e - b);
    for (std::uint32_t c = b; c < e; ++c) self(level_m, j + 1, c, share, self);
  };

  std::vector<double> mass(set.count(m), tr.caps.back());
  tr.stage_masses.push_back(mass);
  tr.capped_per_level.assign(m - top + 1, 0);
  for (int j = m - 1; j >= top; --j) {
    const double cap = tr.caps[j - top];
    for (std::size_t i = 0; i < set.count(j); ++i) {
      const double current = subtree_sum(mass, j, i);
      if (!(current > cap)) continue;
      ++tr.capped_per_level[j - top];
      if (rule == CapRule::kRescale) {
        const double factor = cap / current;
        for (std::uint32_t q = first[j - top][i]; q < last[j - top][i]; ++q) mass[q] *= factor;
      } else {
        spread(mass, j, i, cap, spread);
      }
    }
    tr.stage_masses.push_back(mass);
  }

  tr.level_masses.resize(m - top + 1);
  tr.level_masses[m - top] = mass;
  for (int j = m - 1; j >= top; --j) {
    auto& up = tr.level_masses[j - top];
    const auto& down = tr.level_masses[j + 1 - top];
    up.assign(set.count(j), 0.0);
    for (std::size_t i = 0; i < up.size(); ++i) {
      double sum = 0.0;
      for (std::uint32_t c = set.child_begin(j, i); c < set.child_end(j, i); ++c) sum += down[c];
      up[i] = sum;
    }
  }
  {
    long double total = 0.0L;
    for (double v : mass) total += v;
    tr.normalization = static_cast<double>(total);
  }

  // Coarsest cube meeting its cap on every branch.
  auto select = [&](int j, std::size_t i, auto&& self) -> void {
    const double cap = tr.caps[j - top];
    const double value = tr.level_masses[j - top][i];
    if (value >= cap * (1.0 - 1e-12) || j == m) {
      if (value < cap * (1.0 - 1e-12)) ++tr.unsaturated_cover_cubes;
      tr.saturated_cover.push_back({j, set.cubes(j)[i]});
      tr.cover_cost += std::pow(cube_diameter(dim, j), t);
      return;
    }
    for (std::uint32_t c = set.child_begin(j, i); c < set.child_end(j, i); ++c) {
      self(j + 1, c, self);
    }
  };
  for (std::size_t i = 0; i < set.count(top); ++i) select(top, i, select);

  // Uniform split from level m down to the leaves.
  std::vector<double> weight(mass.size());
  std::vector<double> phi(mass.size(), 1.0);
  for (std::size_t i = 0; i < mass.size(); ++i) weight[i] = mass[i] / tr.normalization;
  for (int n = m; n < set.depth(); ++n) {
    std::vector<double> next_w(set.count(n + 1));
    std::vector<double> next_phi(set.count(n + 1));
    for (std::size_t i = 0; i < set.count(n); ++i) {
      const std::uint32_t b = set.child_begin(n, i);
      const std::uint32_t e = set.child_end(n, i);
      const double k = static_cast<double>(e - b);
      for (std::uint32_t c = b; c < e; ++c) {
        next_w[c] = weight[i] / k;
        next_phi[c] = phi[i] * k;
      }
    }
    weight = std::move(next_w);
    phi = std::move(next_phi);
  }
  tr.leaf_phi = std::move(phi);

  return {DiscreteMeasure(std::move(set_ptr), std::move(weight)), std::move(tr)};
}

FrostmanAudit audit_frostman(const FrostmanResult& result) {
  const FrostmanTrace& tr = result.trace;
  const DiscreteMeasure& mu = result.measure;
  FrostmanAudit audit;
  audit.mass_error = std::abs(mu.total_mass() - 1.0);

  // Caps, recomputed from the returned measure.
  std::vector<double> masses = mu.level_masses(tr.m);
  std::vector<double> final_m = masses;
  for (double& v : final_m) v *= tr.normalization;
  const DyadicSet& set = mu.base();
  std::vector<double> cur = final_m;
  for (int j = tr.m; j >= tr.top; --j) {
    if (j < tr.m) {
      std::vector<double> up(set.count(j), 0.0);
      for (std::size_t i = 0; i < up.size(); ++i) {
        for (std::uint32_t c = set.child_begin(j, i); c < set.child_end(j, i); ++c) up[i] += cur[c];
      }
      cur = std::move(up);
    }
    const double cap = tr.caps[j - tr.top];
    for (double v : cur) audit.worst_cap_ratio = std::max(audit.worst_cap_ratio, v / cap);
  }

  // Monotone chain mu_{m-ell} <= ... <= mu_m on the level-m cubes; coarser
  // cubes are sums of these and finer ones are fixed fractions.
  auto chain = tr.stage_masses;
  chain.push_back(final_m);
  double prev_total = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < chain.size(); ++s) {
    const double total = std::accumulate(chain[s].begin(), chain[s].end(), 0.0);
    if (total > prev_total * (1.0 + 1e-12)) audit.totals_nonincreasing = false;
    prev_total = total;
    if (s == 0) continue;
    for (std::size_t q = 0; q < chain[s].size(); ++q) {
      const double before = chain[s - 1][q];
      const double after = chain[s][q];
      if (before > 0.0) {
        audit.worst_chain_ratio = std::max(audit.worst_chain_ratio, after / before);
      } else if (after > 0.0) {
        audit.worst_chain_ratio = std::numeric_limits<double>::infinity();
      }
    }
  }

  CoveringQuery q;
  q.s = tr.t;
  q.theta = tr.theta;
  q.delta = tr.delta;
  audit.normalization_floor =
      optimal_cover_cost(set, q).cost * std::pow(static_cast<double>(set.dim()), -tr.t / 2.0);
  return audit;
}

ProfileSpec frostman_profile(double t, double alpha, double theta, double delta) {
  return {std::pow(delta, 1.0 / theta), delta, t, alpha};
}

ProfileSpec joint_profile(double s, double h, double theta, double delta) {
  return {delta, std::pow(delta, theta), s, h};
}

double profile_bound(const ProfileSpec& spec, double r) {
  if (r < spec.fine_scale) {
    return std::pow(spec.fine_scale, spec.outer_exponent - spec.inner_exponent) *
           std::pow(r, spec.inner_exponent);
  }
  return std::pow(r, spec.outer_exponent);
}

ProfileReport verify_frostman_profile(const DiscreteMeasure& mu, const ProfileSpec& spec,
                                      std::size_t sample_count, int radii_per_regime, int jobs) {
  if (sample_count < 1) throw ConfigError("verify_frostman_profile: sample_count must be >= 1");
  if (radii_per_regime < 2) throw ConfigError("verify_frostman_profile: need >= 2 radii per regime");
  if (!(spec.fine_scale > 0.0 && spec.coarse_scale >= spec.fine_scale)) {
    throw DomainError("verify_frostman_profile: need 0 < fine scale <= coarse scale");
  }
  const DyadicSet& set = mu.base();
  if (set.empty()) throw EmptySetError("verify_frostman_profile: empty set");
  const int dim = set.dim();
  ProfileReport report;

  const double leaf = cube_side(set.depth());
  if (leaf < spec.fine_scale) {
    report.fine_resolved = true;
    const double a = std::log(leaf);
    const double b = std::log(spec.fine_scale);
    for (int k = 0; k < radii_per_regime; ++k) {
      report.radii.push_back(std::exp(a + (b - a) * k / radii_per_regime));
    }
  }
  {
    const double a = std::log(std::max(spec.fine_scale, leaf));
    const double b = std::log(spec.coarse_scale);
    for (int k = 0; k < radii_per_regime; ++k) {
      report.radii.push_back(std::exp(a + (b - a) * k / (radii_per_regime - 1)));
    }
  }

  const std::size_t n_leaves = set.leaves().size();
  const std::size_t stride = (n_leaves + sample_count - 1) / sample_count;
  std::vector<std::size_t> picks;
  for (std::size_t i = 0; i < n_leaves; i += stride) picks.push_back(i);
  report.centers = picks.size();

  const std::size_t nr = report.radii.size();
  // ratio[c * nr + k]
  std::vector<double> ratio(picks.size() * nr, 0.0);
  parallel_for(picks.size(), jobs, [&](std::size_t c) {
    const Coords center = set.cube(set.depth(), picks[c]).center();
    const std::span<const double> x(center.data(), dim);
    for (std::size_t k = 0; k < nr; ++k) {
      const double r = report.radii[k];
      ratio[c * nr + k] = ball_mass(mu, x, r) / profile_bound(spec, r);
    }
  });

  report.max_ratio.assign(nr, 0.0);
  std::size_t worst_c = 0;
  double worst = -1.0;
  for (std::size_t c = 0; c < picks.size(); ++c) {
    for (std::size_t k = 0; k < nr; ++k) {
      const double v = ratio[c * nr + k];
      report.max_ratio[k] = std::max(report.max_ratio[k], v);
      if (report.radii[k] < spec.fine_scale) report.c_fine = std::max(report.c_fine, v);
      else report.c_coarse = std::max(report.c_coarse, v);
      if (v > worst) {
        worst = v;
        worst_c = c;
        report.worst_radius = report.radii[k];
      }
    }
  }
  const Coords wc = set.cube(set.depth(), picks[worst_c]).center();
  report.worst_center.assign(wc.begin(), wc.begin() + dim);

  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < nr; ++k) {
    if (report.max_ratio[k] > 0.0) {
      lx.push_back(std::log(1.0 / report.radii[k]));
      ly.push_back(std::log(report.max_ratio[k]));
    }
  }
  if (lx.size() >= 2) {
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxy += (lx[i] - mx) * (ly[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    report.growth_exponent = sxx > 0.0 ? sxy / sxx : 0.0;
  }
  report.bounded = std::isfinite(report.c()) && report.growth_exponent < 0.5;
  return report;
}

void write_measure(std::ostream& out, const DiscreteMeasure& mu, std::string_view comment) {
  const DyadicSet& set = mu.base();
  write_comment_block(out, comment);
  char buf[64];
  out << "d,depth,total_mass\n";
  std::snprintf(buf, sizeof buf, "%.17g", mu.total_mass());
  out << set.dim() << ',' << set.depth() << ',' << buf << '\n';
  // Same lexicographic order as the leaf file.
  std::vector<std::pair<CubeIndex, double>> rows;
  rows.reserve(set.leaves().size());
  for (std::size_t i = 0; i < set.leaves().size(); ++i) {
    rows.emplace_back(decode_morton(set.leaves()[i], set.dim(), set.depth()), mu.weights()[i]);
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [index, w] : rows) {
    for (int a = 0; a < set.dim(); ++a) out << index[a] << ',';
    std::snprintf(buf, sizeof buf, "%.17g", w);
    out << buf << '\n';
  }
}

DiscreteMeasure read_measure(std::istream& in) {
  std::string line;
  auto next_data_line = [&]() -> bool {
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      return true;
    }
    return false;
  };
  if (!next_data_line() || line != "d,depth,total_mass") {
    throw IoError("measure file: expected header 'd,depth,total_mass'");
  }
  int dim = 0;
  int depth = 0;
  double declared = 0.0;
  if (!next_data_line() || std::sscanf(line.c_str(), "%d,%d,%lf", &dim, &depth, &declared) != 3) {
    throw IoError("measure file: malformed value line '" + line + "'");
  }
  check_grid(dim, depth);
  const std::uint64_t cells = std::uint64_t{1} << depth;
  std::vector<std::pair<MortonCode, double>> rows;
  while (next_data_line()) {
    CubeIndex index{};
    const char* p = line.c_str();
    for (int a = 0; a < dim; ++a) {
      char* end = nullptr;
      const unsigned long long v = std::strtoull(p, &end, 10);
      if (end == p || *end != ',') throw IoError("measure file: malformed line '" + line + "'");
      if (v >= cells) throw DomainError("measure file: index out of range in '" + line + "'");
      index[a] = v;
      p = end + 1;
    }
    char* end = nullptr;
    const double w = std::strtod(p, &end);
    if (end == p || *end != '\0') throw IoError("measure file: malformed weight in '" + line + "'");
    rows.emplace_back(encode_morton(index, dim, depth), w);
  }
  std::sort(rows.begin(), rows.end());
  std::vector<MortonCode> leaves;
  leaves.reserve(rows.size());
  for (const auto& r : rows) leaves.push_back(r.first);
  auto set = std::make_shared<const DyadicSet>(DyadicSet::from_leaves(dim, depth, leaves));
  if (set->leaves().size() != rows.size()) throw IoError("measure file: duplicate leaves");
  std::vector<double> weights;
  weights.reserve(rows.size());
  for (const auto& r : rows) weights.push_back(r.second);
  DiscreteMeasure mu(set, std::move(weights));
  if (std::abs(mu.total_mass() - declared) > 1e-9 * std::max(1.0, std::abs(declared))) {
    throw IoError("measure file: weights do not sum to the declared total mass");
  }
  return mu;
}

void save_measure(const std::string& path, const DiscreteMeasure& mu, std::string_view comment) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_measure(out, mu, comment);
  if (!out) throw IoError("write failed for '" + path + "'");
}

DiscreteMeasure load_measure(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_measure(in);
}

std::string frostman_trace_json(const FrostmanTrace& tr) {
  nlohmann::ordered_json j;
  j["t"] = tr.t;
  j["alpha"] = tr.alpha;
  j["theta"] = tr.theta;
  j["delta"] = tr.delta;
  j["cap_rule"] = cap_rule_name(tr.rule);
  j["m"] = tr.m;
  j["top"] = tr.top;
  j["ell"] = tr.ell;
  j["depth"] = tr.depth;
  j["normalization"] = tr.normalization;
  j["cover_size"] = tr.saturated_cover.size();
  j["cover_cost"] = tr.cover_cost;
  j["unsaturated_cover_cubes"] = tr.unsaturated_cover_cubes;
  auto levels = nlohmann::ordered_json::array();
  for (int lvl = tr.top; lvl <= tr.m; ++lvl) {
    const auto& v = tr.level_masses[lvl - tr.top];
    nlohmann::ordered_json row;
    row["level"] = lvl;
    row["cap"] = tr.caps[lvl - tr.top];
    row["cubes"] = v.size();
    row["capped"] = tr.capped_per_level[lvl - tr.top];
    row["max_mass"] = v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
    row["min_mass"] = v.empty() ? 0.0 : *std::min_element(v.begin(), v.end());
    row["total_mass"] = std::accumulate(v.begin(), v.end(), 0.0);
    levels.push_back(std::move(row));
  }
  j["levels"] = std::move(levels);
  auto stages = nlohmann::ordered_json::array();
  for (const auto& s : tr.stage_masses) stages.push_back(std::accumulate(s.begin(), s.end(), 0.0));
  j["stage_totals"] = std::move(stages);
  if (!tr.leaf_phi.empty()) {
    j["leaf_phi_min"] = *std::min_element(tr.leaf_phi.begin(), tr.leaf_phi.end());
    j["leaf_phi_max"] = *std::max_element(tr.leaf_phi.begin(), tr.leaf_phi.end());
  }
  return j.dump(2);
}

}  // namespace thetadim
