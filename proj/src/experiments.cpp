#include "thetadim/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "thetadim/errors.hpp"
#include "thetadim/generators.hpp"
#include "thetadim/kernels.hpp"
#include "thetadim/parallel.hpp"
#include "thetadim/random.hpp"
#include "thetadim/slicing.hpp"

namespace thetadim {

using json = nlohmann::ordered_json;

namespace {

json parse_object(std::string_view text) {
  if (text.empty()) return json::object();
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  if (j.is_null()) return json::object();
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  return j;
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const char* where) {
  std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& item : j.items()) {
    if (!allowed.contains(item.key())) {
      throw ConfigError(std::string(where) + ": unknown key '" + item.key() + "'");
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

SetSpec set_spec_from(const json& j) {
  reject_unknown(j, {"kind", "d", "depth", "p", "pattern", "point", "path", "terms"}, "set");
  SetSpec s;
  read(j, "kind", s.kind);
  read(j, "d", s.d);
  read(j, "depth", s.depth);
  read(j, "p", s.p);
  read(j, "pattern", s.pattern);
  read(j, "point", s.point);
  read(j, "path", s.path);
  if (j.contains("terms")) {
    std::uint64_t terms = 0;
    read(j, "terms", terms);
    s.terms = terms;
  }
  return s;
}

json set_spec_to(const SetSpec& s) {
  json j;
  j["kind"] = s.kind;
  j["d"] = s.d;
  j["depth"] = s.depth;
  if (s.kind == "sequence" || s.kind == "rotated-sequence" || s.kind == "sequence-interval") {
    j["p"] = s.p;
  }
  if (s.kind == "pattern") j["pattern"] = s.pattern;
  if (s.kind == "point") j["point"] = s.point;
  if (s.kind == "file") j["path"] = s.path;
  if (s.terms) j["terms"] = *s.terms;
  return j;
}

std::string comment_header(const std::string& study, const json& config) {
  return "# study: " + study + "\n# config: " + config.dump() + "\n";
}

std::string covering_header() { return "set_id,theta,delta,s_cross,cost_at_cross,cover_size,clamped\n"; }

void covering_rows(std::string& out, const std::string& id, const DimensionEstimate& est) {
  for (const auto& sc : est.per_scale) {
    out += id + "," + format_number(est.theta) + "," + format_number(sc.delta) + "," +
           format_number(sc.s_cross) + "," + format_number(sc.cost_at_cross) + "," +
           std::to_string(sc.cover_size) + "," + (sc.levels.clamped ? "1" : "0") + "\n";
  }
}

std::string slice_header() {
  return "set_id,theta,frame_angle_or_axes,offset,slice_dim,ambient_dim,bound,violation\n";
}

void slice_rows(std::string& out, const std::string& id, const SliceReport& rep) {
  const std::string frame = frame_label(rep.direction);
  for (const auto& row : rep.rows) {
    out += id + "," + format_number(rep.theta) + "," + frame + "," + format_number(row.offset) +
           "," + format_number(row.slice_dim) + "," + format_number(rep.ambient.value) + "," +
           format_number(rep.bound) + "," + (row.violation ? "1" : "0") + "\n";
  }
}

json estimate_json(const DimensionEstimate& est) {
  json j;
  j["theta"] = est.theta;
  j["value"] = est.value;
  j["mode"] = aggregation_name(est.mode);
  j["depth"] = est.depth;
  j["epsilon"] = est.epsilon;
  j["any_clamped"] = est.any_clamped;
  j["regression_rms"] = est.regression_rms;
  j["epsilon_low_value"] = est.epsilon_low_value;
  j["epsilon_high_value"] = est.epsilon_high_value;
  j["scales"] = est.per_scale.size();
  return j;
}

json checks_json(const std::vector<StudyCheck>& checks) {
  json arr = json::array();
  for (const auto& c : checks) {
    json row;
    row["name"] = c.name;
    row["passed"] = c.passed;
    row["detail"] = c.detail;
    arr.push_back(std::move(row));
  }
  return arr;
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void finish(StudyOutput& out, json report) {
  report["checks"] = checks_json(out.checks);
  report["passed"] = out.passed();
  out.report_json = report.dump(2) + "\n";
}

}  // namespace

SetSpec parse_set_spec(std::string_view text) { return set_spec_from(parse_object(text)); }

std::string set_spec_json(const SetSpec& spec) { return set_spec_to(spec).dump(); }

DyadicSet make_set(const SetSpec& s) {
  if (s.kind == "cube") return gen_unit_cube(s.d, s.depth);
  if (s.kind == "point") {
    if (s.point.empty()) throw ConfigError("set: kind 'point' needs 'point' coordinates");
    return gen_point(s.point, s.depth);
  }
  if (s.kind == "pattern") return gen_pattern_fractal(s.d, s.pattern, s.depth);
  if (s.kind == "sequence") return gen_sequence_set(s.p, s.depth);
  if (s.kind == "rotated-sequence") return gen_rotated_sequence(s.p, s.depth, s.terms);
  if (s.kind == "sequence-interval") {
    return gen_product(gen_sequence_set(s.p, s.depth), gen_unit_cube(1, s.depth));
  }
  if (s.kind == "file") {
    if (s.path.empty()) throw ConfigError("set: kind 'file' needs 'path'");
    return load_leaf_file(s.path);
  }
  throw ConfigError("set: unknown kind '" + s.kind + "'");
}

std::string set_id(const SetSpec& s) {
  std::string id = s.kind;
  if (s.kind == "pattern") {
    id += "[";
    for (std::size_t i = 0; i < s.pattern.size(); ++i) {
      id += (i ? ";" : "") + std::to_string(s.pattern[i]);
    }
    id += "]";
  }
  if (s.kind == "sequence" || s.kind == "rotated-sequence" || s.kind == "sequence-interval") {
    id += "[p=" + format_number(s.p) + "]";
  }
  if (s.kind == "file") return "file:" + std::filesystem::path(s.path).filename().string();
  int d = s.d;
  if (s.kind == "sequence") d = 1;
  if (s.kind == "rotated-sequence" || s.kind == "sequence-interval") d = 2;
  if (s.kind == "point") d = static_cast<int>(s.point.size());
  return id + "/d" + std::to_string(d) + "/L" + std::to_string(s.depth);
}

double rotated_sequence_formula(double p, double theta) {
  return 1.0 + theta * (1.0 - p) / (2.0 * p + theta * (1.0 - p));
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

bool StudyOutput::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

// ---------------------------------------------------------------------------
// configs

CpCalibrationConfig parse_cp_calibration_config(std::string_view text) {
  const json j = parse_object(text);
  reject_unknown(j,
                 {"p", "thetas", "depth", "tolerance", "slice_theta", "slice_depth", "offsets", "planes",
                  "slice_threshold", "slice_fraction", "seed", "mode", "epsilon", "jobs"},
                 "cp-calibration");
  CpCalibrationConfig c;
  read(j, "p", c.p);
  read(j, "thetas", c.thetas);
  read(j, "depth", c.depth);
  read(j, "tolerance", c.tolerance);
  read(j, "slice_theta", c.slice_theta);
  read(j, "slice_depth", c.slice_depth);
  read(j, "offsets", c.offsets);
  read(j, "planes", c.planes);
  read(j, "slice_threshold", c.slice_threshold);
  read(j, "slice_fraction", c.slice_fraction);
  read(j, "seed", c.seed);
  if (j.contains("mode")) c.mode = parse_aggregation(j.at("mode").get<std::string>());
  read(j, "epsilon", c.epsilon);
  read(j, "jobs", c.jobs);
  return c;
}

FrostmanAuditConfig parse_frostman_audit_config(std::string_view text) {
  const json j = parse_object(text);
  reject_unknown(j,
                 {"cases", "set", "t", "alpha", "theta", "deltas", "cap_rule", "profile_samples",
                  "radii_per_regime", "profile_stability", "energy_stability", "mass_tolerance",
                  "weight_m", "planes", "seed", "jobs"},
                 "frostman-audit");
  FrostmanAuditConfig c;
  if (j.contains("cases")) {
    for (const auto& item : j.at("cases")) {
      reject_unknown(item, {"set", "t", "alpha"}, "frostman-audit case");
      FrostmanCase fc;
      if (item.contains("set")) fc.set = set_spec_from(item.at("set"));
      read(item, "t", fc.t);
      read(item, "alpha", fc.alpha);
      c.cases.push_back(std::move(fc));
    }
  }
  // A single set at the top level is shorthand for one case.
  if (j.contains("set")) {
    FrostmanCase fc;
    fc.set = set_spec_from(j.at("set"));
    read(j, "t", fc.t);
    read(j, "alpha", fc.alpha);
    c.cases.push_back(std::move(fc));
  } else if (j.contains("t") || j.contains("alpha")) {
    throw ConfigError("frostman-audit: 't' and 'alpha' at the top level need 'set'");
  }
  read(j, "theta", c.theta);
  read(j, "deltas", c.deltas);
  if (j.contains("cap_rule")) c.rule = parse_cap_rule(j.at("cap_rule").get<std::string>());
  read(j, "profile_samples", c.profile_samples);
  read(j, "radii_per_regime", c.radii_per_regime);
  read(j, "profile_stability", c.profile_stability);
  read(j, "energy_stability", c.energy_stability);
  read(j, "mass_tolerance", c.mass_tolerance);
  read(j, "weight_m", c.weight_m);
  read(j, "planes", c.planes);
  read(j, "seed", c.seed);
  read(j, "jobs", c.jobs);
  return c;
}

LowerBoundConfig parse_lower_bound_config(std::string_view text) {
  const json j = parse_object(text);
  reject_unknown(j,
                 {"p", "thetas", "depth", "offsets", "planes", "tolerance", "attained_fraction",
                  "radius_k_min", "radius_k_max", "profile_offsets", "ratio_floor", "measure_t",
                  "measure_alpha", "measure_theta", "measure_delta", "seed", "jobs"},
                 "lower-bound");
  LowerBoundConfig c;
  read(j, "p", c.p);
  read(j, "thetas", c.thetas);
  read(j, "depth", c.depth);
  read(j, "offsets", c.offsets);
  read(j, "planes", c.planes);
  read(j, "tolerance", c.tolerance);
  read(j, "attained_fraction", c.attained_fraction);
  read(j, "radius_k_min", c.radius_k_min);
  read(j, "radius_k_max", c.radius_k_max);
  read(j, "profile_offsets", c.profile_offsets);
  read(j, "ratio_floor", c.ratio_floor);
  read(j, "measure_t", c.measure_t);
  read(j, "measure_alpha", c.measure_alpha);
  read(j, "measure_theta", c.measure_theta);
  read(j, "measure_delta", c.measure_delta);
  read(j, "seed", c.seed);
  read(j, "jobs", c.jobs);
  return c;
}

namespace {

json to_json(const CpCalibrationConfig& c) {
  json j;
  j["p"] = c.p;
  j["thetas"] = c.thetas;
  j["depth"] = c.depth;
  j["tolerance"] = c.tolerance;
  j["slice_theta"] = c.slice_theta;
  j["slice_depth"] = c.slice_depth;
  j["offsets"] = c.offsets;
  j["planes"] = c.planes;
  j["slice_threshold"] = c.slice_threshold;
  j["slice_fraction"] = c.slice_fraction;
  j["seed"] = c.seed;
  j["mode"] = aggregation_name(c.mode);
  j["epsilon"] = c.epsilon;
  return j;
}

json to_json(const FrostmanAuditConfig& c) {
  json j;
  json cases = json::array();
  for (const auto& fc : c.cases) {
    json row;
    row["set"] = set_spec_to(fc.set);
    row["t"] = fc.t;
    row["alpha"] = fc.alpha;
    cases.push_back(std::move(row));
  }
  j["cases"] = std::move(cases);
  j["theta"] = c.theta;
  j["deltas"] = c.deltas;
  j["cap_rule"] = cap_rule_name(c.rule);
  j["profile_samples"] = c.profile_samples;
  j["radii_per_regime"] = c.radii_per_regime;
  j["profile_stability"] = c.profile_stability;
  j["energy_stability"] = c.energy_stability;
  j["mass_tolerance"] = c.mass_tolerance;
  j["weight_m"] = c.weight_m;
  j["planes"] = c.planes;
  j["seed"] = c.seed;
  return j;
}

json to_json(const LowerBoundConfig& c) {
  json j;
  j["p"] = c.p;
  j["thetas"] = c.thetas;
  j["depth"] = c.depth;
  j["offsets"] = c.offsets;
  j["planes"] = c.planes;
  j["tolerance"] = c.tolerance;
  j["attained_fraction"] = c.attained_fraction;
  j["radius_k_min"] = c.radius_k_min;
  j["radius_k_max"] = c.radius_k_max;
  j["profile_offsets"] = c.profile_offsets;
  j["ratio_floor"] = c.ratio_floor;
  j["measure_t"] = c.measure_t;
  j["measure_alpha"] = c.measure_alpha;
  j["measure_theta"] = c.measure_theta;
  j["measure_delta"] = c.measure_delta;
  j["seed"] = c.seed;
  return j;
}

std::vector<FrostmanCase> default_frostman_cases() {
  std::vector<FrostmanCase> cases(3);
  cases[0].set.kind = "cube";
  cases[0].set.d = 1;
  cases[0].set.depth = 16;
  cases[0].t = 0.9;
  cases[0].alpha = 0.9;
  cases[1].set.kind = "pattern";
  cases[1].set.d = 2;
  cases[1].set.pattern = {0, 3};
  cases[1].set.depth = 16;
  cases[1].t = 0.9;
  cases[1].alpha = 0.9;
  cases[2].set.kind = "sequence-interval";
  cases[2].set.p = 1.0;
  cases[2].set.depth = 13;
  cases[2].t = 1.2;
  cases[2].alpha = 0.9;
  return cases;
}

double spread(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
  return *mx / *mn;
}

EstimateOptions estimate_options(Aggregation mode, double epsilon, int jobs) {
  EstimateOptions o;
  o.mode = mode;
  o.epsilon = epsilon;
  o.jobs = jobs;
  return o;
}

}  // namespace

// ---------------------------------------------------------------------------
// C_P calibration

StudyOutput run_cp_calibration(const CpCalibrationConfig& c) {
  if (!(c.p > 0.0 && c.p < 1.0)) throw DomainError("cp-calibration: p must lie in (0, 1)");
  if (c.thetas.empty()) throw ConfigError("cp-calibration: no thetas");
  StudyOutput out;
  out.name = "cp-calibration";
  const json config = to_json(c);
  out.config_json = config.dump();

  SetSpec spec;
  spec.kind = "rotated-sequence";
  spec.p = c.p;
  spec.depth = c.depth;
  const std::string id = set_id(spec);
  const DyadicSet cp = make_set(spec);
  const EstimateOptions options = estimate_options(c.mode, c.epsilon, c.jobs);

  json report;
  report["study"] = out.name;
  report["config"] = config;
  report["surrogate"] =
      "finite-depth estimates compared with the closed formula; slice dimensions at generic "
      "offsets stand in for almost every offset";
  report["set"] = {{"id", id}, {"leaves", cp.leaves().size()}};

  std::string table = comment_header(out.name, config) +
                      "set_id,theta,estimate,formula,error,depth,any_clamped,"
                      "epsilon_low,epsilon_high\n";
  std::string covering = comment_header(out.name, config) + covering_header();
  json rows = json::array();
  std::vector<double> thetas = c.thetas;
  std::sort(thetas.begin(), thetas.end());
  for (double theta : thetas) {
    const DimensionEstimate est =
        dim_estimate(cp, theta, default_schedule(2, c.depth, theta), options);
    const double formula = rotated_sequence_formula(c.p, theta);
    const double error = est.value - formula;
    table += id + "," + format_number(theta) + "," + format_number(est.value) + "," +
             format_number(formula) + "," + format_number(error) + "," +
             std::to_string(c.depth) + "," + (est.any_clamped ? "1" : "0") + "," +
             format_number(est.epsilon_low_value) + "," + format_number(est.epsilon_high_value) +
             "\n";
    covering_rows(covering, id, est);
    json row = estimate_json(est);
    row["formula"] = formula;
    row["error"] = error;
    rows.push_back(std::move(row));
    out.checks.push_back({"formula theta=" + format_number(theta),
                          std::abs(error) <= c.tolerance,
                          "estimate " + fixed(est.value) + " formula " + fixed(formula) +
                              " |error| " + fixed(std::abs(error)) + " <= " +
                              format_number(c.tolerance)});
  }
  report["estimates"] = std::move(rows);

  // The rasterized set cannot separate the circle crossings near the center
  // at its own depth, so the check runs on exact slices; the rasterized
  // slices stay in the report for comparison.
  std::string slices = comment_header(out.name, config) + slice_header();
  std::string hull_slices = comment_header(out.name, config) + slice_header();
  const std::string slice_id = "rotated-sequence-slice[" + format_number(c.p) + "]/d1/L" +
                               std::to_string(c.slice_depth);
  const std::vector<double> slice_schedule = default_schedule(1, c.slice_depth, c.slice_theta);
  EstimateOptions inner = options;
  inner.jobs = 1;
  json slice_json = json::array();
  std::size_t below = 0;
  std::size_t hull_below = 0;
  std::size_t total = 0;
  for (std::size_t k = 0; k < c.planes; ++k) {
    const AffinePlane direction = sample_plane(2, 1, derive_seed(c.seed, k));
    const auto offsets = generic_offsets(direction, c.offsets);
    const SliceReport rep = slice_scan(cp, c.slice_theta, direction, offsets, {}, 0.15, options);
    slice_rows(hull_slices, id, rep);
    std::vector<double> exact(offsets.size());
    parallel_for(offsets.size(), c.jobs, [&](std::size_t i) {
      const DyadicSet slice =
          rotated_sequence_line_slice(c.p, at_offset(direction, offsets[i]), c.slice_depth);
      exact[i] =
          slice.empty() ? 0.0 : dim_estimate(slice, c.slice_theta, slice_schedule, inner).value;
    });
    const std::string frame = frame_label(direction);
    std::size_t here = 0;
    std::size_t hull_here = 0;
    for (std::size_t i = 0; i < offsets.size(); ++i) {
      here += exact[i] < c.slice_threshold ? 1 : 0;
      hull_here += rep.rows[i].slice_dim < c.slice_threshold ? 1 : 0;
      slices += slice_id + "," + format_number(c.slice_theta) + "," + frame + "," +
                format_number(offsets[i]) + "," + format_number(exact[i]) + "," +
                format_number(rep.ambient.value) + "," + format_number(rep.bound) + "," +
                (exact[i] > rep.bound + 0.15 ? "1" : "0") + "\n";
    }
    below += here;
    hull_below += hull_here;
    total += offsets.size();
    json entry;
    entry["frame"] = frame;
    entry["ambient"] = estimate_json(rep.ambient);
    entry["bound"] = rep.bound;
    entry["below_threshold"] = here;
    entry["rasterized_below_threshold"] = hull_here;
    entry["offsets"] = offsets.size();
    entry["rasterized_violations"] = rep.violations;
    slice_json.push_back(std::move(entry));
  }
  const auto share = [total](std::size_t n) {
    return total ? static_cast<double>(n) / static_cast<double>(total) : 0.0;
  };
  const double fraction = share(below);
  report["slices"] = std::move(slice_json);
  report["slice_fraction_below_threshold"] = fraction;
  report["rasterized_slice_fraction_below_threshold"] = share(hull_below);
  out.checks.push_back({"slices below threshold", total > 0 && fraction >= c.slice_fraction,
                        std::to_string(below) + "/" + std::to_string(total) + " slices < " +
                            format_number(c.slice_threshold) + " at depth " +
                            std::to_string(c.slice_depth) + " (need fraction >= " +
                            format_number(c.slice_fraction) + "); rasterized at depth " +
                            std::to_string(c.depth) + ": " + std::to_string(hull_below) + "/" +
                            std::to_string(total)});

  out.tables.push_back({"estimates.csv", table});
  out.tables.push_back({"covering.csv", covering});
  out.tables.push_back({"slices.csv", slices});
  out.tables.push_back({"rasterized_slices.csv", hull_slices});
  finish(out, std::move(report));
  return out;
}

// ---------------------------------------------------------------------------
// Frostman audit

StudyOutput run_frostman_audit(const FrostmanAuditConfig& input) {
  FrostmanAuditConfig c = input;
  if (c.cases.empty()) c.cases = default_frostman_cases();
  if (c.deltas.empty()) throw ConfigError("frostman-audit: no deltas");
  if (c.weight_m < 1) throw ConfigError("frostman-audit: weight_m must be at least 1");
  StudyOutput out;
  out.name = "frostman-audit";
  const json config = to_json(c);
  out.config_json = config.dump();

  json report;
  report["study"] = out.name;
  report["config"] = config;
  report["surrogate"] =
      "capped measures at three scales; the existential constants of the ball and energy bounds "
      "are replaced by their spread across scales";

  std::string audit_table = comment_header(out.name, config) +
                            "set_id,delta,m,top,mass_error,worst_cap_ratio,worst_chain_ratio,"
                            "c_fine,c_coarse,profile_c,growth_exponent,energy,energy_constant\n";
  std::string tube_table = comment_header(out.name, config) +
                           "set_id,delta,plane,frame_angle_or_axes,offset,tube_mass,energy,"
                           "constant,empty\n";
  std::string covering = comment_header(out.name, config) + covering_header();
  json cases = json::array();
  std::size_t ran = 0;

  for (const auto& fc : c.cases) {
    const std::string id = set_id(fc.set);
    json cj;
    cj["set"] = id;
    cj["t"] = fc.t;
    cj["alpha"] = fc.alpha;
    auto set = std::make_shared<const DyadicSet>(make_set(fc.set));
    const int d = set->dim();

    // Preconditions: branching above alpha and an estimated dimension above t.
    const double dyadic = dyadic_dimension(*set);
    cj["dyadic_dimension"] = dyadic;
    std::string abort_reason;
    if (!(dyadic > fc.alpha)) {
      abort_reason = "dyadic dimension " + fixed(dyadic) + " <= alpha " + format_number(fc.alpha);
    } else {
      const DimensionEstimate est = dim_estimate(
          *set, c.theta, default_schedule(d, set->depth(), c.theta),
          estimate_options(Aggregation::kRegression, 1.0, c.jobs));
      covering_rows(covering, id, est);
      cj["estimate"] = estimate_json(est);
      if (!(est.value > fc.t)) {
        abort_reason = "estimated dimension " + fixed(est.value) + " <= t " + format_number(fc.t);
      }
    }
    if (!abort_reason.empty()) {
      cj["aborted"] = abort_reason;
      cases.push_back(std::move(cj));
      continue;
    }
    ++ran;

    const bool with_energy = d >= 2 && fc.t > c.weight_m;
    std::vector<AffinePlane> planes;
    if (with_energy) {
      for (std::size_t k = 0; k < c.planes; ++k) {
        const std::uint64_t seed = derive_seed(c.seed, k);
        AffinePlane direction = sample_plane(d, 1, seed);
        const auto [lo, hi] = unit_projection_interval(direction);
        std::mt19937_64 rng(splitmix64(seed));
        std::uniform_real_distribution<double> pick(lo + 0.25 * (hi - lo), hi - 0.25 * (hi - lo));
        planes.push_back(at_offset(direction, pick(rng)));
      }
    }

    bool caps = true, chain = true, mass = true, tubes_finite = true;
    double worst_mass_error = 0.0;
    std::vector<double> profile_constants, energy_constants;
    json per_delta = json::array();
    for (double delta : c.deltas) {
      const FrostmanResult fr = build_joint_frostman(set, fc.t, fc.alpha, c.theta, delta, c.rule);
      const FrostmanAudit audit = audit_frostman(fr);
      caps = caps && audit.caps_hold();
      chain = chain && audit.chain_holds();
      mass = mass && audit.mass_error <= c.mass_tolerance;
      worst_mass_error = std::max(worst_mass_error, audit.mass_error);
      const ProfileReport prof =
          verify_frostman_profile(fr.measure, frostman_profile(fc.t, fc.alpha, c.theta, delta),
                                  c.profile_samples, c.radii_per_regime, c.jobs);
      profile_constants.push_back(prof.c());

      json row;
      row["delta"] = delta;
      row["trace"] = json::parse(frostman_trace_json(fr.trace));
      row["audit"] = {{"worst_cap_ratio", audit.worst_cap_ratio},
                      {"worst_chain_ratio", audit.worst_chain_ratio},
                      {"totals_nonincreasing", audit.totals_nonincreasing},
                      {"mass_error", audit.mass_error},
                      {"normalization_floor", audit.normalization_floor}};
      row["profile"] = {{"c_fine", prof.c_fine},
                        {"c_coarse", prof.c_coarse},
                        {"c", prof.c()},
                        {"fine_resolved", prof.fine_resolved},
                        {"worst_radius", prof.worst_radius},
                        {"centers", prof.centers},
                        {"growth_exponent", prof.growth_exponent},
                        {"bounded", prof.bounded}};

      double e = std::numeric_limits<double>::quiet_NaN();
      double constant = e;
      if (with_energy) {
        const DiscreteMeasure coarse = coarsen(fr.measure, fr.trace.m);
        KernelSpec ks;
        ks.r = std::pow(delta, 1.0 / c.theta);
        ks.theta = c.theta;
        ks.s = fc.t - c.weight_m;
        ks.weight_m = c.weight_m;
        e = energy(coarse, ks, c.jobs);
        constant = e / std::pow(ks.r, ks.s);
        energy_constants.push_back(constant);
        row["energy"] = {{"level", fr.trace.m},
                         {"r", ks.r},
                         {"support", ks.support()},
                         {"s", ks.s},
                         {"weight_m", ks.weight_m},
                         {"energy", e},
                         {"constant", constant}};

        KernelSpec plain = ks;
        plain.weight_m = 0;
        json tubes = json::array();
        for (std::size_t k = 0; k < planes.size(); ++k) {
          const TubeMeasure tube = tube_measure(coarse, planes[k], ks.r);
          const double te = tube.empty ? 0.0 : energy(tube.measure, plain, c.jobs);
          const double tc = te / std::pow(ks.r, plain.s);
          tubes_finite = tubes_finite && std::isfinite(tc);
          tube_table += id + "," + format_number(delta) + "," + std::to_string(k) + "," +
                        frame_label(planes[k]) + "," + format_number(offset_coordinate(planes[k])) +
                        "," + format_number(tube.measure.total_mass()) + "," + format_number(te) +
                        "," + format_number(tc) + "," + (tube.empty ? "1" : "0") + "\n";
          tubes.push_back({{"plane", k},
                           {"frame", frame_label(planes[k])},
                           {"offset", offset_coordinate(planes[k])},
                           {"tube_mass", tube.measure.total_mass()},
                           {"energy", te},
                           {"constant", tc},
                           {"empty", tube.empty}});
        }
        row["tubes"] = std::move(tubes);
      }
      audit_table += id + "," + format_number(delta) + "," + std::to_string(fr.trace.m) + "," +
                     std::to_string(fr.trace.top) + "," + format_number(audit.mass_error) + "," +
                     format_number(audit.worst_cap_ratio) + "," +
                     format_number(audit.worst_chain_ratio) + "," + format_number(prof.c_fine) +
                     "," + format_number(prof.c_coarse) + "," + format_number(prof.c()) + "," +
                     format_number(prof.growth_exponent) + "," + format_number(e) + "," +
                     format_number(constant) + "\n";
      per_delta.push_back(std::move(row));
    }
    cj["per_delta"] = std::move(per_delta);

    const double pspread = spread(profile_constants);
    cj["profile_spread"] = pspread;
    out.checks.push_back({id + " caps", caps, "every cube mass within its cap"});
    out.checks.push_back({id + " chain", chain, "stage masses nonincreasing"});
    out.checks.push_back({id + " normalization", mass,
                          "worst |mass - 1| " + format_number(worst_mass_error)});
    out.checks.push_back({id + " profile stability",
                          std::isfinite(pspread) && pspread <= c.profile_stability,
                          "max/min profile constant " + fixed(pspread) +
                              " <= " + format_number(c.profile_stability)});
    if (with_energy) {
      const double espread = spread(energy_constants);
      cj["energy_spread"] = espread;
      out.checks.push_back({id + " energy stability",
                            std::isfinite(espread) && espread <= c.energy_stability,
                            "max/min energy constant " + fixed(espread) +
                                " <= " + format_number(c.energy_stability)});
      out.checks.push_back({id + " tube constants", tubes_finite,
                            std::to_string(planes.size()) + " planes per scale"});
    }
    cases.push_back(std::move(cj));
  }
  report["cases"] = std::move(cases);
  out.checks.push_back({"cases run", ran > 0, std::to_string(ran) + "/" +
                                                  std::to_string(c.cases.size()) + " cases"});

  out.tables.push_back({"audit.csv", audit_table});
  out.tables.push_back({"tubes.csv", tube_table});
  out.tables.push_back({"covering.csv", covering});
  finish(out, std::move(report));
  return out;
}

// ---------------------------------------------------------------------------
// lower bound on E x [0,1]

StudyOutput run_lower_bound_study(const LowerBoundConfig& c) {
  if (c.thetas.empty()) throw ConfigError("lower-bound: no thetas");
  if (c.radius_k_min < 1 || c.radius_k_max < c.radius_k_min) {
    throw ConfigError("lower-bound: need 1 <= radius_k_min <= radius_k_max");
  }
  StudyOutput out;
  out.name = "lower-bound";
  const json config = to_json(c);
  out.config_json = config.dump();

  SetSpec spec;
  spec.kind = "sequence-interval";
  spec.p = c.p;
  spec.depth = c.depth;
  const std::string id = set_id(spec);
  SetSpec factor_spec = spec;
  factor_spec.kind = "sequence";
  auto factor = std::make_shared<const DyadicSet>(make_set(factor_spec));
  auto product =
      std::make_shared<const DyadicSet>(gen_product(*factor, gen_unit_cube(1, c.depth)));

  json report;
  report["study"] = out.name;
  report["config"] = config;
  report["surrogate"] =
      "horizontal slices at a finite offset grid stand in for a positive-measure set of offsets; "
      "tube mass ratios over a finite radius grid stand in for the density limit";
  report["set"] = {{"id", id}, {"leaves", product->leaves().size()}};

  std::string slices = comment_header(out.name, config) + slice_header();
  std::string covering = comment_header(out.name, config) + covering_header();
  std::string profiles =
      comment_header(out.name, config) + "set_id,theta,offset,r,mass,ratio\n";
  const AffinePlane horizontal = axis_plane(2, 1);
  const AffinePlane vertical = axis_plane(2, 0);
  std::vector<double> radii;
  for (int k = c.radius_k_min; k <= c.radius_k_max; ++k) radii.push_back(std::ldexp(1.0, -k));

  json per_theta = json::array();
  for (double theta : c.thetas) {
    const EstimateOptions options = estimate_options(Aggregation::kRegression, 1.0, c.jobs);
    json tj;
    tj["theta"] = theta;
    const DimensionEstimate factor_est =
        dim_estimate(*factor, theta, default_schedule(1, c.depth, theta), options);
    tj["factor_estimate"] = estimate_json(factor_est);

    const auto h_offsets = generic_offsets(horizontal, c.offsets);
    const SliceReport h = slice_scan(*product, theta, horizontal, h_offsets, {}, c.tolerance, options);
    covering_rows(covering, id, h.ambient);
    slice_rows(slices, id, h);
    std::size_t attained = 0;
    for (const auto& row : h.rows) attained += row.slice_dim >= h.bound - c.tolerance ? 1 : 0;
    const double fraction = static_cast<double>(attained) / static_cast<double>(h.rows.size());
    tj["ambient"] = estimate_json(h.ambient);
    tj["bound"] = h.bound;
    tj["horizontal"] = {{"attained", attained},
                        {"offsets", h.rows.size()},
                        {"fraction", fraction},
                        {"violations", h.violations}};
    out.checks.push_back({"attained theta=" + format_number(theta),
                          fraction >= c.attained_fraction,
                          std::to_string(attained) + "/" + std::to_string(h.rows.size()) +
                              " slices >= bound " + fixed(h.bound) + " - " +
                              format_number(c.tolerance)});

    auto contrast = [&](const AffinePlane& direction) {
      const SliceReport rep = slice_scan(*product, theta, direction,
                                         generic_offsets(direction, c.offsets), {}, c.tolerance,
                                         options);
      slice_rows(slices, id, rep);
      std::size_t hit = 0, empty = 0;
      for (const auto& row : rep.rows) {
        hit += row.slice_dim >= rep.bound - c.tolerance ? 1 : 0;
        empty += row.empty ? 1 : 0;
      }
      return json{{"frame", frame_label(direction)},
                  {"attained", hit},
                  {"empty", empty},
                  {"offsets", rep.rows.size()},
                  {"violations", rep.violations}};
    };
    tj["vertical"] = contrast(vertical);
    json sampled = json::array();
    for (std::size_t k = 0; k < c.planes; ++k) {
      sampled.push_back(contrast(sample_plane(2, 1, derive_seed(c.seed, k))));
    }
    tj["sampled"] = std::move(sampled);

    // (Frostman on the sequence) x (Lebesgue on [0,1]).
    const FrostmanResult fr =
        build_joint_frostman(factor, c.measure_t, c.measure_alpha, c.measure_theta, c.measure_delta);
    const auto fw = fr.measure.weights();
    const double column = std::ldexp(1.0, -c.depth);
    std::vector<double> weights(product->leaves().size());
    for (std::size_t i = 0; i < weights.size(); ++i) {
      const CubeIndex index = decode_morton(product->leaves()[i], 2, c.depth);
      const auto pos = factor->find(c.depth, index[0]);
      weights[i] = pos ? fw[*pos] * column : 0.0;
    }
    const DiscreteMeasure nu(product, std::move(weights));
    double floor_seen = std::numeric_limits<double>::infinity();
    json profs = json::array();
    const std::size_t count = std::min(c.profile_offsets, h_offsets.size());
    for (std::size_t k = 0; k < count; ++k) {
      const double a = h_offsets[(2 * k + 1) * h_offsets.size() / (2 * count)];
      const TubeMassProfile prof = tube_mass_profile(nu, horizontal, a, radii);
      floor_seen = std::min(floor_seen, prof.min_ratio);
      for (const auto& row : prof.rows) {
        profiles += id + "," + format_number(theta) + "," + format_number(a) + "," +
                    format_number(row.r) + "," + format_number(row.mass) + "," +
                    format_number(row.ratio) + "\n";
      }
      profs.push_back({{"offset", a},
                       {"min_ratio", prof.min_ratio},
                       {"max_ratio", prof.max_ratio},
                       {"growth_exponent", prof.growth_exponent},
                       {"degenerate", prof.degenerate}});
    }
    tj["tube_profiles"] = std::move(profs);
    tj["min_ratio"] = floor_seen;
    out.checks.push_back({"ratio floor theta=" + format_number(theta),
                          count > 0 && floor_seen >= c.ratio_floor,
                          "min ratio " + fixed(floor_seen) + " >= " + format_number(c.ratio_floor)});
    per_theta.push_back(std::move(tj));
  }
  report["per_theta"] = std::move(per_theta);

  out.tables.push_back({"slices.csv", slices});
  out.tables.push_back({"covering.csv", covering});
  out.tables.push_back({"tube_profiles.csv", profiles});
  finish(out, std::move(report));
  return out;
}

StudyOutput run_study(std::string_view name, std::string_view config_json) {
  if (name == "cp-calibration") {
    return run_cp_calibration(parse_cp_calibration_config(config_json));
  }
  if (name == "frostman-audit") {
    return run_frostman_audit(parse_frostman_audit_config(config_json));
  }
  if (name == "lower-bound") return run_lower_bound_study(parse_lower_bound_config(config_json));
  throw ConfigError("unknown study '" + std::string(name) + "'");
}

void write_study(const StudyOutput& output, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
  auto put = [&](const std::string& name, const std::string& content) {
    const auto path = std::filesystem::path(dir) / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path.string());
    f << content;
    if (!f) throw IoError("write failed for " + path.string());
  };
  put("report.json", output.report_json);
  for (const auto& t : output.tables) put(t.file_name, t.content);
}

}  // namespace thetadim
