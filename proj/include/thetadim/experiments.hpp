#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "thetadim/covering.hpp"
#include "thetadim/dyadic.hpp"
#include "thetadim/measures.hpp"

namespace thetadim {

// Declarative description of a generated or stored set.
//   cube               [0,1]^d
//   point              the leaf holding `point`
//   pattern            self-similar set keeping the child digits in `pattern`
//   sequence           {0} u {n^-p} in [0,1]
//   rotated-sequence   circles of radius n^-p / 2 around (1/2, 1/2)
//   sequence-interval  sequence x [0,1]
//   file               leaf file at `path`
struct SetSpec {
  std::string kind = "cube";
  int d = 2;
  int depth = 10;
  double p = 0.5;
  std::vector<unsigned> pattern;
  std::vector<double> point;
  std::string path;
  std::optional<std::uint64_t> terms;
};

SetSpec parse_set_spec(std::string_view json);
std::string set_spec_json(const SetSpec& spec);
DyadicSet make_set(const SetSpec& spec);
// Short identifier used in CSV rows, e.g. "pattern[0;3]/d2/L10".
std::string set_id(const SetSpec& spec);

// 1 + theta (1 - p) / (2p + theta (1 - p)).
double rotated_sequence_formula(double p, double theta);

// Numbers in tables use 12 significant digits.
std::string format_number(double value);

struct StudyCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct StudyTable {
  std::string file_name;
  std::string content;
};

struct StudyOutput {
  std::string name;
  std::string config_json;  // fully resolved
  std::string report_json;
  std::vector<StudyTable> tables;
  std::vector<StudyCheck> checks;

  bool passed() const;
};

struct CpCalibrationConfig {
  double p = 0.5;
  std::vector<double> thetas{0.25, 0.5, 1.0};
  int depth = 14;
  double tolerance = 0.1;  // |estimate - formula|
  // Slices through generic offsets, built exactly along each line at
  // slice_depth. Slices of the rasterized set at `depth` are reported too.
  double slice_theta = 0.5;
  int slice_depth = 40;
  std::size_t offsets = 64;
  std::size_t planes = 1;
  double slice_threshold = 0.1;
  double slice_fraction = 0.95;
  std::uint64_t seed = 0;
  Aggregation mode = Aggregation::kRegression;
  double epsilon = 1.0;
  int jobs = 0;
};

struct FrostmanCase {
  SetSpec set;
  double t = 1.0;
  double alpha = 0.9;
};

struct FrostmanAuditConfig {
  std::vector<FrostmanCase> cases;  // empty selects the default trio
  double theta = 0.7;
  std::vector<double> deltas{0.015625, 0.0078125, 0.00390625};
  CapRule rule = CapRule::kRescale;
  std::size_t profile_samples = 2000;
  int radii_per_regime = 10;
  double profile_stability = 2.0;  // max / min of the profile constants
  double energy_stability = 4.0;   // max / min of C_delta
  double mass_tolerance = 1e-12;
  int weight_m = 1;
  std::size_t planes = 8;
  std::uint64_t seed = 0;
  int jobs = 0;
};

struct LowerBoundConfig {
  double p = 1.0;
  std::vector<double> thetas{0.5, 1.0};
  int depth = 14;
  std::size_t offsets = 64;
  std::size_t planes = 2;  // extra sampled directions, reported only
  double tolerance = 0.15;
  double attained_fraction = 0.5;
  // Radii 2^-k for k in [radius_k_min, radius_k_max].
  int radius_k_min = 2;
  int radius_k_max = 10;
  std::size_t profile_offsets = 8;
  double ratio_floor = 0.25;
  // Frostman measure on the first factor of the product measure.
  double measure_t = 0.3;
  double measure_alpha = 0.2;
  double measure_theta = 0.5;
  double measure_delta = 0.015625;
  std::uint64_t seed = 0;
  int jobs = 0;
};

CpCalibrationConfig parse_cp_calibration_config(std::string_view json);
FrostmanAuditConfig parse_frostman_audit_config(std::string_view json);
LowerBoundConfig parse_lower_bound_config(std::string_view json);

// C_P: estimates against the closed formula and slice estimates at generic
// offsets. Checks: every |error| <= tolerance; the fraction of exact line
// slices below slice_threshold is at least slice_fraction.
StudyOutput run_cp_calibration(const CpCalibrationConfig& config);

// Per case and per delta: build, cap and chain audit, two-regime ball
// profile, weighted energy of the measure coarsened to its construction
// level (kernel fine scale delta^(1/theta), support delta, exponent t - m)
// and energies of tube restrictions along sampled planes. Checks: caps,
// chain, normalization, profile and energy constants stable across delta,
// finite tube constants. A case whose preconditions fail is aborted and
// reported.
StudyOutput run_frostman_audit(const FrostmanAuditConfig& config);

// F = sequence x [0,1]: horizontal slices against the ambient bound, the
// vertical direction and sampled directions for contrast, and tube mass
// profiles of (Frostman on the sequence) x Lebesgue along horizontal lines.
// Checks: attained fraction and ratio floor per theta.
StudyOutput run_lower_bound_study(const LowerBoundConfig& config);

// Dispatches on "cp-calibration", "frostman-audit" or "lower-bound".
StudyOutput run_study(std::string_view name, std::string_view config_json);

// Writes report.json and every table into `dir` (created if needed).
void write_study(const StudyOutput& output, const std::string& dir);

}  // namespace thetadim
