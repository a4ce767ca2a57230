#include "thetadim/thetadim.h"

#include <cstdlib>
#include <cstring>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "thetadim/covering.hpp"
#include "thetadim/dyadic.hpp"
#include "thetadim/errors.hpp"
#include "thetadim/experiments.hpp"
#include "thetadim/kernels.hpp"
#include "thetadim/measures.hpp"
#include "thetadim/slicing.hpp"

struct td_set {
  std::shared_ptr<const thetadim::DyadicSet> set;
};

struct td_measure {
  thetadim::DiscreteMeasure mu;
};

namespace {

using json = nlohmann::ordered_json;
using namespace thetadim;

thread_local std::string g_last_error;

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

template <typename F>
td_status guard(F&& fn) {
  try {
    fn();
    g_last_error.clear();
    return TD_OK;
  } catch (const InvalidArgument& e) {
    g_last_error = e.what();
    return TD_ERR_INVALID_ARGUMENT;
  } catch (const Error& e) {
    g_last_error = e.what();
    return static_cast<td_status>(static_cast<int>(e.code()));
  } catch (const json::exception& e) {
    g_last_error = std::string("JSON: ") + e.what();
    return TD_ERR_CONFIG;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return TD_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return TD_ERR_INTERNAL;
  }
}

template <typename T>
void need(T* p, const char* what) {
  if (p == nullptr) throw InvalidArgument(std::string("null argument: ") + what);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

json parse_or_empty(const char* text) {
  if (text == nullptr || *text == '\0') return json::object();
  json j = json::parse(text);
  if (!j.is_object()) throw ConfigError("expected a JSON object");
  return j;
}

EstimateOptions parse_options(const char* text) {
  const json j = parse_or_empty(text);
  EstimateOptions o;
  for (const auto& item : j.items()) {
    const std::string& key = item.key();
    const json& v = item.value();
    if (key == "mode") o.mode = parse_aggregation(v.get<std::string>());
    else if (key == "epsilon") o.epsilon = v.get<double>();
    else if (key == "upper_slack") o.upper_slack = v.get<double>();
    else if (key == "s_tolerance") o.s_tolerance = v.get<double>();
    else if (key == "max_iterations") o.max_iterations = v.get<int>();
    else if (key == "sensitivity") o.epsilon_sensitivity = v.get<bool>();
    else if (key == "jobs") o.jobs = v.get<int>();
    else throw ConfigError("options: unknown key '" + key + "'");
  }
  return o;
}

std::vector<double> as_vector(const double* p, std::size_t n) {
  if (n > 0 && p == nullptr) throw InvalidArgument("null array with positive length");
  return n ? std::vector<double>(p, p + n) : std::vector<double>{};
}

json estimate_to_json(const DimensionEstimate& est) {
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
  json scales = json::array();
  for (const auto& sc : est.per_scale) {
    scales.push_back({{"delta", sc.delta},
                      {"level_coarse", sc.levels.coarse},
                      {"level_fine", sc.levels.fine},
                      {"clamped", sc.levels.clamped},
                      {"s_cross", sc.s_cross},
                      {"cost_at_cross", sc.cost_at_cross},
                      {"cover_size", sc.cover_size},
                      {"saturated", sc.saturated}});
  }
  j["per_scale"] = std::move(scales);
  return j;
}

AffinePlane parse_direction(const char* text, int dim) {
  const json j = parse_or_empty(text);
  const std::string kind = j.value("kind", std::string("axis"));
  const int d = j.value("d", dim);
  if (d != dim) throw ConfigError("direction: dimension does not match the set");
  if (kind == "axis") return axis_plane(d, j.value("normal_axis", d - 1));
  if (kind == "line") {
    if (d != 2) throw ConfigError("direction: 'line' needs d = 2");
    return line_plane(j.at("angle").get<double>());
  }
  if (kind == "sample") return sample_plane(d, 1, j.value("seed", std::uint64_t{0}));
  throw ConfigError("direction: unknown kind '" + kind + "'");
}

const DyadicSet& set_of(const td_set* s) {
  need(s, "set");
  return *s->set;
}

}  // namespace

extern "C" {

const char* td_version(void) { return "1.0.0"; }

const char* td_status_name(td_status status) {
  switch (status) {
    case TD_OK: return "ok";
    case TD_ERR_INVALID_ARGUMENT: return "invalid_argument";
    default: return error_code_name(static_cast<ErrorCode>(static_cast<int>(status)));
  }
}

const char* td_last_error(void) { return g_last_error.c_str(); }

void td_string_free(char* s) { std::free(s); }

td_status td_set_generate(const char* spec_json, td_set** out) {
  return guard([&] {
    need(spec_json, "spec_json");
    need(out, "out");
    *out = nullptr;
    auto set = std::make_shared<const DyadicSet>(make_set(parse_set_spec(spec_json)));
    *out = new td_set{std::move(set)};
  });
}

td_status td_set_load(const char* path, td_set** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    *out = new td_set{std::make_shared<const DyadicSet>(load_leaf_file(path))};
  });
}

td_status td_set_from_leaves(int dim, int depth, const uint64_t* indices, size_t count,
                             td_set** out) {
  return guard([&] {
    need(out, "out");
    *out = nullptr;
    check_grid(dim, depth);
    if (count > 0) need(indices, "indices");
    const std::uint64_t cells = std::uint64_t{1} << depth;
    std::vector<MortonCode> codes;
    codes.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      CubeIndex index{};
      for (int a = 0; a < dim; ++a) {
        index[a] = indices[i * dim + a];
        if (index[a] >= cells) throw RangeError("td_set_from_leaves: index outside the grid");
      }
      codes.push_back(encode_morton(index, dim, depth));
    }
    *out = new td_set{
        std::make_shared<const DyadicSet>(DyadicSet::from_leaves(dim, depth, std::move(codes)))};
  });
}

td_status td_set_save(const td_set* set, const char* path, const char* comment) {
  return guard([&] {
    need(path, "path");
    const std::string c = comment ? comment : "";
    if (std::strcmp(path, "-") == 0) {
      write_leaf_file(std::cout, set_of(set), c);
      std::cout.flush();
    } else {
      save_leaf_file(path, set_of(set), c);
    }
  });
}

td_status td_set_truncate(const td_set* set, int depth, td_set** out) {
  return guard([&] {
    need(out, "out");
    *out = nullptr;
    const DyadicSet& s = set_of(set);
    if (depth < 0 || depth > s.depth()) throw DomainError("td_set_truncate: depth outside [0, depth]");
    *out = new td_set{std::make_shared<const DyadicSet>(s.truncated(depth))};
  });
}

td_status td_set_info(const td_set* set, int* dim, int* depth, size_t* leaves) {
  return guard([&] {
    const DyadicSet& s = set_of(set);
    if (dim) *dim = s.dim();
    if (depth) *depth = s.depth();
    if (leaves) *leaves = s.empty() ? 0 : s.leaves().size();
  });
}

td_status td_set_level_count(const td_set* set, int level, size_t* count) {
  return guard([&] {
    need(count, "count");
    const DyadicSet& s = set_of(set);
    if (level < 0 || level > s.depth()) throw DomainError("level outside [0, depth]");
    *count = s.empty() ? 0 : s.count(level);
  });
}

td_status td_set_dyadic_dimension(const td_set* set, double* value) {
  return guard([&] {
    need(value, "value");
    *value = dyadic_dimension(set_of(set));
  });
}

void td_set_free(td_set* set) { delete set; }

td_status td_cover_cost(const td_set* set, double s, double theta, double delta, double* cost,
                        size_t* cover_size) {
  return guard([&] {
    need(cost, "cost");
    CoveringQuery q;
    q.s = s;
    q.theta = theta;
    q.delta = delta;
    const CoveringResult r = optimal_cover_cost(set_of(set), q);
    *cost = r.cost;
    if (cover_size) *cover_size = r.cover_size;
  });
}

td_status td_default_schedule(int dim, int depth, double theta, double* out, size_t capacity,
                              size_t* count) {
  return guard([&] {
    need(count, "count");
    const auto scales = default_schedule(dim, depth, theta);
    *count = scales.size();
    if (out != nullptr) {
      for (std::size_t i = 0; i < scales.size() && i < capacity; ++i) out[i] = scales[i];
    }
  });
}

td_status td_estimate(const td_set* set, double theta, const double* schedule, size_t schedule_len,
                      const char* options_json, char** result_json) {
  return guard([&] {
    need(result_json, "result_json");
    *result_json = nullptr;
    const DyadicSet& s = set_of(set);
    std::vector<double> scales = as_vector(schedule, schedule_len);
    if (scales.empty()) scales = default_schedule(s.dim(), s.depth(), theta);
    const DimensionEstimate est = dim_estimate(s, theta, scales, parse_options(options_json));
    *result_json = dup_string(estimate_to_json(est).dump());
  });
}

td_status td_sweep(const td_set* set, const double* thetas, size_t theta_count,
                   const double* schedule, size_t schedule_len, const char* options_json,
                   char** result_json) {
  return guard([&] {
    need(result_json, "result_json");
    *result_json = nullptr;
    const EstimateOptions options = parse_options(options_json);
    const auto points = theta_sweep(set_of(set), as_vector(thetas, theta_count),
                                    as_vector(schedule, schedule_len), options);
    json arr = json::array();
    double max_drop = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      arr.push_back(estimate_to_json(points[i].estimate));
      if (i > 0) {
        max_drop = std::max(max_drop, points[i - 1].estimate.value - points[i].estimate.value);
      }
    }
    json j;
    j["points"] = std::move(arr);
    j["shared_schedule"] = schedule_len > 0;
    j["max_drop"] = max_drop;
    j["nondecreasing"] = max_drop <= options.s_tolerance;
    *result_json = dup_string(j.dump());
  });
}

td_status td_frostman_build(const td_set* set, double t, double alpha, double theta, double delta,
                            const char* cap_rule, td_measure** out, char** report_json) {
  return guard([&] {
    need(out, "out");
    *out = nullptr;
    if (report_json) *report_json = nullptr;
    need(set, "set");
    const CapRule rule = cap_rule ? parse_cap_rule(cap_rule) : CapRule::kRescale;
    FrostmanResult fr = build_joint_frostman(set->set, t, alpha, theta, delta, rule);
    if (report_json) {
      const FrostmanAudit audit = audit_frostman(fr);
      const ProfileReport prof =
          verify_frostman_profile(fr.measure, frostman_profile(t, alpha, theta, delta), 2000);
      json j;
      j["trace"] = json::parse(frostman_trace_json(fr.trace));
      j["audit"] = {{"worst_cap_ratio", audit.worst_cap_ratio},
                    {"worst_chain_ratio", audit.worst_chain_ratio},
                    {"totals_nonincreasing", audit.totals_nonincreasing},
                    {"mass_error", audit.mass_error},
                    {"normalization_floor", audit.normalization_floor},
                    {"caps_hold", audit.caps_hold()},
                    {"chain_holds", audit.chain_holds()}};
      j["profile"] = {{"c_fine", prof.c_fine},
                      {"c_coarse", prof.c_coarse},
                      {"c", prof.c()},
                      {"growth_exponent", prof.growth_exponent},
                      {"bounded", prof.bounded},
                      {"centers", prof.centers}};
      *report_json = dup_string(j.dump());
    }
    *out = new td_measure{std::move(fr.measure)};
  });
}

td_status td_measure_uniform(const td_set* set, td_measure** out) {
  return guard([&] {
    need(out, "out");
    *out = nullptr;
    need(set, "set");
    *out = new td_measure{DiscreteMeasure::uniform(set->set)};
  });
}

td_status td_measure_load(const char* path, td_measure** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    *out = new td_measure{load_measure(path)};
  });
}

td_status td_measure_save(const td_measure* mu, const char* path, const char* comment) {
  return guard([&] {
    need(mu, "measure");
    need(path, "path");
    const std::string c = comment ? comment : "";
    if (std::strcmp(path, "-") == 0) {
      write_measure(std::cout, mu->mu, c);
      std::cout.flush();
    } else {
      save_measure(path, mu->mu, c);
    }
  });
}

td_status td_measure_info(const td_measure* mu, int* dim, int* depth, size_t* leaves,
                          double* total_mass) {
  return guard([&] {
    need(mu, "measure");
    const DyadicSet& s = mu->mu.base();
    if (dim) *dim = s.dim();
    if (depth) *depth = s.depth();
    if (leaves) *leaves = s.empty() ? 0 : s.leaves().size();
    if (total_mass) *total_mass = mu->mu.total_mass();
  });
}

td_status td_measure_coarsen(const td_measure* mu, int level, td_measure** out) {
  return guard([&] {
    need(mu, "measure");
    need(out, "out");
    *out = nullptr;
    *out = new td_measure{coarsen(mu->mu, level)};
  });
}

void td_measure_free(td_measure* mu) { delete mu; }

td_status td_energy(const td_measure* mu, double r, double theta, double s, int weight_m, int jobs,
                    double* value) {
  return guard([&] {
    need(mu, "measure");
    need(value, "value");
    *value = energy(mu->mu, KernelSpec{r, theta, s, weight_m}, jobs);
  });
}

td_status td_capacity_lower_bound(const td_measure* mu, double r, double theta, double s, int jobs,
                                  double* value) {
  return guard([&] {
    need(mu, "measure");
    need(value, "value");
    *value = capacity_lower_bound(mu->mu, KernelSpec{r, theta, s, 0}, jobs);
  });
}

td_status td_slice_scan(const td_set* set, double theta, const char* direction_json,
                        const double* offsets, size_t offset_count, const double* schedule,
                        size_t schedule_len, double tolerance, const char* options_json,
                        char** result_json) {
  return guard([&] {
    need(result_json, "result_json");
    *result_json = nullptr;
    const DyadicSet& s = set_of(set);
    const AffinePlane direction = parse_direction(direction_json, s.dim());
    const std::vector<double> grid =
        offsets ? as_vector(offsets, offset_count) : generic_offsets(direction, offset_count);
    const SliceReport rep = slice_scan(s, theta, direction, grid, as_vector(schedule, schedule_len),
                                       tolerance, parse_options(options_json));
    json rows = json::array();
    for (const auto& row : rep.rows) {
      rows.push_back({{"offset", row.offset},
                      {"slice_dim", row.slice_dim},
                      {"slice_cubes", row.slice_cubes},
                      {"empty", row.empty},
                      {"clamped", row.clamped},
                      {"violation", row.violation}});
    }
    json j;
    j["frame"] = frame_label(rep.direction);
    j["theta"] = rep.theta;
    j["tolerance"] = rep.tolerance;
    j["ambient"] = estimate_to_json(rep.ambient);
    j["bound"] = rep.bound;
    j["violations"] = rep.violations;
    j["violation_fraction"] = rep.violation_fraction();
    j["rows"] = std::move(rows);
    *result_json = dup_string(j.dump());
  });
}

td_status td_study_run(const char* name, const char* config_json, const char* out_dir,
                       int* passed, char** report_json) {
  return guard([&] {
    need(name, "name");
    if (report_json) *report_json = nullptr;
    const StudyOutput output = run_study(name, config_json ? config_json : "");
    if (out_dir != nullptr) write_study(output, out_dir);
    if (passed) *passed = output.passed() ? 1 : 0;
    if (report_json) *report_json = dup_string(output.report_json);
  });
}

}  // extern "C"
