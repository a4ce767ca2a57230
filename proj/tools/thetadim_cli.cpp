// Command-line front end. Talks to the library only through the C API.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "thetadim/thetadim.h"

namespace {

using json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitResolution = 3;
constexpr int kExitStudy = 4;

struct CliError {
  int code;
  std::string message;
};

int exit_code_for(td_status status) {
  switch (status) {
    case TD_OK: return kExitOk;
    case TD_ERR_RESOLUTION: return kExitResolution;
    case TD_ERR_CONFIG:
    case TD_ERR_DOMAIN:
    case TD_ERR_RANGE:
    case TD_ERR_INVALID_ARGUMENT:
    case TD_ERR_NOT_IMPLEMENTED:
    case TD_ERR_PRECONDITION:
    case TD_ERR_EMPTY_SET:
      return kExitConfig;
    default:
      return kExitFailure;
  }
}

void check(td_status status) {
  if (status != TD_OK) {
    throw CliError{exit_code_for(status),
                   std::string(td_status_name(status)) + ": " + td_last_error()};
  }
}

[[noreturn]] void config_error(const std::string& message) { throw CliError{kExitConfig, message}; }

// Owning wrappers for the C handles.
struct SetDeleter {
  void operator()(td_set* s) const { td_set_free(s); }
};
struct MeasureDeleter {
  void operator()(td_measure* m) const { td_measure_free(m); }
};
using SetPtr = std::unique_ptr<td_set, SetDeleter>;
using MeasurePtr = std::unique_ptr<td_measure, MeasureDeleter>;

std::string take(char* s) {
  std::string out = s ? s : "";
  td_string_free(s);
  return out;
}

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// Options of one subcommand, recorded so that only flags given on the
// command line override the JSON config.
class Binder {
 public:
  explicit Binder(CLI::App* app) : app_(app) {}

  template <typename T>
  CLI::Option* add(const std::string& flag, const std::string& key, const std::string& help) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app_->add_option(flag, *value, help);
    items_.push_back({opt, [value, key](json& j) { j[key] = *value; }});
    return opt;
  }

  template <typename T>
  CLI::Option* add_list(const std::string& flag, const std::string& key, const std::string& help) {
    return add<std::vector<T>>(flag, key, help)->delimiter(',');
  }

  void add_config() {
    app_->add_option("--config", config_path_, "JSON config; flags override its keys")
        ->check(CLI::ExistingFile);
  }

  json resolve() const {
    json j = json::object();
    if (!config_path_.empty()) {
      std::ifstream in(config_path_);
      try {
        j = json::parse(in);
      } catch (const json::exception& e) {
        config_error("cannot parse " + config_path_ + ": " + e.what());
      }
      if (!j.is_object()) config_error(config_path_ + ": config must be a JSON object");
    }
    for (const auto& [opt, apply] : items_) {
      if (opt->count() > 0) apply(j);
    }
    return j;
  }

 private:
  CLI::App* app_;
  std::string config_path_;
  std::vector<std::pair<CLI::Option*, std::function<void(json&)>>> items_;
};

template <typename T>
T get(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    config_error(std::string("config key '") + key + "': " + e.what());
  }
}

void only_keys(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : keys) ok = ok || item.key() == k;
    if (!ok) config_error(where + ": unsupported option '" + item.key() + "'");
  }
}

void add_set_flags(Binder& b) {
  b.add<std::string>("--set", "set", "leaf file");
  b.add<std::string>("--kind", "kind",
                     "generator: cube, point, pattern, sequence, rotated-sequence, "
                     "sequence-interval");
  b.add<double>("--p", "p", "sequence exponent");
  b.add_list<unsigned>("--pattern", "pattern", "child digits kept by the pattern fractal");
  b.add_list<double>("--point", "point", "coordinates of the point set");
  b.add<int>("--d", "d", "ambient dimension");
  b.add<int>("--depth", "depth", "maximum depth (truncates a loaded set)");
}

json generator_spec(const json& j) {
  json spec;
  spec["kind"] = get<std::string>(j, "kind", "cube");
  spec["d"] = get<int>(j, "d", 2);
  spec["depth"] = get<int>(j, "depth", 10);
  if (j.contains("p")) spec["p"] = j.at("p");
  if (j.contains("pattern")) spec["pattern"] = j.at("pattern");
  if (j.contains("point")) spec["point"] = j.at("point");
  return spec;
}

struct LoadedSet {
  SetPtr set;
  std::string id;
};

LoadedSet load_set(const json& j) {
  LoadedSet out;
  td_set* raw = nullptr;
  if (j.contains("set")) {
    if (j.contains("kind")) config_error("give either --set or --kind, not both");
    const std::string path = get<std::string>(j, "set", "");
    check(td_set_load(path.c_str(), &raw));
    out.set.reset(raw);
    out.id = std::filesystem::path(path).filename().string();
    if (j.contains("depth")) {
      const int depth = get<int>(j, "depth", 0);
      int have = 0;
      check(td_set_info(out.set.get(), nullptr, &have, nullptr));
      if (depth > have) {
        config_error("--depth " + std::to_string(depth) + " exceeds the depth " +
                     std::to_string(have) + " of " + path);
      }
      if (depth < have) {
        td_set* cut = nullptr;
        check(td_set_truncate(out.set.get(), depth, &cut));
        out.set.reset(cut);
      }
    }
    return out;
  }
  if (!j.contains("kind")) config_error("no input set: give --set or --kind");
  const json spec = generator_spec(j);
  check(td_set_generate(spec.dump().c_str(), &raw));
  out.set.reset(raw);
  std::string id = spec["kind"].get<std::string>();
  if (spec.contains("p")) id += "[p=" + num(spec["p"].get<double>()) + "]";
  if (spec.contains("pattern")) {
    id += "[";
    bool first = true;
    for (const auto& v : spec["pattern"]) {
      id += (first ? "" : ";") + std::to_string(v.get<unsigned>());
      first = false;
    }
    id += "]";
  }
  int dim = 0, depth = 0;
  check(td_set_info(out.set.get(), &dim, &depth, nullptr));
  out.id = id + "/d" + std::to_string(dim) + "/L" + std::to_string(depth);
  return out;
}

json estimate_options(const json& j) {
  json o;
  o["mode"] = get<std::string>(j, "mode", "regression");
  o["epsilon"] = get<double>(j, "epsilon", 1.0);
  o["jobs"] = get<int>(j, "jobs", 0);
  return o;
}

std::string header(const std::string& command, const json& config) {
  return "# thetadim " + command + "\n# config: " + config.dump() + "\n";
}

// Writes to `path`, or stdout when it is empty or "-".
void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    std::cout.flush();
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw CliError{kExitFailure, "cannot write " + path};
  f << content;
}

std::string sibling(const std::string& path, const std::string& suffix) {
  std::filesystem::path p(path);
  return (p.parent_path() / (p.stem().string() + suffix)).string();
}

std::string dimension_header() {
  return "set_id,theta,mode,estimate,depth,any_clamped,regression_rms,epsilon_low,epsilon_high\n";
}

std::string dimension_row(const std::string& id, const json& est) {
  return id + "," + num(est["theta"].get<double>()) + "," + est["mode"].get<std::string>() + "," +
         num(est["value"].get<double>()) + "," + std::to_string(est["depth"].get<int>()) + "," +
         (est["any_clamped"].get<bool>() ? "1" : "0") + "," +
         num(est["regression_rms"].get<double>()) + "," +
         num(est["epsilon_low_value"].is_null() ? NAN : est["epsilon_low_value"].get<double>()) +
         "," +
         num(est["epsilon_high_value"].is_null() ? NAN : est["epsilon_high_value"].get<double>()) +
         "\n";
}

std::string covering_header() { return "set_id,theta,delta,s_cross,cost_at_cross,cover_size,clamped\n"; }

std::string covering_rows(const std::string& id, const json& est) {
  std::string out;
  for (const auto& sc : est["per_scale"]) {
    out += id + "," + num(est["theta"].get<double>()) + "," + num(sc["delta"].get<double>()) +
           "," + num(sc["s_cross"].get<double>()) + "," + num(sc["cost_at_cross"].get<double>()) +
           "," + std::to_string(sc["cover_size"].get<std::size_t>()) + "," +
           (sc["clamped"].get<bool>() ? "1" : "0") + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------

int cmd_generate(const json& j) {
  only_keys(j, {"kind", "p", "pattern", "point", "d", "depth", "out"}, "generate");
  if (!j.contains("kind")) config_error("generate: --kind is required");
  const LoadedSet s = load_set(j);
  const std::string out = get<std::string>(j, "out", "-");
  check(td_set_save(s.set.get(), out.c_str(), ("thetadim generate\nconfig: " + j.dump()).c_str()));
  size_t leaves = 0;
  check(td_set_info(s.set.get(), nullptr, nullptr, &leaves));
  std::cerr << s.id << ": " << leaves << " leaves\n";
  return kExitOk;
}

int cmd_estimate(const json& j, bool sweep) {
  only_keys(j, {"set", "kind", "p", "pattern", "point", "d", "depth", "theta", "thetas", "schedule",
                "mode", "epsilon", "jobs", "out"},
            sweep ? "sweep" : "estimate");
  const LoadedSet s = load_set(j);
  std::vector<double> thetas;
  if (j.contains("thetas")) thetas = get<std::vector<double>>(j, "thetas", {});
  else if (j.contains("theta")) thetas = {get<double>(j, "theta", 1.0)};
  else if (sweep) thetas = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  else thetas = {1.0};
  const std::vector<double> schedule = get<std::vector<double>>(j, "schedule", {});
  const std::string options = estimate_options(j).dump();

  std::vector<json> estimates;
  if (sweep) {
    char* raw = nullptr;
    check(td_sweep(s.set.get(), thetas.data(), thetas.size(), schedule.data(), schedule.size(),
                   options.c_str(), &raw));
    const json result = json::parse(take(raw));
    for (const auto& p : result["points"]) estimates.push_back(p);
    std::cerr << "sweep: max drop " << num(result["max_drop"].get<double>())
              << (result["shared_schedule"].get<bool>() ? " (shared schedule)"
                                                        : " (per-theta schedules)")
              << "\n";
  } else {
    for (double theta : thetas) {
      char* raw = nullptr;
      check(td_estimate(s.set.get(), theta, schedule.data(), schedule.size(), options.c_str(), &raw));
      estimates.push_back(json::parse(take(raw)));
    }
  }

  const std::string command = sweep ? "sweep" : "estimate";
  std::string table = header(command, j) + dimension_header();
  std::string scales = header(command, j) + covering_header();
  for (const auto& est : estimates) {
    table += dimension_row(s.id, est);
    scales += covering_rows(s.id, est);
  }
  const std::string out = get<std::string>(j, "out", "-");
  emit(out, table);
  if (out != "-") emit(sibling(out, "_scales.csv"), scales);
  return kExitOk;
}

int cmd_frostman(const json& j) {
  only_keys(j, {"set", "kind", "p", "pattern", "point", "d", "depth", "t", "alpha", "theta",
                "delta", "cap_rule", "out"},
            "frostman");
  const LoadedSet s = load_set(j);
  const double t = get<double>(j, "t", 1.0);
  const double alpha = get<double>(j, "alpha", t);
  const double theta = get<double>(j, "theta", 0.5);
  const double delta = get<double>(j, "delta", 0.015625);
  const std::string rule = get<std::string>(j, "cap_rule", "rescale");
  td_measure* raw = nullptr;
  char* report_raw = nullptr;
  check(td_frostman_build(s.set.get(), t, alpha, theta, delta, rule.c_str(), &raw, &report_raw));
  MeasurePtr mu(raw);
  json report;
  report["command"] = "frostman";
  report["config"] = j;
  report["set_id"] = s.id;
  const json built = json::parse(take(report_raw));
  for (const auto& item : built.items()) report[item.key()] = item.value();
  const std::string out = get<std::string>(j, "out", "");
  if (out.empty() || out == "-") {
    std::cout << report.dump(2) << "\n";
  } else {
    check(td_measure_save(mu.get(), out.c_str(), ("thetadim frostman\nconfig: " + j.dump()).c_str()));
    emit(out + ".json", report.dump(2) + "\n");
  }
  const json& audit = report["audit"];
  std::cerr << s.id << ": caps " << (audit["caps_hold"].get<bool>() ? "hold" : "VIOLATED")
            << ", chain " << (audit["chain_holds"].get<bool>() ? "holds" : "VIOLATED")
            << ", mass error " << num(audit["mass_error"].get<double>()) << ", profile c "
            << num(report["profile"]["c"].get<double>()) << "\n";
  return kExitOk;
}

int cmd_energy(const json& j) {
  only_keys(j, {"measure", "set", "kind", "p", "pattern", "point", "d", "depth", "t", "alpha",
                "theta", "delta", "cap_rule", "r", "s", "m", "jobs", "out"},
            "energy");
  const double theta = get<double>(j, "theta", 0.5);
  const double r = get<double>(j, "r", 0.015625);
  const double s_exp = get<double>(j, "s", 1.0);
  const int m = get<int>(j, "m", 0);
  const int jobs = get<int>(j, "jobs", 0);

  MeasurePtr mu;
  SetPtr set;
  std::string id;
  td_measure* raw = nullptr;
  if (j.contains("measure")) {
    if (j.contains("set") || j.contains("kind")) config_error("energy: --measure excludes a set");
    const std::string path = get<std::string>(j, "measure", "");
    check(td_measure_load(path.c_str(), &raw));
    mu.reset(raw);
    id = std::filesystem::path(path).filename().string();
  } else {
    LoadedSet loaded = load_set(j);
    id = loaded.id;
    set = std::move(loaded.set);
    if (j.contains("t")) {
      const double t = get<double>(j, "t", 1.0);
      check(td_frostman_build(set.get(), t, get<double>(j, "alpha", t), theta,
                              get<double>(j, "delta", 0.015625),
                              get<std::string>(j, "cap_rule", "rescale").c_str(), &raw, nullptr));
      id += "/frostman";
    } else {
      check(td_measure_uniform(set.get(), &raw));
      id += "/uniform";
    }
    mu.reset(raw);
  }

  double e = 0.0, mass = 0.0;
  check(td_measure_info(mu.get(), nullptr, nullptr, nullptr, &mass));
  check(td_energy(mu.get(), r, theta, s_exp, m, jobs, &e));
  double bound = NAN, cover = NAN;
  if (m == 0 && std::abs(mass - 1.0) <= 1e-9) {
    check(td_capacity_lower_bound(mu.get(), r, theta, s_exp, jobs, &bound));
    // The matching covering problem: diameters in [r, r^theta].
    if (set) check(td_cover_cost(set.get(), s_exp, theta, std::pow(r, theta), &cover, nullptr));
  }
  std::string table = header("energy", j) +
                      "measure_id,r,theta,s,weight_m,total_mass,energy,capacity_lower_bound,"
                      "cover_cost\n";
  table += id + "," + num(r) + "," + num(theta) + "," + num(s_exp) + "," + std::to_string(m) + "," +
           num(mass) + "," + num(e) + "," + num(bound) + "," + num(cover) + "\n";
  emit(get<std::string>(j, "out", "-"), table);
  return kExitOk;
}

int cmd_slice_scan(const json& j) {
  only_keys(j, {"set", "kind", "p", "pattern", "point", "d", "depth", "theta", "direction",
                "offsets", "planes", "seed", "tolerance", "schedule", "mode", "epsilon", "jobs",
                "out"},
            "slice-scan");
  const LoadedSet s = load_set(j);
  int dim = 0;
  check(td_set_info(s.set.get(), &dim, nullptr, nullptr));
  const double theta = get<double>(j, "theta", 0.5);
  const std::string direction = get<std::string>(j, "direction", "sampled");
  const std::size_t offsets = get<std::size_t>(j, "offsets", 64);
  const std::size_t planes = get<std::size_t>(j, "planes", 1);
  const std::uint64_t seed = get<std::uint64_t>(j, "seed", 0);
  const double tolerance = get<double>(j, "tolerance", 0.15);
  const std::vector<double> schedule = get<std::vector<double>>(j, "schedule", {});
  const std::string options = estimate_options(j).dump();

  std::vector<json> directions;
  if (direction == "horizontal") {
    directions.push_back({{"kind", "axis"}, {"d", dim}, {"normal_axis", dim - 1}});
  } else if (direction == "vertical") {
    directions.push_back({{"kind", "axis"}, {"d", dim}, {"normal_axis", 0}});
  } else if (direction == "sampled") {
    for (std::size_t k = 0; k < planes; ++k) {
      directions.push_back({{"kind", "sample"}, {"d", dim}, {"seed", seed + k}});
    }
  } else {
    config_error("slice-scan: --direction must be horizontal, vertical or sampled");
  }

  std::string table = header("slice-scan", j) +
                      "set_id,theta,frame_angle_or_axes,offset,slice_dim,ambient_dim,bound,"
                      "violation\n";
  std::size_t violations = 0, total = 0;
  for (const auto& dir : directions) {
    char* raw = nullptr;
    check(td_slice_scan(s.set.get(), theta, dir.dump().c_str(), nullptr, offsets, schedule.data(),
                        schedule.size(), tolerance, options.c_str(), &raw));
    const json rep = json::parse(take(raw));
    const std::string frame = rep["frame"].get<std::string>();
    const double ambient = rep["ambient"]["value"].get<double>();
    const double bound = rep["bound"].get<double>();
    for (const auto& row : rep["rows"]) {
      table += s.id + "," + num(theta) + "," + frame + "," + num(row["offset"].get<double>()) + "," +
               num(row["slice_dim"].get<double>()) + "," + num(ambient) + "," + num(bound) + "," +
               (row["violation"].get<bool>() ? "1" : "0") + "\n";
    }
    violations += rep["violations"].get<std::size_t>();
    total += rep["rows"].size();
  }
  emit(get<std::string>(j, "out", "-"), table);
  std::cerr << s.id << ": " << violations << "/" << total << " offsets violate the bound at tolerance "
            << num(tolerance) << "\n";
  return kExitOk;
}

// Maps command-line keys onto the config keys of each study.
json study_config(const std::string& name, json j) {
  auto rename = [&](const char* from, const char* to) {
    if (j.contains(from)) {
      j[to] = j[from];
      j.erase(from);
    }
  };
  auto theta_to_list = [&] {
    if (j.contains("theta")) {
      if (j.contains("thetas")) config_error("give either --theta or --thetas");
      j["thetas"] = json::array({j["theta"]});
      j.erase("theta");
    }
  };
  if (name == "cp-calibration" || name == "lower-bound") {
    theta_to_list();
  }
  if (name == "frostman-audit") {
    if (j.contains("delta")) {
      if (j.contains("schedule")) config_error("give either --delta or --schedule");
      j["deltas"] = json::array({j["delta"]});
      j.erase("delta");
    }
    rename("schedule", "deltas");
    // Set flags become one case.
    json set;
    if (j.contains("set") && j["set"].is_string()) {
      set = {{"kind", "file"}, {"path", j["set"]}};
      j.erase("set");
    }
    for (const char* key : {"kind", "p", "pattern", "point", "d", "depth"}) {
      if (j.contains(key)) {
        set[key] = j[key];
        j.erase(key);
      }
    }
    if (!set.is_null()) j["set"] = set;
  }
  return j;
}

int cmd_study(const std::string& name, const json& flags, const std::string& out_dir) {
  const json config = study_config(name, flags);
  const std::string dir = out_dir.empty() ? "study-" + name : out_dir;
  int passed = 0;
  char* raw = nullptr;
  check(td_study_run(name.c_str(), config.dump().c_str(), dir.c_str(), &passed, &raw));
  const json report = json::parse(take(raw));
  for (const auto& c : report["checks"]) {
    std::cout << (c["passed"].get<bool>() ? "PASS " : "FAIL ") << c["name"].get<std::string>()
              << ": " << c["detail"].get<std::string>() << "\n";
  }
  std::cout << name << ": " << (passed ? "passed" : "FAILED") << " (report in " << dir << ")\n";
  return passed ? kExitOk : kExitStudy;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"thetadim: theta-intermediate dimensions of dyadic sets"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(td_version()));

  auto* generate = app.add_subcommand("generate", "write a generated set as a leaf file");
  Binder g(generate);
  g.add_config();
  add_set_flags(g);
  g.add<std::string>("--out", "out", "output leaf file (default stdout)");

  auto* estimate = app.add_subcommand("estimate", "estimate dim_theta of a set");
  auto* sweep = app.add_subcommand("sweep", "estimate dim_theta over a theta grid");
  Binder e(estimate), w(sweep);
  for (Binder* b : {&e, &w}) {
    b->add_config();
    add_set_flags(*b);
    b->add<double>("--theta", "theta", "theta in (0, 1]");
    b->add_list<double>("--thetas", "thetas", "comma-separated thetas");
    b->add_list<double>("--schedule", "schedule", "comma-separated coarse scales delta");
    b->add<std::string>("--mode", "mode", "regression, liminf or limsup");
    b->add<double>("--epsilon", "epsilon", "crossing threshold");
    b->add<int>("--jobs", "jobs", "worker threads (0 = all cores)");
    b->add<std::string>("--out", "out", "output CSV (default stdout)");
  }

  auto* frostman = app.add_subcommand("frostman", "build and audit a capped mass distribution");
  Binder f(frostman);
  f.add_config();
  add_set_flags(f);
  f.add<double>("--t", "t", "cap exponent");
  f.add<double>("--alpha", "alpha", "fine-regime exponent of the ball bound");
  f.add<double>("--theta", "theta", "theta in (0, 1)");
  f.add<double>("--delta", "delta", "coarse scale");
  f.add<std::string>("--cap-rule", "cap_rule", "rescale or uniform-reset");
  f.add<std::string>("--out", "out", "measure file (report goes to <out>.json)");

  auto* energy_cmd = app.add_subcommand("energy", "kernel energy and capacity bound");
  Binder k(energy_cmd);
  k.add_config();
  add_set_flags(k);
  k.add<std::string>("--measure", "measure", "measure file");
  k.add<double>("--t", "t", "build a capped measure with this exponent");
  k.add<double>("--alpha", "alpha", "fine-regime exponent of the capped measure");
  k.add<double>("--delta", "delta", "coarse scale of the capped measure");
  k.add<std::string>("--cap-rule", "cap_rule", "rescale or uniform-reset");
  k.add<double>("--theta", "theta", "kernel theta");
  k.add<double>("--r", "r", "kernel fine scale");
  k.add<double>("--s", "s", "kernel exponent");
  k.add<int>("--m", "m", "distance weight exponent");
  k.add<int>("--jobs", "jobs", "worker threads (0 = all cores)");
  k.add<std::string>("--out", "out", "output CSV (default stdout)");

  auto* slice = app.add_subcommand("slice-scan", "slice dimensions along parallel planes");
  Binder sl(slice);
  sl.add_config();
  add_set_flags(sl);
  sl.add<double>("--theta", "theta", "theta in (0, 1]");
  sl.add<std::string>("--direction", "direction", "horizontal, vertical or sampled");
  sl.add<std::size_t>("--offsets", "offsets", "offsets per direction");
  sl.add<std::size_t>("--planes", "planes", "sampled directions");
  sl.add<std::uint64_t>("--seed", "seed", "seed of the sampled directions");
  sl.add<double>("--tolerance", "tolerance", "violation tolerance");
  sl.add_list<double>("--schedule", "schedule", "comma-separated coarse scales delta");
  sl.add<std::string>("--mode", "mode", "regression, liminf or limsup");
  sl.add<double>("--epsilon", "epsilon", "crossing threshold");
  sl.add<int>("--jobs", "jobs", "worker threads (0 = all cores)");
  sl.add<std::string>("--out", "out", "output CSV (default stdout)");

  auto* study = app.add_subcommand("study", "run a named study");
  std::string study_name, study_out;
  study->add_option("name", study_name, "cp-calibration, frostman-audit or lower-bound")
      ->required()
      ->check(CLI::IsMember({"cp-calibration", "frostman-audit", "lower-bound"}));
  study->add_option("--out", study_out, "output directory (default study-<name>)");
  Binder st(study);
  st.add_config();
  add_set_flags(st);
  st.add<double>("--theta", "theta", "theta");
  st.add_list<double>("--thetas", "thetas", "comma-separated thetas");
  st.add<double>("--t", "t", "cap exponent");
  st.add<double>("--alpha", "alpha", "fine-regime exponent");
  st.add<double>("--delta", "delta", "single coarse scale");
  st.add_list<double>("--schedule", "schedule", "comma-separated coarse scales");
  st.add<std::string>("--cap-rule", "cap_rule", "rescale or uniform-reset");
  st.add<std::size_t>("--offsets", "offsets", "offsets per direction");
  st.add<std::size_t>("--planes", "planes", "sampled planes");
  st.add<double>("--tolerance", "tolerance", "comparison tolerance");
  st.add<std::uint64_t>("--seed", "seed", "experiment seed");
  st.add<int>("--jobs", "jobs", "worker threads (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return kExitConfig;
  }

  try {
    if (*generate) return cmd_generate(g.resolve());
    if (*estimate) return cmd_estimate(e.resolve(), false);
    if (*sweep) return cmd_estimate(w.resolve(), true);
    if (*frostman) return cmd_frostman(f.resolve());
    if (*energy_cmd) return cmd_energy(k.resolve());
    if (*slice) return cmd_slice_scan(sl.resolve());
    if (*study) return cmd_study(study_name, st.resolve(), study_out);
  } catch (const CliError& err) {
    std::cerr << "error: " << err.message << "\n";
    return err.code;
  } catch (const json::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
