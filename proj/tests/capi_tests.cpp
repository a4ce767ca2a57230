// Exercises the shared library through its C header only.
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

#include "json.hpp"
#include "thetadim/thetadim.h"

namespace {

int failures = 0;

void expect(bool ok, const char* what, int line) {
  if (!ok) {
    ++failures;
    std::fprintf(stderr, "line %d: %s (last error: %s)\n", line, what, td_last_error());
  }
}

#define EXPECT(cond) expect((cond), #cond, __LINE__)

nlohmann::json take(char* raw) {
  nlohmann::json j = nlohmann::json::parse(raw ? raw : "null");
  td_string_free(raw);
  return j;
}

}  // namespace

int main() {
  EXPECT(std::strlen(td_version()) > 0);
  EXPECT(std::string(td_status_name(TD_ERR_RESOLUTION)) == "ResolutionError");

  td_set* diag = nullptr;
  EXPECT(td_set_generate(R"({"kind": "pattern", "d": 2, "depth": 10, "pattern": [0, 3]})", &diag) ==
         TD_OK);
  int dim = 0;
  int depth = 0;
  size_t leaves = 0;
  EXPECT(td_set_info(diag, &dim, &depth, &leaves) == TD_OK);
  EXPECT(dim == 2 && depth == 10 && leaves == 1024);
  size_t count = 0;
  EXPECT(td_set_level_count(diag, 3, &count) == TD_OK && count == 8);
  double value = 0.0;
  EXPECT(td_set_dyadic_dimension(diag, &value) == TD_OK && value == 1.0);

  // Errors come back as codes with a message, never as exceptions.
  td_set* bad = nullptr;
  EXPECT(td_set_generate(R"({"kind": "nope"})", &bad) == TD_ERR_CONFIG);
  EXPECT(bad == nullptr);
  EXPECT(std::strlen(td_last_error()) > 0);
  EXPECT(td_set_generate("{not json", &bad) == TD_ERR_CONFIG);
  EXPECT(td_set_level_count(diag, 11, &count) != TD_OK);
  EXPECT(td_set_info(nullptr, &dim, &depth, &leaves) == TD_ERR_INVALID_ARGUMENT);

  double cost = 0.0;
  size_t cover = 0;
  EXPECT(td_cover_cost(diag, 1.0, 0.5, 0.2, &cost, &cover) == TD_OK);
  EXPECT(cost > 0.0 && cover > 0);
  EXPECT(td_cover_cost(diag, 1.0, 0.5, 1e-9, &cost, &cover) == TD_ERR_RESOLUTION);

  double schedule[32];
  size_t n = 0;
  EXPECT(td_default_schedule(2, 10, 0.5, schedule, 32, &n) == TD_OK && n >= 3);
  // A short buffer still reports the full length.
  size_t full = 0;
  EXPECT(td_default_schedule(2, 10, 0.5, nullptr, 0, &full) == TD_OK && full == n);
  EXPECT(td_default_schedule(2, 10, 0.5, schedule, 1, &full) == TD_OK && full == n);

  char* raw = nullptr;
  EXPECT(td_estimate(diag, 0.5, nullptr, 0, nullptr, &raw) == TD_OK);
  const auto est = take(raw);
  EXPECT(std::abs(est.at("value").get<double>() - 1.0) <= 0.05);
  EXPECT(est.at("per_scale").size() >= 3);

  const double thetas[] = {1.0, 0.25, 0.5};
  EXPECT(td_sweep(diag, thetas, 3, schedule, n, R"({"mode": "liminf"})", &raw) == TD_OK);
  const auto sweep = take(raw);
  EXPECT(sweep.at("points").size() == 3);
  EXPECT(sweep.at("nondecreasing").get<bool>());
  EXPECT(td_estimate(diag, 0.5, nullptr, 0, R"({"mode": "median"})", &raw) == TD_ERR_CONFIG);

  // Leaves from raw indices, then a save/load round trip.
  const uint64_t idx[] = {0, 0, 3, 3, 3, 2};
  td_set* small = nullptr;
  EXPECT(td_set_from_leaves(2, 2, idx, 3, &small) == TD_OK);
  EXPECT(td_set_info(small, &dim, &depth, &leaves) == TD_OK && leaves == 3);
  const std::string path = "capi_small.leaves";
  EXPECT(td_set_save(small, path.c_str(), "three leaves") == TD_OK);
  td_set* loaded = nullptr;
  EXPECT(td_set_load(path.c_str(), &loaded) == TD_OK);
  EXPECT(td_set_info(loaded, &dim, &depth, &leaves) == TD_OK && leaves == 3);
  EXPECT(td_set_load("does/not/exist", &bad) == TD_ERR_IO);
  td_set* coarse = nullptr;
  EXPECT(td_set_truncate(loaded, 1, &coarse) == TD_OK);
  EXPECT(td_set_info(coarse, &dim, &depth, &leaves) == TD_OK && depth == 1 && leaves == 2);
  std::remove(path.c_str());

  // Measures and energies.
  td_set* interval = nullptr;
  EXPECT(td_set_generate(R"({"kind": "cube", "d": 1, "depth": 16})", &interval) == TD_OK);
  td_measure* mu = nullptr;
  EXPECT(td_frostman_build(interval, 0.9, 0.9, 0.5, 1.0 / 256, nullptr, &mu, &raw) == TD_OK);
  const auto fr = take(raw);
  EXPECT(fr.at("audit").at("caps_hold").get<bool>());
  EXPECT(fr.at("audit").at("chain_holds").get<bool>());
  double mass = 0.0;
  EXPECT(td_measure_info(mu, &dim, &depth, &leaves, &mass) == TD_OK);
  EXPECT(std::abs(mass - 1.0) <= 1e-12);
  td_measure* mu8 = nullptr;
  EXPECT(td_measure_coarsen(mu, 8, &mu8) == TD_OK);
  EXPECT(td_measure_info(mu8, &dim, &depth, &leaves, &mass) == TD_OK && leaves == 256);
  double e1 = 0.0;
  double e4 = 0.0;
  EXPECT(td_energy(mu8, 1.0 / 64, 0.5, 0.5, 0, 1, &e1) == TD_OK);
  EXPECT(td_energy(mu8, 1.0 / 64, 0.5, 0.5, 0, 4, &e4) == TD_OK);
  EXPECT(e1 > 0.0 && e1 == e4);
  double bound = 0.0;
  EXPECT(td_capacity_lower_bound(mu8, 1.0 / 64, 0.5, 0.5, 1, &bound) == TD_OK);
  EXPECT(std::abs(bound - std::pow(1.0 / 64, 0.5) / e1) <= 1e-12 * bound);
  EXPECT(td_capacity_lower_bound(mu8, 1.0 / 64, 0.5, -1.0, 1, &bound) == TD_ERR_DOMAIN);
  EXPECT(td_frostman_build(interval, 0.9, 0.9, 0.5, 1.0 / 256, "sideways", &mu, nullptr) ==
         TD_ERR_CONFIG);

  const std::string mpath = "capi_measure.txt";
  EXPECT(td_measure_save(mu8, mpath.c_str(), nullptr) == TD_OK);
  td_measure* back = nullptr;
  EXPECT(td_measure_load(mpath.c_str(), &back) == TD_OK);
  EXPECT(td_measure_info(back, &dim, &depth, &leaves, &mass) == TD_OK && leaves == 256);
  std::remove(mpath.c_str());
  td_measure* uniform = nullptr;
  EXPECT(td_measure_uniform(diag, &uniform) == TD_OK);

  // Slicing.
  td_set* square = nullptr;
  EXPECT(td_set_generate(R"({"kind": "cube", "d": 2, "depth": 9})", &square) == TD_OK);
  EXPECT(td_slice_scan(square, 0.5, R"({"kind": "axis", "d": 2, "normal_axis": 1})", nullptr, 8,
                       nullptr, 0, 0.15, nullptr, &raw) == TD_OK);
  const auto scan = take(raw);
  EXPECT(scan.at("rows").size() == 8);
  EXPECT(scan.at("violations").get<int>() == 0);
  const double offsets[] = {0.3, 0.7};
  EXPECT(td_slice_scan(square, 0.5, R"({"kind": "line", "angle": 0.5})", offsets, 2, nullptr, 0,
                       0.15, nullptr, &raw) == TD_OK);
  EXPECT(take(raw).at("rows").size() == 2);
  EXPECT(td_slice_scan(square, 0.5, R"({"kind": "sample", "d": 3, "seed": 1})", nullptr, 4, nullptr,
                       0, 0.15, nullptr, &raw) != TD_OK);

  // Studies.
  int passed = -1;
  EXPECT(td_study_run("cp-calibration",
                      R"({"thetas": [1], "depth": 10, "offsets": 4, "slice_depth": 20})", nullptr,
                      &passed, &raw) == TD_OK);
  const auto study = take(raw);
  EXPECT(study.at("study") == "cp-calibration");
  EXPECT(passed == (study.at("passed").get<bool>() ? 1 : 0));
  EXPECT(td_study_run("nothing", "{}", nullptr, &passed, &raw) == TD_ERR_CONFIG);

  for (td_set* s : {diag, small, loaded, coarse, interval, square}) td_set_free(s);
  for (td_measure* m : {mu, mu8, back, uniform}) td_measure_free(m);
  td_set_free(nullptr);
  td_measure_free(nullptr);

  std::printf("%s (%d failures)\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
