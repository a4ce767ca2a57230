#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "thetadim/errors.hpp"
#include "thetadim/experiments.hpp"
#include "json.hpp"

using namespace thetadim;
using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kSmallCp =
    R"({"p": 0.5, "thetas": [0.5, 1], "depth": 10, "offsets": 8, "slice_depth": 24, "jobs": 1})";

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("closed formula") {
  CHECK(rotated_sequence_formula(0.5, 1.0) == doctest::Approx(4.0 / 3.0));
  CHECK(rotated_sequence_formula(0.5, 0.5) == doctest::Approx(1.2));
  CHECK(rotated_sequence_formula(0.5, 0.25) == doctest::Approx(10.0 / 9.0));
}

TEST_CASE("set specs") {
  const SetSpec s = parse_set_spec(R"({"kind": "pattern", "d": 2, "depth": 6, "pattern": [0, 3]})");
  CHECK(set_id(s) == "pattern[0;3]/d2/L6");
  CHECK(make_set(s).leaves().size() == 64);
  const SetSpec again = parse_set_spec(set_spec_json(s));
  CHECK(set_id(again) == set_id(s));
  CHECK(make_set(parse_set_spec(R"({"kind": "sequence-interval", "p": 1, "depth": 6})")).dim() == 2);
  CHECK_THROWS_AS(make_set(parse_set_spec(R"({"kind": "torus"})")), ConfigError);
  CHECK_THROWS_AS(parse_set_spec(R"({"kind": "cube", "colour": 1})"), ConfigError);
}

TEST_CASE("number formatting") {
  CHECK(format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(format_number(2.0) == "2");
  CHECK(format_number(std::nan("")) == "nan");
}

TEST_CASE("config parsing") {
  const CpCalibrationConfig c = parse_cp_calibration_config(R"({"p": 0.4, "thetas": [1]})");
  CHECK(c.p == 0.4);
  CHECK(c.thetas.size() == 1);
  CHECK(c.depth == 14);
  CHECK_THROWS_AS(parse_cp_calibration_config(R"({"depht": 3})"), ConfigError);
  CHECK_THROWS_AS(parse_lower_bound_config(R"({"p": "one"})"), ConfigError);
  const FrostmanAuditConfig f = parse_frostman_audit_config(
      R"({"set": {"kind": "cube", "d": 1, "depth": 12}, "t": 0.8, "alpha": 0.5})");
  REQUIRE(f.cases.size() == 1);
  CHECK(f.cases[0].t == 0.8);
  CHECK_THROWS_AS(run_study("no-such-study", "{}"), ConfigError);
}

TEST_CASE("study outputs are reproducible byte for byte") {
  const StudyOutput a = run_study("cp-calibration", kSmallCp);
  const StudyOutput b = run_study("cp-calibration", kSmallCp);
  std::string config = kSmallCp;
  config.replace(config.find("\"jobs\": 1"), 9, "\"jobs\": 3");
  const StudyOutput c = run_study("cp-calibration", config);
  REQUIRE(a.tables.size() == b.tables.size());
  for (std::size_t i = 0; i < a.tables.size(); ++i) {
    CHECK(a.tables[i].content == b.tables[i].content);
    // The worker count is not part of the echoed configuration.
    CHECK(a.tables[i].content == c.tables[i].content);
  }
  CHECK(a.report_json == b.report_json);

  const auto dir = std::filesystem::temp_directory_path() / "thetadim-study-test";
  std::filesystem::remove_all(dir);
  write_study(a, dir.string());
  const json report = json::parse(read_file(dir / "report.json"));
  CHECK(report.at("study") == "cp-calibration");
  CHECK(report.contains("surrogate"));
  CHECK(report.at("passed").get<bool>() == a.passed());
  for (const auto& t : a.tables) {
    const std::string text = read_file(dir / t.file_name);
    CHECK(text == t.content);
    CHECK(text.rfind("# study: cp-calibration\n# config: {", 0) == 0);
    CHECK(text.find('\r') == std::string::npos);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("calibration report rows") {
  const StudyOutput out = run_study("cp-calibration", kSmallCp);
  const json report = json::parse(out.report_json);
  const auto& rows = report.at("estimates");
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].at("formula").get<double>() == doctest::Approx(4.0 / 3.0));
  CHECK(rows[0].at("formula").get<double>() == doctest::Approx(1.2));
  CHECK(rows[0].contains("scales"));
  CHECK(report.contains("rasterized_slice_fraction_below_threshold"));
}

TEST_CASE("frostman audit aborts cleanly on a point") {
  const StudyOutput out = run_study(
      "frostman-audit",
      R"({"set": {"kind": "point", "d": 2, "depth": 12, "point": [0.3, 0.3]}, "t": 0.5, "alpha": 0.2})");
  const json report = json::parse(out.report_json);
  const auto& cases = report.at("cases");
  REQUIRE(cases.size() == 1);
  CHECK(cases[0].contains("aborted"));
  CHECK_FALSE(out.passed());
}

TEST_CASE("frostman audit on the square") {
  const StudyOutput out = run_study(
      "frostman-audit",
      R"({"set": {"kind": "cube", "d": 2, "depth": 8}, "t": 1.5, "alpha": 1.5, "theta": 0.5,
          "deltas": [0.25, 0.125, 0.0625], "planes": 2})");
  for (const auto& c : out.checks) CHECK_MESSAGE(c.passed, c.name << ": " << c.detail);
  const json report = json::parse(out.report_json);
  for (const auto& row : report.at("cases")[0].at("per_delta")) {
    CHECK(row.at("profile").at("c").get<double>() < 10.0);
  }
}

}  // TEST_SUITE
