#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "chernres.h"

namespace {

const char* kPoint = R"({
  "version": 1,
  "name": "capi-point",
  "n": 1,
  "complex": {"ranks": [1, 1], "maps": [[["z1"]]]},
  "phi": ["e1"],
  "regulator": {"ladder": [0.1, 0.03, 0.01, 0.003], "chi_check": false},
  "tests": [{"name": "bump", "center": [0], "radius": 0.8}],
  "expected": [{"phi": "e1", "test": "bump", "value": 1, "tolerance": 0.02, "relative": true, "source": "fundamental cycle"}]
})";

chernres_scenario* parsed(const char* text) {
  chernres_scenario* s = nullptr;
  REQUIRE(chernres_scenario_parse(text, &s) == CHERNRES_OK);
  REQUIRE(s != nullptr);
  return s;
}

}  // namespace

TEST_CASE("version and option defaults") {
  CHECK(std::string(chernres_version()).size() > 0);
  chernres_run_options o;
  chernres_run_options_init(&o);
  CHECK(o.seed == 1u);
  CHECK(o.tolerance_scale == 1.0);
  CHECK(o.ladder == nullptr);
  CHECK(o.cutoff == nullptr);
}

TEST_CASE("errors come back as status codes with a message") {
  chernres_scenario* s = nullptr;
  CHECK(chernres_scenario_load("/nonexistent/scenario.json", &s) == CHERNRES_IO);
  CHECK(s == nullptr);
  CHECK(std::string(chernres_last_error()).find("/nonexistent/scenario.json") != std::string::npos);

  CHECK(chernres_scenario_parse("{\"version\": 1, \"n\": 1, \"bogus\": true}", &s) == CHERNRES_INVALID_SCENARIO);
  const std::string msg = chernres_last_error();
  CHECK(msg.find("bogus: unknown key") != std::string::npos);
  CHECK(msg.find("needs phi") != std::string::npos);

  CHECK(chernres_scenario_parse(nullptr, &s) == CHERNRES_INVALID_ARGUMENT);
  CHECK(chernres_run(nullptr, nullptr, nullptr) == CHERNRES_INVALID_ARGUMENT);
  CHECK(chernres_report_json(nullptr) == nullptr);
  CHECK(chernres_report_passed(nullptr) == 0);
  chernres_scenario_free(nullptr);
  chernres_report_free(nullptr);
}

TEST_CASE("scenario accessors and canonical round trip") {
  chernres_scenario* s = parsed(kPoint);
  CHECK(std::string(chernres_scenario_name(s)) == "capi-point");
  CHECK(chernres_scenario_dim(s) == 1);
  const std::string canon = chernres_scenario_canonical(s);
  chernres_scenario* again = parsed(canon.c_str());
  CHECK(std::string(chernres_scenario_canonical(again)) == canon);
  chernres_scenario_free(again);
  chernres_scenario_free(s);
}

TEST_CASE("verify through the C interface") {
  chernres_scenario* s = parsed(kPoint);
  chernres_report* r = nullptr;
  REQUIRE(chernres_verify(s, "algebra", nullptr, &r) == CHERNRES_OK);
  CHECK(chernres_report_passed(r) == 1);
  const auto j = nlohmann::json::parse(chernres_report_json(r));
  CHECK(j["kind"] == "verify");
  for (auto& c : j["checks"]) {
    CHECK(c.contains("tolerance"));
    CHECK(c["pass"].get<bool>());
  }
  chernres_report_free(r);
  CHECK(chernres_verify(s, "bogus", nullptr, &r) == CHERNRES_INVALID_ARGUMENT);
  CHECK(r == nullptr);
  chernres_scenario_free(s);
}

TEST_CASE("run, overrides and report files") {
  chernres_scenario* s = parsed(kPoint);
  chernres_run_options o;
  chernres_run_options_init(&o);
  chernres_report* r = nullptr;
  REQUIRE(chernres_run(s, &o, &r) == CHERNRES_OK);
  CHECK(chernres_report_passed(r) == 1);
  const auto j = nlohmann::json::parse(chernres_report_json(r));
  REQUIRE(j["residues"].size() == 1);
  CHECK(std::abs(j["residues"][0]["estimate"]["limit"]["re"].get<double>() - 1.0) < 0.02);
  CHECK(std::string(chernres_report_csv(r)).rfind("phi,test,cutoff,eps,re,im,quadrature_error\n", 0) == 0);

  const auto dir = std::filesystem::temp_directory_path() / "chernres_capi_test";
  std::filesystem::remove_all(dir);
  REQUIRE(chernres_report_write(r, dir.c_str()) == CHERNRES_OK);
  std::ifstream json(dir / "report.json"), csv(dir / "ladders.csv");
  CHECK(json.good());
  CHECK(csv.good());
  std::filesystem::remove_all(dir);
  chernres_report_free(r);

  // An increasing ladder and an unknown cutoff are rejected.
  const double up[] = {0.01, 0.1, 0.2, 0.3};
  o.ladder = up;
  o.ladder_len = 4;
  CHECK(chernres_run(s, &o, &r) == CHERNRES_INVALID_ARGUMENT);
  o.ladder = nullptr;
  o.ladder_len = 0;
  o.cutoff = "gaussian";
  CHECK(chernres_run(s, &o, &r) == CHERNRES_INVALID_ARGUMENT);
  chernres_scenario_free(s);
}

TEST_CASE("oracle report") {
  chernres_scenario* s = parsed(kPoint);
  chernres_report* r = nullptr;
  REQUIRE(chernres_oracle(s, nullptr, &r) == CHERNRES_OK);
  const auto j = nlohmann::json::parse(chernres_report_json(r));
  CHECK(j["kind"] == "oracle");
  CHECK(j["values"].size() == 1);
  chernres_report_free(r);
  chernres_scenario_free(s);
}
