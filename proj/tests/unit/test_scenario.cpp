#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <string>

#include "chernres/scenario.hpp"

using namespace chernres;

namespace {

std::string fixture(const std::string& name) { return std::string(CHERNRES_SOURCE_DIR) + "/tests/scenarios/" + name + ".json"; }

const char* kMinimal = R"({
  "version": 1,
  "name": "minimal",
  "n": 1,
  "complex": {"ranks": [1, 1], "maps": [[["z1"]]]},
  "phi": ["e1"],
  "tests": [{"name": "bump", "center": [0], "radius": 0.8}]
})";

// Problems reported for a document, joined.
std::string problems(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ScenarioError& e) {
    std::string all;
    for (auto& p : e.problems()) all += p + "\n";
    return all;
  }
  return "";
}

std::string with(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  return text.replace(pos, from.size(), to);
}

RunOptions quick() {
  RunOptions o;
  o.ladder = {1e-1, 3e-2, 1e-2, 3e-3};
  return o;
}

}  // namespace

TEST_CASE("minimal scenario parses with defaults") {
  const Scenario s = parse_scenario(kMinimal);
  CHECK(s.n == 1);
  CHECK(s.mode == TildeKind::Sheaf);
  CHECK(s.phi_text == std::vector<std::string>{"e1"});
  CHECK(s.tests.size() == 1);
  CHECK(s.options.ladder.eps.size() == 5);
  CHECK(s.setup.cover.size() == 1);
  CHECK(s.canonical["regulator"]["cutoff"] == "exp-step");
}

TEST_CASE("canonical documents are fixed points of parsing") {
  for (const char* name : {"point-sheaf-1d", "double-point-1d", "padded-point-1d", "three-box-1d", "koszul-2d", "koszul-connection-2d",
                           "hyperplane-sheaf-2d", "linear-foliation-2d", "two-singularities-2d"}) {
    CAPTURE(name);
    const Scenario s = load_scenario(fixture(name));
    const Scenario again = parse_scenario(s.canonical.dump());
    CHECK(again.canonical == s.canonical);
    CHECK(parse_scenario(again.canonical.dump(2)).canonical.dump() == s.canonical.dump());
  }
}

TEST_CASE("every problem is reported with its path") {
  const std::string bad = R"({
    "version": 2,
    "n": 1,
    "complex": {"ranks": [1, 1], "maps": [[["z1 +"]]], "colour": "red"},
    "phi": ["e1"],
    "tests": [{"name": "bump", "center": [0], "radius": 0.8}],
    "extra": 1
  })";
  const std::string p = problems(bad);
  CHECK(p.find("version") != std::string::npos);
  CHECK(p.find("complex.maps[0][0][0]") != std::string::npos);
  CHECK(p.find("complex.colour: unknown key") != std::string::npos);
  CHECK(p.find("extra: unknown key") != std::string::npos);
  CHECK(problems("{ not json").find("syntax") != std::string::npos);
}

TEST_CASE("maps must be holomorphic, metrics may use conjugates") {
  CHECK(problems(with(kMinimal, "\"z1\"", "\"zbar1\"")).find("holomorphic") != std::string::npos);
  const std::string metric = with(kMinimal, "\"maps\": [[[\"z1\"]]]", "\"maps\": [[[\"z1\"]]], \"metrics\": [[[\"1 + z1*zbar1\"]], [[\"1\"]]]");
  CHECK(problems(metric).empty());
}

TEST_CASE("foliation constraints") {
  const std::string fol = R"({
    "version": 1, "n": 2, "mode": "foliation", "domain": {"half_width": 1.25},
    "vector_fields": [["z1", "2*z2"]],
    "phi": ["e2"],
    "tests": [{"name": "bump", "center": [0, 0], "radius": 1.0}]
  })";
  CHECK(problems(fol).empty());
  // Conjugates in a vector field.
  CHECK(problems(with(fol, "\"2*z2\"", "\"zbar1\"")).find("vector_fields[0][1]") != std::string::npos);
  // Nontrivial D_0 without the torsion-free flag.
  const std::string conn = with(fol, "\"vector_fields\"",
                                "\"complex\": {\"connections\": [[[\"z1*dz1\", \"0\"], [\"0\", \"0\"]], [[\"0\"]]]}, \"vector_fields\"");
  CHECK(problems(conn).find("torsion-free") != std::string::npos);
  CHECK(problems(with(conn, "[[\"0\"]]]}", "[[\"0\"]]], \"torsion_free\": true}")).empty());
  // E_0 must be the tangent bundle.
  const std::string rank = R"({
    "version": 1, "n": 2, "mode": "foliation",
    "complex": {"ranks": [1, 1], "maps": [[["z1"]]]},
    "phi": ["e2"],
    "tests": [{"name": "bump", "center": [0, 0], "radius": 0.8}]
  })";
  CHECK(problems(rank).find("E_0 = TM") != std::string::npos);
  // Degree gate: e1 is below the Bott bound for a foliation by curves.
  CHECK(problems(with(fol, "[\"e2\"]", "[\"e1\"]")).find("phi[0]") != std::string::npos);
}

TEST_CASE("test forms must sit inside the domain and match expected degrees") {
  CHECK(problems(with(kMinimal, "\"radius\": 0.8", "\"radius\": 1.0")).find("strictly inside") != std::string::npos);
  const std::string exp = with(kMinimal, "\"tests\"", "\"expected\": [{\"phi\": \"e1\", \"test\": \"nope\", \"value\": 1, \"tolerance\": 0.1}], \"tests\"");
  CHECK(problems(exp).find("does not name a test form") != std::string::npos);
}

TEST_CASE("padded resolutions are validated") {
  std::string text;
  {
    const Scenario s = load_scenario(fixture("padded-point-1d"));
    text = s.canonical.dump();
  }
  // A gluing that does not commute with the maps.
  const std::string bad = with(text, "[[[\"z1\"]],[[\"1\"]]]", "[[[\"1\"]],[[\"1\"]]]");
  CHECK(problems(bad).find("resolution") != std::string::npos);
}

TEST_CASE("translate moves a zero to the origin") {
  const Polynomial p = parse_polynomial("z1^2 - z1 + zbar2", 2);
  const Polynomial q = translate(p, {1.0, cplx(0.0, 1.0)});
  for (const std::vector<cplx>& z : {std::vector<cplx>{0.3, 0.1}, std::vector<cplx>{cplx(-0.2, 0.4), 0.7}}) {
    const std::vector<cplx> shifted = {z[0] + 1.0, z[1] + cplx(0.0, 1.0)};
    CHECK(std::abs(q(z) - p(shifted)) < 1e-14);
  }
}

TEST_CASE("verification reports are deterministic and honest") {
  const Scenario s = load_scenario(fixture("three-box-1d"));
  RunOptions o;
  o.seed = 5;
  const auto a = verify_scenario(s, "all", o), b = verify_scenario(s, "all", o);
  CHECK(a.dump() == b.dump());
  CHECK(report_passed(a));
  // A scale that makes every positive tolerance tiny fails checks with a
  // nonzero defect.
  o.tolerance_scale = 1e-30;
  const auto c = verify_scenario(s, "cech", o);
  CHECK(!report_passed(c));
  CHECK_THROWS_AS(verify_scenario(s, "nonsense", o), ValidationError);
}

TEST_CASE("run report of the point sheaf") {
  const Scenario s = load_scenario(fixture("point-sheaf-1d"));
  RunOptions o = quick();
  const auto r = run_scenario(s, o);
  CHECK(report_passed(r));
  REQUIRE(r["residues"].size() == 2);
  const auto& bump = r["residues"][0];
  CHECK(bump["test"] == "bump");
  CHECK(std::abs(bump["estimate"]["limit"]["re"].get<double>() - 1.0) < 0.02);
  CHECK(r["cycle"].size() == 2);
  const std::string csv = ladder_csv(r);
  CHECK(csv.rfind("phi,test,cutoff,eps,re,im,quadrature_error\n", 0) == 0);
  // Two tests, two cutoffs, four rungs.
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 * 2 * 4);
  // Deterministic across thread counts.
  o.threads = 1;
  const auto one = run_scenario(s, o);
  o.threads = 3;
  CHECK(run_scenario(s, o)["residues"].dump() == one["residues"].dump());
}
