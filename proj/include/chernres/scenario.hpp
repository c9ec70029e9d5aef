#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "chernres/residues.hpp"

namespace chernres {

inline constexpr int kScenarioVersion = 1;
inline constexpr int kReportVersion = 1;

// Collected problems of a scenario file; what() lists all of them.
class ScenarioError : public ValidationError {
 public:
  explicit ScenarioError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

struct ExpectedValue {
  std::string phi;
  std::string test;
  cplx value;
  double tolerance = 0.0;
  bool relative = false;
  std::string source;
};

struct Scenario {
  std::string name;
  std::string description;
  int n = 1;
  TildeKind mode = TildeKind::Sheaf;
  int max_nerve_dim = 2;
  RegularizedSetup setup;
  std::optional<RegularizedSetup> comparison;
  std::vector<EdgeIso> comparison_mixed;
  std::vector<std::string> phi_text;
  std::vector<SymmetricPolynomial> phi;
  ResidueOptions options;
  std::vector<TestForm> tests;
  std::optional<CycleSpec> cycle;
  std::vector<Bump> components;
  // Vector field generators (foliation mode), one per column of phi_1.
  std::vector<std::vector<Polynomial>> vector_fields;
  double oracle_radius = 0.5;
  std::vector<std::vector<cplx>> oracle_centers;
  std::vector<ExpectedValue> expected;
  int verify_samples = 12;
  unsigned verify_seed = 1;
  // Normalized document with defaults filled in; parsing it again gives the
  // same document.
  nlohmann::ordered_json canonical;
};

// Throws ScenarioError with every problem found.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

struct RunOptions {
  unsigned seed = 1;
  int threads = 0;
  double tolerance_scale = 1.0;
  std::vector<double> ladder;        // overrides the scenario ladder when set
  std::optional<CutoffKind> cutoff;  // overrides the scenario cutoff when set
};

// Thread count from CHERNRES_THREADS, or 0 (all cores).
int default_threads();

nlohmann::ordered_json run_scenario(const Scenario& s, const RunOptions& opt);
// suite is one of algebra, cech, connections, vanishing, transgression, all.
nlohmann::ordered_json verify_scenario(const Scenario& s, const std::string& suite, const RunOptions& opt);
nlohmann::ordered_json oracle_report(const Scenario& s, const RunOptions& opt);

// Ladders of a run report: phi,test,cutoff,eps,re,im,quadrature_error.
std::string ladder_csv(const nlohmann::ordered_json& report);
// True when every check and expected value in the report passed.
bool report_passed(const nlohmann::ordered_json& report);

// v(z + c), for moving a zero to the origin.
Polynomial translate(const Polynomial& p, const std::vector<cplx>& c);

}  // namespace chernres
