#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "chernres/regularized.hpp"

namespace chernres {

// Radial plateau bump: 1 on |z - center| <= inner * radius, 0 outside radius.
struct Bump {
  std::vector<cplx> center;
  double radius = 0.5;
  double inner = 0.5;
  Jet eval(const Point& pt, const JetSpace& sp, int order) const;
};

// Compactly supported test form: product of bumps times a polynomial form.
struct TestForm {
  std::vector<Bump> bumps;
  PolyForm form;  // polynomial coefficients per basis mask; empty means 1
  std::string name;

  // Bump times 1 (a 0-form).
  static TestForm bump(int n, std::vector<cplx> center, double radius, double inner = 0.5);
  // Bump times the volume form (i/2)^k dz_j ^ dzbar_j ... of the listed coordinates.
  static TestForm slice(int n, std::vector<cplx> center, double radius, const std::vector<int>& coords, double inner = 0.5);

  int degree(int n) const;
  FormJet eval(int n, const Point& pt, int order) const;
  // d of the test form, for closedness and transgression pairings.
  FormJet d_eval(int n, const Point& pt) const;
  Box support(int n) const;
  TestForm times(const Bump& b) const;
};

struct QuadSettings {
  int nodes = 5;             // Gauss-Legendre nodes per axis and cell
  double initial_cell = 0.25;
  int max_depth = 9;
  double shell_nodes = 8.0;  // nodes across the cutoff transition
  int adapt_rounds = 2;      // error-driven refinement passes
  double abs_tol = 1e-4;
  int threads = 0;           // 0 = hardware concurrency
  bool skip_vanishing = true;  // drop cells where the regularized form vanishes

  // Defaults by complex dimension. The number of shell cells grows like
  // shell_nodes^(2n), so two variables use a coarser shell resolution.
  static QuadSettings for_dim(int n);
};

// Whether the integrand vanishes on a cell.
using RefineFn = std::function<bool(const Box&)>;
// Axes along which a cell must be halved before integrating, as a bit mask;
// 0 keeps the cell.
using SplitFn = std::function<std::uint32_t(const Box&)>;

struct Pairing {
  cplx value;
  double error = 0.0;
  long cells = 0;
  long evaluations = 0;
  bool converged = true;
};

// Integral over `region` of the top-degree part of form ^ test.
Pairing pair(const GlobalForm& form, int form_degree, const std::function<FormJet(const Point&)>& test, int test_degree, int n,
             const Box& region, const QuadSettings& q, const SplitFn& refine = {}, const RefineFn& skip = {});
Pairing pair(const GlobalForm& form, int form_degree, const TestForm& test, int n, const Box& domain, const QuadSettings& q,
             const SplitFn& refine = {}, const RefineFn& skip = {});

// Refinement on the cutoff shell of a regularized setup at eps. Only axes
// along which the cutoff variable changes are split, so a shell around a
// hypersurface is not refined along it.
SplitFn shell_refinement(const RegularizedSetup& s, double eps, const QuadSettings& q);
// True on cells where chi_eps = 1 (only compatible connections remain), or
// where chi_eps = 0 and every chart carries the same trivial connection
// (only when use_reference is set).
RefineFn vanishing_cells(const RegularizedSetup& s, double eps, bool use_reference = true);

struct EpsLadder {
  std::vector<double> eps;
  static EpsLadder geometric(double first = 1e-1, double last = 1e-3, double ratio = 3.1622776601683795);
  void validate() const;
};

// Extrapolated limit P(eps) ~ P0 + c eps^a.
struct CurrentEstimate {
  std::vector<double> eps;
  std::vector<cplx> pairings;
  std::vector<double> quad_errors;
  cplx limit;
  cplx coefficient;
  double exponent = 0.0;
  double residual = 0.0;
  double quad_error = 0.0;
  double error = 0.0;
  bool fit_ok = true;
  bool flagged = false;
  std::string note;
};
CurrentEstimate extrapolate(const std::vector<double>& eps, const std::vector<cplx>& pairings, const std::vector<double>& quad_errors = {});

// Gate on deg Phi: sheaves 1 <= l <= n, foliations n - kappa < l <= n.
void check_degree(const RegularizedSetup& s, const SymmetricPolynomial& Phi);
int foliation_rank(const RegularizedSetup& s);

struct ResidueResult {
  TestForm test;
  CurrentEstimate estimate;
  CurrentEstimate alternate;  // other cutoff family
  bool chi_independent = true;
};

struct ResidueOptions {
  EpsLadder ladder = EpsLadder::geometric();
  QuadSettings quad;
  bool chi_check = true;
};

// Pairings of Phi(D_hat^eps) with each test form over the ladder.
std::vector<ResidueResult> residue_current(const RegularizedSetup& s, const SymmetricPolynomial& Phi, const std::vector<TestForm>& tests,
                                           const ResidueOptions& opt);
CurrentEstimate residue_ladder(const RegularizedSetup& s, const SymmetricPolynomial& Phi, const TestForm& test, const ResidueOptions& opt);

// Test form multiplied by a bump around one component; components are given
// as bumps whose supports must be disjoint.
TestForm localize(const TestForm& test, const std::vector<Bump>& components, std::size_t which);

// Points or coordinate subspaces {z_j = value_j, j in fixed} with multiplicity.
struct CycleComponent {
  std::vector<int> fixed;
  std::vector<cplx> values;
  int multiplicity = 1;
};
struct CycleSpec {
  std::vector<CycleComponent> components;
};
cplx cycle_pairing(const CycleSpec& c, const TestForm& test, int n, const Box& domain, int nodes = 8, double cell = 0.125);

struct CycleCheck {
  CurrentEstimate residue;
  cplx expected;
  double relative_error = 0.0;
};
// R^{e_p} against (-1)^(p-1) (p-1)! [G].
CycleCheck fundamental_cycle_check(const RegularizedSetup& s, int p, const CycleSpec& c, const TestForm& test, const ResidueOptions& opt);

struct ComparisonResult {
  CurrentEstimate transgression;  // <N, d phi>
  CurrentEstimate difference;     // <R_2 - R_1, phi>
  double identity_defect = 0.0;   // max |d eta - (Phi_2 - Phi_1)| at finite eps
  double identity_eps = 0.0;
};
// Pointwise defect of d eta_eps = Phi(D_2) - Phi(D_1) at sampled points.
double transgression_defect(const RegularizedSetup& s1, const RegularizedSetup& s2, const SymmetricPolynomial& Phi, double eps,
                            const std::vector<EdgeIso>& mixed, int samples, unsigned seed);
ComparisonResult comparison_current(const RegularizedSetup& s1, const RegularizedSetup& s2, const SymmetricPolynomial& Phi,
                                    const TestForm& test, const ResidueOptions& opt, const std::vector<EdgeIso>& mixed = {});

// (2 pi i)^-n times the integral over |z_k| = r of Phi(Jv) dz / (v_1 .. v_n).
cplx grothendieck_oracle(const std::vector<Polynomial>& v, const SymmetricPolynomial& Phi, double radius, int nodes = 64);
// Elementary symmetric functions e_0..e_n of the eigenvalues of J.
std::vector<cplx> elementary_symmetric(const std::vector<std::vector<cplx>>& J);

struct BottProbe {
  double single = 0.0;        // max |Phi(D_tilde)| over the points
  double interpolated = 0.0;  // max |pi_* Phi(t D_1 + (1 - t) D_2)|, when a second setup is given
};
BottProbe bott_vanishing_probe(const RegularizedSetup& s, const SymmetricPolynomial& Phi, const std::vector<Point>& points,
                               const RegularizedSetup* other = nullptr);

}  // namespace chernres
