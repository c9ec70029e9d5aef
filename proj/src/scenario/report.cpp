#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "chernres/scenario.hpp"

namespace chernres {

using ojson = nlohmann::ordered_json;

namespace {

ojson cjson(cplx c) { return {{"re", c.real()}, {"im", c.imag()}}; }

ojson point_json(const std::vector<cplx>& z) {
  ojson a = ojson::array();
  for (cplx c : z) a.push_back(cjson(c));
  return a;
}

ojson estimate_json(const CurrentEstimate& e, CutoffKind kind) {
  ojson o;
  o["cutoff"] = cutoff_name(kind);
  o["limit"] = cjson(e.limit);
  o["error"] = e.error;
  o["exponent"] = e.exponent;
  o["residual"] = e.residual;
  o["fit_ok"] = e.fit_ok;
  o["flagged"] = e.flagged;
  if (!e.note.empty()) o["note"] = e.note;
  ojson l = ojson::array();
  for (std::size_t k = 0; k < e.eps.size(); ++k)
    l.push_back({{"eps", e.eps[k]}, {"value", cjson(e.pairings[k])}, {"quadrature_error", k < e.quad_errors.size() ? e.quad_errors[k] : 0.0}});
  o["ladder"] = l;
  return o;
}

ojson check_json(const std::string& name, double defect, double tolerance) {
  return {{"name", name}, {"defect", defect}, {"tolerance", tolerance}, {"pass", std::isfinite(defect) && defect <= tolerance}};
}

// Scenario with the command-line overrides applied.
struct Effective {
  RegularizedSetup setup;
  std::optional<RegularizedSetup> comparison;
  ResidueOptions options;
};

Effective effective(const Scenario& s, const RunOptions& opt) {
  Effective e{s.setup, s.comparison, s.options};
  if (!opt.ladder.empty()) {
    e.options.ladder.eps = opt.ladder;
    e.options.ladder.validate();
  }
  if (opt.cutoff) {
    e.setup.regulator.kind = *opt.cutoff;
    if (e.comparison) e.comparison->regulator.kind = *opt.cutoff;
  }
  e.options.quad.threads = opt.threads;
  if (!(opt.tolerance_scale > 0.0)) throw ValidationError("tolerance scale must be positive");
  return e;
}

ojson settings_json(const Scenario& s, const Effective& e, const RunOptions& opt) {
  ojson o;
  o["seed"] = opt.seed;
  o["tolerance_scale"] = opt.tolerance_scale;
  o["cutoff"] = cutoff_name(e.setup.regulator.kind);
  o["tau0"] = e.setup.regulator.tau0;
  o["tau1"] = e.setup.regulator.tau1;
  o["ladder"] = e.options.ladder.eps;
  o["chi_check"] = e.options.chi_check;
  o["quadrature"] = s.canonical.contains("quadrature") ? s.canonical["quadrature"] : ojson::object();
  return o;
}

ojson header(const Scenario& s, const char* kind) {
  ojson r;
  r["version"] = kReportVersion;
  r["kind"] = kind;
  r["scenario"] = s.name;
  r["n"] = s.n;
  r["mode"] = s.mode == TildeKind::Foliation ? "foliation" : "sheaf";
  return r;
}

const TestForm& find_test(const Scenario& s, const std::string& name) {
  for (auto& t : s.tests)
    if (t.name == name) return t;
  throw ValidationError("unknown test form '" + name + "'");
}

// Value of the bump factor of a test form at z: 1 inside the plateau, 0 off
// the support, -1 in between.
int bump_region(const TestForm& t, const std::vector<cplx>& z) {
  int r = 1;
  for (auto& b : t.bumps) {
    double d2 = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k) d2 += std::norm(z[k] - b.center[k]);
    const double d = std::sqrt(d2);
    if (d >= b.radius) return 0;
    if (d > b.inner * b.radius) r = -1;
  }
  return r;
}

// Grothendieck residues of the vector field at the oracle centers.
std::vector<cplx> oracle_values(const Scenario& s, const SymmetricPolynomial& Phi) {
  std::vector<cplx> out;
  for (auto& c : s.oracle_centers) {
    std::vector<Polynomial> v;
    for (auto& comp : s.vector_fields.front()) v.push_back(translate(comp, c));
    out.push_back(grothendieck_oracle(v, Phi, s.oracle_radius));
  }
  return out;
}

bool oracle_applies(const Scenario& s, const SymmetricPolynomial& Phi) {
  return s.mode == TildeKind::Foliation && s.vector_fields.size() == 1 && Phi.degree() == s.n;
}

int cycle_codim(const CycleSpec& c) {
  int p = -1;
  for (auto& comp : c.components) {
    const int q = static_cast<int>(comp.fixed.size());
    if (p >= 0 && q != p) throw ValidationError("cycle components must share one codimension");
    p = q;
  }
  return p;
}

std::mt19937_64 sampler(const Scenario& s, const RunOptions& opt) {
  std::seed_seq seq{s.verify_seed, opt.seed};
  return std::mt19937_64(seq);
}

// Points where chi_eps = 1 at eps = 1e-2, i.e. well away from the singular set.
std::vector<Point> regular_points(const RegularizedSetup& st, int count, std::mt19937_64& rng) {
  std::vector<Point> out;
  for (int tries = 0; tries < 200 * count && static_cast<int>(out.size()) < count; ++tries) {
    Point pt{st.cover.sample(st.cover.domain(), rng), {}};
    if (st.chi(1e-2, pt, 0).value().real() >= 1.0 - 1e-12) out.push_back(pt);
  }
  return out;
}

std::vector<Point> domain_points(const RegularizedSetup& st, int count, std::mt19937_64& rng) {
  std::vector<Point> out;
  for (int k = 0; k < count; ++k) out.push_back(Point{st.cover.sample(st.cover.domain(), rng), {}});
  return out;
}

cplx rand_c(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return {u(rng), u(rng)};
}

Polynomial random_poly(std::mt19937_64& rng, int n) {
  Polynomial p(n);
  std::uniform_int_distribution<int> var(0, 2 * n - 1), len(0, 2);
  for (int k = 0; k < 3; ++k) {
    std::vector<int> e(static_cast<std::size_t>(2 * n), 0);
    for (int i = len(rng); i > 0; --i) ++e[static_cast<std::size_t>(var(rng))];
    p.add_term(e, rand_c(rng));
  }
  return p;
}

GradedForm random_form(std::mt19937_64& rng, int n, int p) {
  GradedForm g(n, p);
  std::uniform_int_distribution<unsigned> mask(0, (1u << (2 * n + p)) - 1);
  for (int k = 0; k < 3; ++k) {
    ScalarField f = ScalarField::polynomial(random_poly(rng, n));
    for (int j = 0; j < p; ++j)
      if (rng() % 2) f = f * ScalarField::simplex_coord(j);
    g.add(mask(rng), f);
  }
  return g;
}

// Worst d^2 and graded Leibniz defects on random forms over chart x simplex.
std::pair<double, double> exterior_laws(int n, int trials, std::mt19937_64& rng) {
  double dd = 0.0, leibniz = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    const int p = trial % 3;
    const GradedForm a = random_form(rng, n, p), b = random_form(rng, n, p);
    Point pt;
    for (int i = 0; i < n; ++i) pt.z.push_back(rand_c(rng));
    std::uniform_real_distribution<double> u(0.0, 1.0 / (p + 1));
    for (int j = 0; j < p; ++j) pt.t.push_back(u(rng));
    dd = std::max(dd, a.d().d().eval(pt, 0).max_abs());
    FormJet rhs(n, p);
    for (int deg = 0; deg <= 2 * n + p; ++deg) {
      GradedForm ad(n, p);
      for (auto& [m, f] : a.terms())
        if (mask_degree(m) == deg) ad.add(m, f);
      rhs += wedge(ad.d(), b).eval(pt, 0);
      rhs += (deg % 2 ? -1.0 : 1.0) * wedge(ad, b.d()).eval(pt, 0);
    }
    leibniz = std::max(leibniz, (wedge(a, b).d().eval(pt, 0) - rhs).max_abs());
  }
  return {dd, leibniz};
}

// (a b)(beta) = a(b(beta)) for form-valued maps E_0 -> E_1 -> E_2.
double super_sign_law(int n, int trials, std::mt19937_64& rng) {
  const JetSpace& sp = JetSpace::get(n, 0);
  const auto rand_mat = [&](std::size_t r, std::size_t c) {
    FormMatrix m(r, c, n, 0);
    std::uniform_int_distribution<unsigned> mask(0, (1u << (2 * n)) - 1);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j)
        for (int k = 0; k < 3; ++k) m(i, j).add(mask(rng), Jet::constant(sp, 0, rand_c(rng)));
    return m;
  };
  double worst = 0.0;
  for (int k = 0; k < trials; ++k) {
    const EndForm a{2, 1, rand_mat(2, 3)}, b{1, 0, rand_mat(3, 2)};
    const FormMatrix beta = rand_mat(2, 1);
    worst = std::max(worst, (super_apply(super_compose(a, b), beta, 0) - super_apply(a, super_apply(b, beta, 0), 1)).max_abs());
  }
  return worst;
}

// phi sigma phi = phi, sigma phi sigma = sigma, sigma_(k+1) sigma_k = 0,
// relative to the sizes involved.
double minimal_inverse_defect(const BundleComplex::At& at, double threshold) {
  const auto sigma = minimal_inverses(at, threshold);
  double worst = 0.0;
  for (std::size_t k = 1; k < at.phi.size(); ++k) {
    const JetMatrix& phi = at.phi[k];
    const JetMatrix& sg = sigma[k];
    const double a = std::max(1.0, phi.max_abs()), b = std::max(1.0, sg.max_abs());
    worst = std::max(worst, (phi * sg * phi - phi).max_abs() / (a * a * b));
    worst = std::max(worst, (sg * phi * sg - sg).max_abs() / (a * b * b));
    if (k + 1 < at.phi.size()) worst = std::max(worst, (sigma[k + 1] * sg).max_abs() / (b * b));
  }
  return worst;
}

}  // namespace

ojson run_scenario(const Scenario& s, const RunOptions& opt) {
  const Effective e = effective(s, opt);
  const double scale = opt.tolerance_scale;
  ojson r = header(s, "run");
  r["settings"] = settings_json(s, e, opt);
  ojson residues = ojson::array(), checks = ojson::array();
  // est[k][t]: estimate of phi k against test t, when the degrees match.
  std::vector<std::vector<std::optional<CurrentEstimate>>> est(s.phi.size(), std::vector<std::optional<CurrentEstimate>>(s.tests.size()));
  for (std::size_t k = 0; k < s.phi.size(); ++k) {
    std::vector<TestForm> tests;
    std::vector<std::size_t> index;
    for (std::size_t t = 0; t < s.tests.size(); ++t)
      if (s.tests[t].degree(s.n) == 2 * (s.n - s.phi[k].degree())) {
        tests.push_back(s.tests[t]);
        index.push_back(t);
      }
    const auto results = residue_current(e.setup, s.phi[k], tests, e.options);
    for (std::size_t j = 0; j < results.size(); ++j) {
      const ResidueResult& res = results[j];
      ojson o;
      o["phi"] = s.phi_text[k];
      o["test"] = res.test.name;
      o["estimate"] = estimate_json(res.estimate, e.setup.regulator.kind);
      if (e.options.chi_check) {
        o["alternate"] = estimate_json(res.alternate, e.setup.regulator.kind == CutoffKind::ExpStep ? CutoffKind::LogStep : CutoffKind::ExpStep);
        o["chi_independent"] = res.chi_independent;
        const double gap = std::abs(res.estimate.limit - res.alternate.limit);
        const double tol = (res.estimate.error + res.alternate.error + 1e-8) * scale;
        checks.push_back(check_json("chi independence " + s.phi_text[k] + " / " + res.test.name, gap, tol));
      }
      residues.push_back(o);
      est[k][index[j]] = res.estimate;
    }
  }
  r["residues"] = residues;

  // Fundamental cycle: R^{e_p} = (-1)^(p-1) (p-1)! [G].
  if (s.cycle) {
    ojson cyc = ojson::array();
    const int p = cycle_codim(*s.cycle);
    const std::string ep = SymmetricPolynomial::elementary(p).to_string();
    for (std::size_t t = 0; t < s.tests.size(); ++t) {
      const TestForm& test = s.tests[t];
      if (test.degree(s.n) != 2 * (s.n - p)) continue;
      CycleCheck c;
      bool reused = false;
      for (std::size_t k = 0; k < s.phi.size() && !reused; ++k)
        if (s.phi[k].to_string() == ep && est[k][t]) {
          double coeff = (p - 1) % 2 ? -1.0 : 1.0;
          for (int j = 2; j < p; ++j) coeff *= j;
          c.residue = *est[k][t];
          c.expected = coeff * cycle_pairing(*s.cycle, test, s.n, e.setup.cover.domain());
          c.relative_error = std::abs(c.residue.limit - c.expected) / std::max(std::abs(c.expected), 1e-300);
          reused = true;
        }
      if (!reused) c = fundamental_cycle_check(e.setup, p, *s.cycle, test, e.options);
      const double tol = 2e-2 * scale;
      cyc.push_back({{"phi", ep},
                     {"test", test.name},
                     {"residue", cjson(c.residue.limit)},
                     {"error", c.residue.error},
                     {"expected", cjson(c.expected)},
                     {"relative_error", c.relative_error},
                     {"tolerance", tol},
                     {"pass", c.relative_error <= tol}});
      checks.push_back(check_json("fundamental cycle " + ep + " / " + test.name, c.relative_error, tol));
    }
    r["cycle"] = cyc;
  }

  // Localization: pairings against a test form add up over the components.
  if (!s.components.empty()) {
    ojson loc = ojson::array();
    for (std::size_t k = 0; k < s.phi.size(); ++k)
      for (std::size_t t = 0; t < s.tests.size(); ++t) {
        if (!est[k][t]) continue;
        ojson parts = ojson::array();
        cplx sum = 0.0;
        for (std::size_t c = 0; c < s.components.size(); ++c) {
          const CurrentEstimate pe = residue_ladder(e.setup, s.phi[k], localize(s.tests[t], s.components, c), e.options);
          sum += pe.limit;
          parts.push_back({{"center", point_json(s.components[c].center)}, {"limit", cjson(pe.limit)}, {"error", pe.error}});
        }
        const cplx whole = est[k][t]->limit;
        const double gap = std::abs(sum - whole), tol = 2e-2 * std::max(1.0, std::abs(whole)) * scale;
        loc.push_back({{"phi", s.phi_text[k]}, {"test", s.tests[t].name}, {"components", parts}, {"sum", cjson(sum)}, {"whole", cjson(whole)},
                       {"defect", gap}, {"tolerance", tol}, {"pass", gap <= tol}});
        checks.push_back(check_json("localization " + s.phi_text[k] + " / " + s.tests[t].name, gap, tol));
      }
    r["localization"] = loc;
  }

  // Comparison: R_2 - R_1 = dN, checked against test forms.
  if (e.comparison) {
    ojson cmp = ojson::array();
    for (std::size_t k = 0; k < s.phi.size(); ++k)
      for (auto& test : s.tests) {
        if (test.degree(s.n) != 2 * (s.n - s.phi[k].degree())) continue;
        const ComparisonResult c = comparison_current(e.setup, *e.comparison, s.phi[k], test, e.options, s.comparison_mixed);
        const double gap = std::abs(c.difference.limit - c.transgression.limit);
        const double tol = 2e-2 * std::max(1.0, std::abs(c.difference.limit)) * scale, itol = 1e-7 * scale;
        cmp.push_back({{"phi", s.phi_text[k]},
                       {"test", test.name},
                       {"difference", estimate_json(c.difference, e.setup.regulator.kind)},
                       {"transgression", estimate_json(c.transgression, e.setup.regulator.kind)},
                       {"defect", gap},
                       {"tolerance", tol},
                       {"identity_defect", c.identity_defect},
                       {"identity_eps", c.identity_eps},
                       {"identity_tolerance", itol},
                       {"pass", gap <= tol && c.identity_defect <= itol}});
        checks.push_back(check_json("transgression pairing " + s.phi_text[k] + " / " + test.name, gap, tol));
        checks.push_back(check_json("transgression identity " + s.phi_text[k], c.identity_defect, itol));
      }
    r["comparison"] = cmp;
  }

  // Isolated singularities: the current against a bump equal to 1 near the
  // enclosed zeros is their total Grothendieck residue.
  ojson orc = ojson::array();
  for (std::size_t k = 0; k < s.phi.size(); ++k) {
    if (!oracle_applies(s, s.phi[k])) continue;
    const std::vector<cplx> vals = oracle_values(s, s.phi[k]);
    for (std::size_t t = 0; t < s.tests.size(); ++t) {
      if (!est[k][t]) continue;
      cplx total = 0.0;
      bool clean = true;
      for (std::size_t c = 0; c < vals.size(); ++c) {
        const int where = bump_region(s.tests[t], s.oracle_centers[c]);
        if (where < 0) clean = false;
        if (where > 0) total += vals[c];
      }
      if (!clean) continue;
      const double gap = std::abs(est[k][t]->limit - total), tol = 2e-2 * std::max(1.0, std::abs(total)) * scale;
      orc.push_back({{"phi", s.phi_text[k]}, {"test", s.tests[t].name}, {"oracle", cjson(total)}, {"residue", cjson(est[k][t]->limit)},
                     {"defect", gap}, {"tolerance", tol}, {"pass", gap <= tol}});
      checks.push_back(check_json("oracle " + s.phi_text[k] + " / " + s.tests[t].name, gap, tol));
    }
  }
  if (!orc.empty()) r["oracle"] = orc;

  ojson exp = ojson::array();
  for (auto& x : s.expected) {
    std::size_t k = 0, t = 0;
    while (s.phi_text[k] != x.phi) ++k;
    while (s.tests[t].name != x.test) ++t;
    const cplx got = est[k][t]->limit;
    const double tol = x.tolerance * (x.relative ? std::abs(x.value) : 1.0) * scale;
    const double gap = std::abs(got - x.value);
    exp.push_back({{"phi", x.phi}, {"test", x.test}, {"value", cjson(x.value)}, {"got", cjson(got)}, {"defect", gap}, {"tolerance", tol},
                   {"source", x.source}, {"pass", gap <= tol}});
    checks.push_back(check_json("expected " + x.phi + " / " + x.test, gap, tol));
  }
  r["expected"] = exp;
  r["checks"] = checks;
  r["passed"] = std::all_of(checks.begin(), checks.end(), [](const ojson& c) { return c["pass"].get<bool>(); });
  return r;
}

ojson verify_scenario(const Scenario& s, const std::string& suite, const RunOptions& opt) {
  static const std::vector<std::string> suites = {"algebra", "cech", "connections", "vanishing", "transgression"};
  if (suite != "all" && std::find(suites.begin(), suites.end(), suite) == suites.end())
    throw ValidationError("unknown suite '" + suite + "'; expected algebra, cech, connections, vanishing, transgression or all");
  const Effective e = effective(s, opt);
  const RegularizedSetup& st = e.setup;
  const double scale = opt.tolerance_scale;
  const int n = s.n, samples = s.verify_samples;
  const JetSpace& sp = JetSpace::get(n, 0);
  const double eps0 = e.options.ladder.eps.front();
  const auto want = [&](const char* name) { return suite == "all" || suite == name; };

  ojson r = header(s, "verify");
  r["suite"] = suite;
  r["seed"] = opt.seed;
  r["eps"] = eps0;
  ojson checks = ojson::array();

  if (want("algebra")) {
    double nc = 0.0;
    for (int a = 0; a < st.res.size(); ++a) nc = std::max(nc, st.res.chart(a).is_complex() ? 0.0 : 1.0);
    checks.push_back(check_json("algebra: phi_k phi_(k+1) = 0", nc, 0.0));
    std::mt19937_64 rng = sampler(s, opt);
    const auto [dd, leibniz] = exterior_laws(n, 3 * samples, rng);
    checks.push_back(check_json("algebra: d^2 = 0", dd, 1e-10 * scale));
    checks.push_back(check_json("algebra: graded Leibniz rule", leibniz, 1e-10 * scale));
    checks.push_back(check_json("algebra: super composition sign law", super_sign_law(n, samples, rng), 1e-12 * scale));
    double compat = 0.0, interp = 0.0, minv = 0.0;
    for (const Point& pt : regular_points(st, samples, rng)) {
      const int a = st.cover.charts_at(pt.z).front();
      try {
        const BundleComplex::At at = st.res.chart(a).eval(pt, sp, 2);
        minv = std::max(minv, minimal_inverse_defect(at, st.threshold));
        compat = std::max(compat, compatibility_defect(at, st.theta_tilde(a, pt, 1), n, 0));
        for (auto& Phi : s.phi)
          interp = std::max(interp, interpolation_identity_defect({st.theta(a, pt, 2), st.theta_hat(a, eps0, pt, 2), st.theta_tilde(a, pt, 2)}, Phi, n));
      } catch (const SingularPoint&) {
      }
    }
    checks.push_back(check_json("algebra: minimal inverse identities", minv, 1e-12 * scale));
    checks.push_back(check_json("algebra: compatible connection off the singular set", compat, 1e-9 * scale));
    checks.push_back(check_json("algebra: interpolation identity", interp, 1e-9 * scale));
  }

  if (want("cech")) {
    const CechSetup cs = st.at(eps0);
    const int max_p = std::min(2, s.max_nerve_dim);
    for (std::size_t k = 0; k < s.phi.size(); ++k) {
      std::mt19937_64 rng = sampler(s, opt);
      const Cochain cphi = check_phi(cs, s.phi[k]).memoized();
      SampleOptions so;
      so.samples = std::max(1, samples / 4);
      so.seed = opt.seed;
      so.max_p = max_p;
      checks.push_back(check_json("cech: check Phi is a cocycle, " + s.phi_text[k], max_entry(nabla(cphi), st.cover, so), 1e-8 * scale));
      const GlobalForm g = global_phi(cs, s.phi[k]);
      double closed = 0.0, bideg = 0.0;
      for (const Point& pt : domain_points(st, samples, rng)) closed = std::max(closed, g(pt, 1).d().truncated(0).max_abs());
      const int l = s.phi[k].degree();
      for (const Tuple& t : st.cover.nerve(std::min(max_p, l))) {
        const Point pt{st.cover.sample(st.cover.intersection(t), rng), {}};
        bideg = std::max(bideg, bidegree_excess(cphi(t, pt, 0), n, l, static_cast<int>(t.size()) - 1));
      }
      checks.push_back(check_json("cech: Phi(D) is closed, " + s.phi_text[k], closed, 1e-8 * scale));
      checks.push_back(check_json("cech: bidegree of (1,0) entries, " + s.phi_text[k], bideg, 1e-10 * scale));
      // nabla h + h nabla = rho2 - rho1 for the two projections of U x U.
      const Cover uu = Cover::product(st.cover, st.cover);
      const Refinement r1 = product_projection(st.cover, st.cover, 1), r2 = product_projection(st.cover, st.cover, 2);
      const Cochain lhs = nabla(homotopy_h(cphi, r1, r2)) + homotopy_h(nabla(cphi), r1, r2);
      const Cochain rhs = refine(cphi, r2) - refine(cphi, r1);
      SampleOptions ho = so;
      ho.max_p = std::min(1, max_p);
      ojson hc = check_json("cech: homotopy identity, " + s.phi_text[k], max_entry(lhs - rhs, uu, ho), 1e-10 * scale);
      hc["reference"] = max_entry(rhs, uu, ho);  // size of rho2 - rho1, to show the check is not vacuous
      checks.push_back(hc);
    }
  }

  if (want("connections")) {
    double t10 = 0.0;
    for (auto& c : st.connections) t10 = std::max(t10, c.is_10(n) ? 0.0 : 1.0);
    checks.push_back(check_json("connections: reference connections of type (1,0)", t10, 0.0));
    std::mt19937_64 rng = sampler(s, opt);
    const CechSetup cs = st.at(eps0);
    double face = 0.0;
    for (const Tuple& t : st.cover.nerve(std::min(2, s.max_nerve_dim))) {
      if (t.size() < 2) continue;
      const Point pt{st.cover.sample(st.cover.intersection(t), rng), {}};
      face = std::max(face, face_consistency_defect(cs, t, pt, 0));
    }
    checks.push_back(check_json("connections: transported connections agree on faces", face, 1e-9 * scale));
    if (s.mode == TildeKind::Foliation) {
      double tf = 0.0;
      for (auto& c : st.connections)
        if (!c.theta(0).is_zero() && !c.torsion_free_flag()) tf = 1.0;
      checks.push_back(check_json("connections: torsion-free D_0", tf, 0.0));
      // u = f * generator, v a fixed polynomial field.
      std::vector<Polynomial> v;
      for (int i = 0; i < n; ++i) v.push_back(Polynomial::z(n, (i + 1) % n) + Polynomial::constant(n, 0.5 * (i + 1)));
      const Polynomial f = Polynomial::constant(n, 1.0) + Polynomial::z(n, 0);
      double basic = 0.0;
      for (const Point& pt : regular_points(st, samples, rng)) {
        const int a = st.cover.charts_at(pt.z).front();
        try {
          for (int g = 0; g < st.res.chart(a).rank(1); ++g)
            basic = std::max(basic, basic_defect(st.res.chart(a), st.theta_tilde(a, pt, 3), pt, f, g, v, st.threshold));
        } catch (const SingularPoint&) {
        }
      }
      checks.push_back(check_json("connections: corrected connection is basic", basic, 1e-9 * scale));
    }
  }

  if (want("vanishing")) {
    for (std::size_t k = 0; k < s.phi.size(); ++k) {
      std::mt19937_64 rng = sampler(s, opt);
      const std::vector<Point> pts = regular_points(st, samples, rng);
      const BottProbe b = bott_vanishing_probe(st, s.phi[k], pts, e.comparison ? &*e.comparison : nullptr);
      checks.push_back(check_json("vanishing: Phi of the compatible connection, " + s.phi_text[k], b.single, 1e-8 * scale));
      if (e.comparison)
        checks.push_back(check_json("vanishing: interpolated compatible connections, " + s.phi_text[k], b.interpolated, 1e-8 * scale));
    }
  }

  if (want("transgression")) {
    if (!e.comparison) {
      ojson c = {{"name", "transgression: d eta = Phi(D_2) - Phi(D_1)"}, {"skipped", "scenario has no comparison"}, {"pass", true}};
      checks.push_back(c);
    } else {
      for (std::size_t k = 0; k < s.phi.size(); ++k) {
        const double d = transgression_defect(st, *e.comparison, s.phi[k], eps0, s.comparison_mixed, samples, opt.seed);
        checks.push_back(check_json("transgression: d eta = Phi(D_2) - Phi(D_1), " + s.phi_text[k], d, 1e-7 * scale));
      }
    }
  }

  r["checks"] = checks;
  r["passed"] = std::all_of(checks.begin(), checks.end(), [](const ojson& c) { return c["pass"].get<bool>(); });
  return r;
}

ojson oracle_report(const Scenario& s, const RunOptions& opt) {
  const Effective e = effective(s, opt);
  ojson r = header(s, "oracle");
  ojson entries = ojson::array();
  for (std::size_t k = 0; k < s.phi.size(); ++k) {
    if (!oracle_applies(s, s.phi[k])) continue;
    const std::vector<cplx> vals = oracle_values(s, s.phi[k]);
    for (std::size_t c = 0; c < vals.size(); ++c)
      entries.push_back({{"phi", s.phi_text[k]}, {"center", point_json(s.oracle_centers[c])}, {"radius", s.oracle_radius}, {"value", cjson(vals[c])}});
  }
  if (s.cycle) {
    const int p = cycle_codim(*s.cycle);
    double coeff = (p - 1) % 2 ? -1.0 : 1.0;
    for (int j = 2; j < p; ++j) coeff *= j;
    for (auto& t : s.tests) {
      if (t.degree(s.n) != 2 * (s.n - p)) continue;
      entries.push_back({{"phi", SymmetricPolynomial::elementary(p).to_string()},
                         {"test", t.name},
                         {"value", cjson(coeff * cycle_pairing(*s.cycle, t, s.n, e.setup.cover.domain()))}});
    }
  }
  for (auto& x : s.expected) {
    (void)find_test(s, x.test);
    entries.push_back({{"phi", x.phi}, {"test", x.test}, {"value", cjson(x.value)}, {"source", x.source}});
  }
  r["values"] = entries;
  r["passed"] = true;
  return r;
}

std::string ladder_csv(const ojson& report) {
  std::ostringstream os;
  os.precision(17);
  os << "phi,test,cutoff,eps,re,im,quadrature_error\n";
  if (!report.contains("residues")) return os.str();
  for (auto& res : report["residues"])
    for (const char* which : {"estimate", "alternate"}) {
      if (!res.contains(which)) continue;
      const ojson& est = res[which];
      for (auto& row : est["ladder"])
        os << '"' << res["phi"].get<std::string>() << "\"," << '"' << res["test"].get<std::string>() << "\"," << est["cutoff"].get<std::string>() << ','
           << row["eps"].get<double>() << ',' << row["value"]["re"].get<double>() << ',' << row["value"]["im"].get<double>() << ','
           << row["quadrature_error"].get<double>() << '\n';
    }
  return os.str();
}

bool report_passed(const ojson& report) { return report.contains("passed") && report["passed"].is_boolean() && report["passed"].get<bool>(); }

}  // namespace chernres
