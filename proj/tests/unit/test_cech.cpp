#include <doctest.h>

#include <random>

#include "chernres/cochain.hpp"
#include "test_util.hpp"

using namespace chernres;

namespace {

Box box1(double x0, double x1, double y0, double y1) { return Box{{x0, y0}, {x1, y1}}; }

// Three overlapping boxes covering [-1, 1]^2 in C.
Cover three_boxes() {
  return Cover(1, {box1(-1.2, 0.2, -1.2, 1.2), box1(-0.3, 1.2, -1.2, 0.3), box1(-0.3, 1.2, -0.2, 1.2)}, Box::square(1, 1.0), 0.15);
}

// Deterministic pseudo-random polynomial form for every tuple, Cech degrees lo..hi.
Cochain random_cochain(int n, int lo, int hi, unsigned seed) {
  return Cochain(n, lo, hi, [n, seed](const Tuple& t, const Point& pt, int order) {
    unsigned h = seed;
    for (int a : t) h = h * 1000003u + static_cast<unsigned>(a) + 17u;
    std::mt19937_64 rng(h);
    return testutil::random_form(rng, n, 0, 2).eval(pt, order);
  });
}

// Restriction of one global form.
Cochain global_cochain(const GradedForm& f) {
  return Cochain(f.chart_dim(), 0, 0, [f](const Tuple&, const Point& pt, int order) { return f.eval(pt, order); });
}

SampleOptions opts(int max_p, int samples = 8) {
  SampleOptions o;
  o.max_p = max_p;
  o.samples = samples;
  return o;
}

}  // namespace

TEST_CASE("cover partition of unity") {
  const Cover c = three_boxes();
  c.validate();
  std::mt19937_64 rng(1);
  const JetSpace& sp = JetSpace::get(1, 0);
  for (int s = 0; s < 100; ++s) {
    const Point pt{c.sample(c.domain(), rng), {}};
    Jet sum = Jet::constant(sp, 3, 0.0);
    for (int a = 0; a < c.size(); ++a) {
      const Jet w = c.psi(a, pt, sp, 3);
      if (!c.contains(a, pt.z)) CHECK(w.is_zero());
      sum += w;
    }
    CHECK((sum - Jet::constant(sp, 3, 1.0)).max_abs() < 1e-12);
  }
  CHECK_THROWS_AS(Cover(1, {box1(-1, 0, -1, 1), box1(0.1, 1, -1, 1)}, Box::square(1, 1.0)).validate(), ValidationError);
  // Nerve contains repeated and permuted tuples.
  const auto nerve = c.nerve(1);
  CHECK(std::find(nerve.begin(), nerve.end(), Tuple{1, 1}) != nerve.end());
  CHECK(std::find(nerve.begin(), nerve.end(), Tuple{2, 0}) != nerve.end());
}

TEST_CASE("Cech differential examples") {
  const Cover c = three_boxes();
  std::mt19937_64 rng(2);
  const GradedForm f = testutil::random_form(rng, 1, 0);
  CHECK(max_entry(cech_delta(global_cochain(f)), c, opts(1)) < 1e-14);
  // (delta g)_{ab} = g_b - g_a.
  const Cochain g = random_cochain(1, 0, 0, 5);
  const Point pt{{cplx(0.0, 0.0)}, {}};
  CHECK(testutil::max_diff(cech_delta(g)({0, 1}, pt, 1), g({1}, pt, 1) - g({0}, pt, 1)) < 1e-15);
  CHECK(max_entry(cech_delta(cech_delta(g)), c, opts(2)) < 1e-14);
}

TEST_CASE("total differential squares to zero with the Cech sign") {
  const Cover c = three_boxes();
  const Cochain g = random_cochain(1, 0, 2, 9);
  CHECK(max_entry(nabla(nabla(g)), c, opts(3, 4)) < 1e-10);
  const Point pt{{cplx(0.1, -0.1)}, {}};
  CHECK(testutil::max_diff(exterior_d(g)({0, 2}, pt, 1), -g({0, 2}, pt, 2).d().truncated(1)) < 1e-15);
  std::mt19937_64 rng(3);
  GradedForm closed = testutil::random_form(rng, 1, 0).d();
  CHECK(max_entry(nabla(global_cochain(closed)), c, opts(1)) < 1e-12);
}

TEST_CASE("refinement and homotopy identities") {
  const Cover u = three_boxes();
  // Finer cover: quarters of the three boxes.
  std::vector<Box> fine;
  std::vector<int> r1, r2;
  fine.push_back(box1(-1.2, 0.2, -1.2, 0.1));
  r1.push_back(0), r2.push_back(0);
  fine.push_back(box1(-1.2, 0.2, -0.1, 1.2));
  r1.push_back(0), r2.push_back(0);
  fine.push_back(box1(-0.3, 0.2, -1.2, 0.3));
  r1.push_back(1), r2.push_back(0);
  fine.push_back(box1(-0.3, 1.2, -0.2, 0.3));
  r1.push_back(1), r2.push_back(2);
  fine.push_back(box1(0.1, 1.2, -1.2, 0.0));
  r1.push_back(1), r2.push_back(1);
  fine.push_back(box1(0.1, 1.2, -0.1, 1.2));
  r1.push_back(2), r2.push_back(2);
  const Cover v(1, fine, Box::square(1, 1.0), 0.05);
  const Refinement rho1{r1}, rho2{r2};
  check_refinement(rho1, v, u);
  check_refinement(rho2, v, u);
  CHECK_THROWS_AS(check_refinement(Refinement{{2, 2, 2, 2, 2, 2}}, v, u), ValidationError);

  const Cochain g = random_cochain(1, 0, 2, 21);
  // Refinement commutes with delta.
  CHECK(max_entry(refine(cech_delta(g), rho1) - cech_delta(refine(g, rho1)), v, opts(2, 3)) < 1e-14);
  // Identity refinement.
  Refinement id{{0, 1, 2}};
  CHECK(max_entry(refine(g, id) - g, u, opts(2, 3)) < 1e-15);
  // nabla h + h nabla = rho2 - rho1.
  const Cochain lhs = nabla(homotopy_h(g, rho1, rho2)) + homotopy_h(nabla(g), rho1, rho2);
  CHECK(max_entry(lhs - (refine(g, rho2) - refine(g, rho1)), v, opts(2, 3)) < 1e-10);
  const Cochain same = nabla(homotopy_h(g, rho1, rho1)) + homotopy_h(nabla(g), rho1, rho1);
  CHECK(max_entry(same, v, opts(2, 3)) < 1e-10);
  CHECK(homotopy_h(g.degree_part(0), rho1, rho2).is_zero());
}

TEST_CASE("Psi is a chain map onto global forms") {
  const Cover c = three_boxes();
  std::mt19937_64 rng(4);
  // Restriction of a global form collapses to that form.
  const GradedForm f = testutil::random_form(rng, 1, 0);
  const GlobalForm pf = psi_global(global_cochain(f), c, true);
  for (int s = 0; s < 10; ++s) {
    const Point pt{c.sample(c.domain(), rng), {}};
    CHECK(testutil::max_diff(pf(pt, 1), f.eval(pt, 1)) < 1e-12);
  }
  // d Psi(g) = Psi(nabla g) and Psi' g is delta-closed, for arbitrary g.
  const Cochain g = random_cochain(1, 0, 2, 33).memoized();
  const GlobalForm pg = psi_global(g, c, false);
  const GlobalForm png = psi_global(nabla(g), c, false);
  for (int s = 0; s < 10; ++s) {
    const Point pt{c.sample(c.domain(), rng), {}};
    CHECK(testutil::max_diff(pg(pt, 1).d().truncated(0), png(pt, 0)) < 1e-10);
  }
  CHECK(overlap_mismatch(psi_prime(g, c, false), c, opts(0, 6)) < 1e-10);
  // A cocycle: nabla of a 0-cochain; its Psi is exact, d Psi = 0.
  const Cochain b = random_cochain(1, 0, 0, 44);
  const Cochain cocycle = nabla(b);
  const GlobalForm pc = psi_global(cocycle, c, true);
  const GlobalForm pb = psi_global(b, c, false);
  for (int s = 0; s < 10; ++s) {
    const Point pt{c.sample(c.domain(), rng), {}};
    CHECK(testutil::max_diff(pc(pt, 0), pb(pt, 1).d().truncated(0)) < 1e-10);
  }
}
