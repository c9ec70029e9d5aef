#include <doctest.h>

#include <random>

#include "chernres/simplicial.hpp"
#include "test_util.hpp"

using namespace chernres;

namespace {

Box box2(double x0, double x1, double y0, double y1, double half = 1.2) { return Box{{x0, -half, y0, -half}, {x1, half, y1, half}}; }

// Random matrix of polynomial 1-forms; (1,0) when holo.
FormPolyMatrix random_theta(std::mt19937_64& rng, int n, std::size_t r, bool holo) {
  FormPolyMatrix m{r, r, {}};
  for (std::size_t k = 0; k < r * r; ++k) {
    PolyForm f;
    for (int i = 0; i < n; ++i) {
      f[dz_bit(i)] = testutil::random_poly(rng, n, 2, 2);
      if (!holo) f[dzbar_bit(n, i)] = testutil::random_poly(rng, n, 2, 2);
    }
    m.e.push_back(f);
  }
  return m;
}

VertexTheta fixed_thetas(std::vector<ConnectionFamily> per_chart, int n) {
  return memoize([per_chart, n](int a, const Point& pt, int order) {
    return per_chart[static_cast<std::size_t>(a)].eval(pt, JetSpace::get(n, 0), order, n, 0);
  });
}

std::vector<ConnectionFamily> random_families(std::mt19937_64& rng, int n, int charts, std::size_t r, bool holo) {
  std::vector<ConnectionFamily> out;
  for (int a = 0; a < charts; ++a) out.emplace_back(std::vector<FormPolyMatrix>{random_theta(rng, n, r, holo)});
  return out;
}

// Cover of C^1 by three boxes.
Cover cover1() {
  return Cover(1, {Box{{-1.2, -1.2}, {0.2, 1.2}}, Box{{-0.3, -1.2}, {1.2, 0.3}}, Box{{-0.3, -0.2}, {1.2, 1.2}}}, Box::square(1, 1.0), 0.15);
}

Cover cover1b() { return Cover(1, {Box{{-1.2, -1.2}, {1.2, 0.1}}, Box{{-1.2, -0.1}, {1.2, 1.2}}}, Box::square(1, 1.0), 0.15); }

// Cover of C^2 split along x1 and y1.
Cover cover2() {
  return Cover(2, {box2(-1.2, 0.2, -1.2, 1.2), box2(-0.2, 1.2, -1.2, 0.2), box2(-0.2, 1.2, -0.2, 1.2)}, Box::square(2, 1.0), 0.15);
}

BundleComplex bundle(int n, int r) { return BundleComplex(n, {r}, {}); }

SampleOptions opts(int max_p, int samples, int order = 0) {
  SampleOptions o;
  o.max_p = max_p;
  o.samples = samples;
  o.order = order;
  return o;
}

// O/(z) on a central box and four boxes of an annulus, padded by 1 -> 1 away from 0.
struct PaddedPoint {
  Cover cover;
  std::vector<BundleComplex> charts;
  std::vector<EdgeIso> edges;
};

PaddedPoint padded_point(bool bad_iso) {
  PaddedPoint p;
  p.cover = Cover(1,
                  {Box{{-0.45, -0.45}, {0.45, 0.45}}, Box{{-1.2, -1.2}, {-0.3, 1.2}}, Box{{0.3, -1.2}, {1.2, 1.2}}, Box{{-1.2, -1.2}, {1.2, -0.3}},
                   Box{{-1.2, 0.3}, {1.2, 1.2}}},
                  Box::square(1, 1.0), 0.1);
  p.charts.emplace_back(1, std::vector<int>{1, 1}, std::vector<PolyMatrix>{PolyMatrix::parse({{"z1"}}, 1)});
  for (int a = 1; a < 5; ++a) p.charts.emplace_back(1, std::vector<int>{1, 1}, std::vector<PolyMatrix>{PolyMatrix::parse({{"1"}}, 1)});
  for (int b = 1; b < 5; ++b)
    p.edges.push_back(EdgeIso{0, b, {PolyMatrix::parse({{bad_iso ? "1" : "z1"}}, 1), PolyMatrix::parse({{"1"}}, 1)}});
  for (int a = 1; a < 5; ++a)
    for (int b = a + 1; b < 5; ++b) p.edges.push_back(EdgeIso{a, b, {PolyMatrix::identity(1, 1), PolyMatrix::identity(1, 1)}});
  return p;
}

}  // namespace

TEST_CASE("interpolation identity for families of connections") {
  std::mt19937_64 rng(11);
  const int n = 2;
  const JetSpace& sp = JetSpace::get(n, 0);
  struct Case {
    std::size_t rank;
    int p;
    const char* phi;
  };
  for (const Case c : {Case{2, 1, "e2"}, Case{2, 1, "e1^2"}, Case{1, 2, "e1^2"}, Case{2, 2, "e1*e1 - 3*e2"}, Case{2, 3, "e2"}}) {
    const Point pt = testutil::random_point(rng, n);
    std::vector<std::vector<FormMatrix>> thetas;
    for (int j = 0; j <= c.p; ++j) thetas.push_back({random_theta(rng, n, c.rank, false).eval(pt, sp, 2, n, 0)});
    CHECK(interpolation_identity_defect(thetas, SymmetricPolynomial::parse(c.phi), n) < 1e-9);
  }
  // Equal vertices integrate to zero in positive degree.
  const Point pt = testutil::random_point(rng, n);
  const auto th = random_theta(rng, n, 2, false).eval(pt, sp, 1, n, 0);
  CHECK(interpolated_phi({{th}, {th}}, SymmetricPolynomial::elementary(2), n, 0).max_abs() < 1e-12);
}

TEST_CASE("check Phi is a cocycle and collapses to a closed form") {
  std::mt19937_64 rng(12);
  const Cover u = cover1();
  const CechSetup s{u, SimplicialResolution::global(bundle(1, 2), u.size()), fixed_thetas(random_families(rng, 1, u.size(), 2, false), 1)};
  const SymmetricPolynomial e1 = SymmetricPolynomial::elementary(1);
  const Cochain cphi = check_phi(s, e1);
  CHECK(max_entry(nabla(cphi), u, opts(2, 4)) < 1e-9);
  const GlobalForm g = global_phi(s, e1);
  for (int k = 0; k < 8; ++k) {
    const Point pt{u.sample(u.domain(), rng), {}};
    CHECK(g(pt, 1).d().truncated(0).max_abs() < 1e-9);
  }
}

TEST_CASE("one connection on every chart reproduces the classical form") {
  std::mt19937_64 rng(13);
  const int n = 2;
  const Cover u = cover2();
  const ConnectionFamily fam({random_theta(rng, n, 2, true)});
  const CechSetup s{u, SimplicialResolution::global(bundle(n, 2), u.size()), fixed_thetas({fam, fam, fam}, n)};
  for (const char* text : {"e2", "e1^2"}) {
    const SymmetricPolynomial Phi = SymmetricPolynomial::parse(text);
    const Cochain cphi = check_phi(s, Phi);
    const GlobalForm g = global_phi(s, Phi);
    for (int k = 0; k < 4; ++k) {
      const Point pt{u.sample(u.domain(), rng), {}};
      const JetSpace& sp = JetSpace::get(n, 0);
      const FormJet classical = phi_of_curvatures(Phi, {curvature(fam.eval(pt, sp, 1, n, 0)[0])}, sp, 0);
      CHECK(testutil::max_diff(g(pt, 0), classical) < 1e-10);
      for (int a : u.charts_at(pt.z))
        for (int b : u.charts_at(pt.z))
          if (a != b) CHECK(cphi({a, b}, pt, 0).max_abs() < 1e-12);
    }
  }
}

TEST_CASE("(1,0) connections give entries of the expected bidegree") {
  std::mt19937_64 rng(14);
  const int n = 2;
  const Cover u = cover2();
  const CechSetup s{u, SimplicialResolution::global(bundle(n, 2), u.size()), fixed_thetas(random_families(rng, n, u.size(), 2, true), n)};
  const SymmetricPolynomial e2 = SymmetricPolynomial::elementary(2);
  const Cochain cphi = check_phi(s, e2);
  double worst = 0.0, size = 0.0;
  for (const Tuple& t : u.nerve(2)) {
    const Point pt{u.sample(u.intersection(t), rng), {}};
    const FormJet w = cphi(t, pt, 0);
    worst = std::max(worst, bidegree_excess(w, n, 2, static_cast<int>(t.size()) - 1));
    size = std::max(size, w.max_abs());
  }
  CHECK(size > 1e-3);
  CHECK(worst < 1e-12);
  // Non-(1,0) connections violate it.
  const CechSetup bad{u, s.res, fixed_thetas(random_families(rng, n, u.size(), 2, false), n)};
  const Point pt{u.sample(u.intersection({0, 1}), rng), {}};
  CHECK(bidegree_excess(check_phi(bad, e2)({0, 1}, pt, 0), n, 2, 1) > 1e-6);
}

TEST_CASE("padded resolution of a point sheaf") {
  PaddedPoint good = padded_point(false);
  const SimplicialResolution res = SimplicialResolution::padded(good.charts, good.edges);
  CHECK(res.validate(good.cover).empty());
  PaddedPoint bad = padded_point(true);
  const auto errs = SimplicialResolution::padded(bad.charts, bad.edges).validate(bad.cover);
  REQUIRE(!errs.empty());
  CHECK(errs.front().find("commute") != std::string::npos);
  // Missing isomorphism.
  PaddedPoint missing = padded_point(false);
  missing.edges.erase(missing.edges.begin());
  const auto errs2 = SimplicialResolution::padded(missing.charts, missing.edges).validate(missing.cover);
  REQUIRE(!errs2.empty());
  CHECK(errs2.front().find("missing") != std::string::npos);

  // Trivial vertex connections; the transported ones differ by dz/z.
  std::vector<ConnectionFamily> fams;
  for (auto& c : good.charts) fams.push_back(ConnectionFamily::trivial(c));
  const CechSetup s{good.cover, res, fixed_thetas(fams, 1)};
  const Point pt{{cplx(-0.35, 0.1)}, {}};
  CHECK(face_consistency_defect(s, {0, 1, 3}, pt, 0) < 1e-12);
  const Cochain cphi = check_phi(s, SymmetricPolynomial::elementary(1));
  CHECK(max_entry(nabla(cphi), good.cover, opts(2, 3)) < 1e-8);
  // Degree-1 entry: pi_* of the interpolated connection on level 0 alone.
  const FormJet w = cphi({0, 1}, pt, 0);
  CHECK(w.max_abs() > 1e-3);
}

TEST_CASE("transgression between two sets of connections") {
  std::mt19937_64 rng(15);
  const int n = 1;
  const Cover u1 = cover1(), u2 = cover1b();
  const CechSetup s1{u1, SimplicialResolution::global(bundle(n, 2), u1.size()), fixed_thetas(random_families(rng, n, u1.size(), 2, false), n)};
  const CechSetup s2{u2, SimplicialResolution::global(bundle(n, 2), u2.size()), fixed_thetas(random_families(rng, n, u2.size(), 2, false), n)};
  const SymmetricPolynomial e1 = SymmetricPolynomial::elementary(1);
  // nabla eta = r2 check Phi_2 - r1 check Phi_1 on U_12.
  const Cover u12 = Cover::product(u1, u2);
  const Cochain eta = transgression_cochain(s1, s2, e1);
  const Cochain rhs = refine(check_phi(s2, e1), product_projection(u1, u2, 2)) - refine(check_phi(s1, e1), product_projection(u1, u2, 1));
  CHECK(max_entry(nabla(eta) - rhs, u12, opts(1, 2)) < 1e-9);
  const GlobalForm form = transgression_form(s1, s2, e1);
  const GlobalForm p1 = global_phi(s1, e1), p2 = global_phi(s2, e1);
  for (int k = 0; k < 6; ++k) {
    const Point pt{u12.sample(u12.domain(), rng), {}};
    CHECK(testutil::max_diff(form(pt, 1).d().truncated(0), p2(pt, 0) - p1(pt, 0)) < 1e-8);
  }
}
