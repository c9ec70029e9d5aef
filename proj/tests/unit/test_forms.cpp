#include <cmath>

#include "chernres/forms.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace chernres;
using testutil::max_diff;

namespace {

ScalarField poly(const std::string& s, int n) { return ScalarField::polynomial(parse_polynomial(s, n)); }

}  // namespace

TEST_CASE("jet arithmetic matches analytic derivatives") {
  const int n = 2;
  const JetSpace& sp = JetSpace::get(n, 0);
  Point pt{{cplx(0.3, -0.2), cplx(-0.5, 0.7)}, {}};
  const Polynomial p = parse_polynomial("z1^3*zbar2 + 2i*z2^2 - z1*zbar1", n);
  const Jet j = p.to_jet(pt, sp, 4);
  // d/dz1 and d/dzbar1 d/dz1 from the polynomial itself.
  CHECK(std::abs(j.partial({1, 0, 0, 0}) - p.d_z(0)(pt.z)) < 1e-13);
  CHECK(std::abs(j.partial({1, 0, 1, 0}) - p.d_z(0).d_zbar(0)(pt.z)) < 1e-13);
  CHECK(std::abs(j.partial({3, 0, 0, 1}) - p.d_z(0).d_z(0).d_z(0).d_zbar(1)(pt.z)) < 1e-13);
  // Mixed partials commute through the derivative operator.
  const Jet a = j.derivative(0).derivative(3);
  const Jet b = j.derivative(3).derivative(0);
  CHECK((a - b).max_abs() < 1e-12);
}

TEST_CASE("exp, log and reciprocal jets invert each other") {
  const JetSpace& sp = JetSpace::get(1, 1);
  const Jet x = Jet::variable(sp, 5, 0, cplx(0.4, 0.1)) + Jet::variable(sp, 5, 2, 0.3) * Jet::variable(sp, 5, 1, cplx(0.4, -0.1));
  CHECK((log(exp(x)) - x).max_abs() < 1e-12);
  CHECK((x * recip(x) - Jet::constant(sp, 5, 1.0)).max_abs() < 1e-12);
}

TEST_CASE("smooth step is flat at the ends and monotone") {
  const JetSpace& sp = JetSpace::get(1, 0);
  double last = -1.0;
  for (int k = -5; k <= 25; ++k) {
    const double u = k / 20.0;
    const Jet s = smooth_step(Jet::constant(sp, 0, u));
    CHECK(s.value().real() >= last - 1e-15);
    last = s.value().real();
  }
  CHECK(smooth_step(Jet::constant(sp, 0, 0.0)).value() == cplx(0.0));
  CHECK(smooth_step(Jet::constant(sp, 0, 1.0)).value() == cplx(1.0));
  CHECK(std::abs(smooth_step(Jet::constant(sp, 0, 0.5)).value() - 0.5) < 1e-15);
}

TEST_CASE("wedge basics") {
  const int n = 2, p = 1;
  const GradedForm dz1 = GradedForm::basis(n, p, dz_bit(0));
  const GradedForm dzb1 = GradedForm::basis(n, p, dzbar_bit(n, 0));
  const GradedForm w = wedge(dz1, dzb1);
  REQUIRE(w.terms().size() == 1);
  CHECK(w.terms().begin()->first == (dz_bit(0) | dzbar_bit(n, 0)));
  CHECK(wedge(dz1, dz1).terms().empty());

  Point pt{{cplx(0.2, 0.4), cplx(1.0, -1.0)}, {0.3}};
  const GradedForm a = GradedForm::basis(n, p, dzbar_bit(n, 1), poly("z1", n));
  const GradedForm b = GradedForm::basis(n, p, dt_bit(n, 0));
  const FormJet ab = wedge(a, b).eval(pt, 0);
  CHECK(ab.value(dzbar_bit(n, 1) | dt_bit(n, 0)) == pt.z[0]);
  // Graded commutativity.
  CHECK(max_diff(wedge(b, a).eval(pt, 0), -ab) < 1e-15);
}

TEST_CASE("exterior derivative examples") {
  const int n = 1;
  Point pt{{cplx(0.7, -0.3)}, {}};
  const GradedForm a = GradedForm::basis(n, 0, dz_bit(0), poly("zbar1", n));
  const FormJet da = a.d().eval(pt, 0);
  // d(zbar dz) = dzbar ^ dz = -dz ^ dzbar.
  CHECK(da.value(dz_bit(0) | dzbar_bit(n, 0)) == cplx(-1.0));

  std::mt19937_64 rng(7);
  const GradedForm f = GradedForm::scalar(n, 0, poly("z1^2*zbar1^2", n));
  for (int k = 0; k < 10; ++k) {
    const FormJet dd = f.d().d().eval(testutil::random_point(rng, n), 0);
    CHECK(dd.max_abs() < 1e-12);
  }

  Point q{{cplx(0.1, 0.2)}, {0.4}};
  const GradedForm g = GradedForm::basis(n, 1, dz_bit(0), ScalarField::simplex_coord(0));
  const FormJet dg = g.d().eval(q, 0);
  // d(t1 dz1) = dt1 ^ dz1 = -dz1 ^ dt1 in canonical order.
  CHECK(dg.value(dz_bit(0) | dt_bit(n, 0)) == cplx(-1.0));
}

TEST_CASE("d squared vanishes and graded Leibniz holds on random forms") {
  std::mt19937_64 rng(11);
  double worst_dd = 0.0, worst_leibniz = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 2, p = trial % 3;
    const GradedForm a = testutil::random_form(rng, n, p);
    const GradedForm b = testutil::random_form(rng, n, p);
    for (int k = 0; k < 10; ++k) {
      const Point pt = testutil::random_point(rng, n, p);
      worst_dd = std::max(worst_dd, a.d().d().eval(pt, 0).max_abs());
      // The sign needs homogeneous a, so split it by degree.
      FormJet lhs = wedge(a, b).d().eval(pt, 0);
      FormJet rhs(n, p);
      for (int deg = 0; deg <= 2 * n + p; ++deg) {
        GradedForm ad(n, p);
        for (auto& [m, f] : a.terms())
          if (mask_degree(m) == deg) ad.add(m, f);
        rhs += wedge(ad.d(), b).eval(pt, 0);
        FormJet t = wedge(ad, b.d()).eval(pt, 0);
        rhs += (deg % 2 ? -1.0 : 1.0) * t;
      }
      worst_leibniz = std::max(worst_leibniz, max_diff(lhs, rhs));
    }
  }
  CHECK(worst_dd < 1e-10);
  CHECK(worst_leibniz < 1e-10);
}

TEST_CASE("order exhaustion names the coefficient") {
  const int n = 1;
  const GradedForm f = GradedForm::scalar(n, 0, poly("z1*zbar1", n).capped(1).with_label("h"));
  Point pt{{cplx(0.5, 0.5)}, {}};
  CHECK_NOTHROW(f.d().eval(pt, 0));
  try {
    (void)f.d().d().eval(pt, 0);
    FAIL("expected order exhaustion");
  } catch (const OrderExhausted& e) {
    CHECK(std::string(e.what()).find("'h'") != std::string::npos);
  }
}

TEST_CASE("Grundmann-Moller rule integrates monomials exactly") {
  // Oracle: int over the p-simplex of t^a = prod a_i! / (p + sum a_i)!.
  for (int p = 1; p <= 3; ++p) {
    const SimplexRule rule(p, 7);
    double vol = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) vol += rule.weight(q);
    CHECK(std::abs(vol - 1.0 / std::tgamma(p + 1.0)) < 1e-13);
    for (int a = 0; a <= 4; ++a) {
      double sum = 0.0;
      for (std::size_t q = 0; q < rule.size(); ++q) sum += rule.weight(q) * std::pow(rule.node(q)[0], a) * std::pow(rule.node(q)[p - 1], p > 1 ? 3 : 0);
      const int b = p > 1 ? 3 : 0;
      const double exact = std::tgamma(a + 1.0) * std::tgamma(b + 1.0) / std::tgamma(p + a + b + 1.0);
      CHECK(std::abs(sum - exact) < 1e-13);
    }
  }
}

TEST_CASE("fiber integration examples") {
  const int n = 1;
  Point pt{{cplx(0.6, -0.25)}, {}};
  {
    // t0 dt1 over the 1-simplex.
    const GradedForm a = GradedForm::basis(n, 1, dt_bit(n, 0), ScalarField::constant(1.0) - ScalarField::simplex_coord(0));
    CHECK(std::abs(a.fiber_integrate(SimplexRule(1, 7)).eval(pt, 0).value(0u) - 0.5) < 1e-14);
  }
  {
    const GradedForm a = GradedForm::basis(n, 2, dt_bit(n, 0) | dt_bit(n, 1));
    CHECK(std::abs(a.fiber_integrate(SimplexRule(2, 7)).eval(pt, 0).value(0u) - 0.5) < 1e-14);
  }
  {
    // z1 t1 dt1 ^ dz1 is already dt-leftmost, so it pushes forward to +(z1/2) dz1.
    const GradedForm dt = GradedForm::basis(n, 1, dt_bit(n, 0), poly("z1", n) * ScalarField::simplex_coord(0));
    const GradedForm a = wedge(dt, GradedForm::basis(n, 1, dz_bit(0)));
    const FormJet r = a.fiber_integrate(SimplexRule(1, 7)).eval(pt, 0);
    // Oracle: 1-D Gauss-Legendre of t -> z1 t on [0, 1].
    std::vector<double> x, w;
    gauss_legendre(5, x, w);
    cplx brute{};
    for (std::size_t k = 0; k < x.size(); ++k) brute += 0.5 * w[k] * pt.z[0] * (0.5 * (x[k] + 1.0));
    CHECK(std::abs(r.value(dz_bit(0)) - brute) < 1e-14);
  }
  {
    // Forms pulled back from the chart carry no dt and integrate to zero.
    const GradedForm a = GradedForm::basis(n, 1, dz_bit(0), poly("z1*zbar1", n));
    CHECK(a.fiber_integrate(SimplexRule(1, 7)).terms().empty());
  }
}

TEST_CASE("Stokes on the 1-simplex") {
  std::mt19937_64 rng(3);
  const int n = 1;
  const SimplexRule rule(1, 9);
  for (int k = 0; k < 10; ++k) {
    GradedForm a(n, 1);
    ScalarField c = ScalarField::polynomial(testutil::random_poly(rng, n, 2, 3));
    a.add(dz_bit(0), c * ScalarField::simplex_coord(0) * ScalarField::simplex_coord(0));
    a.add(0u, c * ScalarField::simplex_coord(0));
    const Point pt = testutil::random_point(rng, n);
    const FormJet lhs = a.simplex_d().fiber_integrate(rule).eval(pt, 0);
    // a|_{t=1} - a|_{t=0}: coefficients c and c dz.
    const cplx cv = c.eval(pt, JetSpace::get(n, 0), 0).value();
    CHECK(std::abs(lhs.value(0u) - cv) < 1e-13);
    CHECK(std::abs(lhs.value(dz_bit(0)) - cv) < 1e-13);
  }
}

TEST_CASE("super sign rules") {
  const int n = 1;
  const JetSpace& sp = JetSpace::get(n, 0);
  auto one = [&](Mask m, cplx c) {
    FormJet w(n, 0);
    w.add(m, Jet::constant(sp, 0, c));
    return w;
  };
  // alpha = dzbar (x) gamma with gamma: E0 -> E1, beta = dz (x) xi at level 0.
  EndForm alpha{1, 0, FormMatrix(1, 1, n, 0)};
  alpha.m(0, 0) = one(dzbar_bit(n, 0), 2.0);
  FormMatrix beta(1, 1, n, 0);
  beta(0, 0) = one(dz_bit(0), 3.0);
  const FormMatrix r = super_apply(alpha, beta, 0);
  // -dzbar ^ dz (x) gamma xi = +dz ^ dzbar * 6.
  CHECK(r(0, 0).value(dz_bit(0) | dzbar_bit(n, 0)) == cplx(6.0));
  CHECK_THROWS_AS(super_apply(alpha, beta, 1), ValidationError);

  // Even endomorphisms act without signs.
  EndForm even{0, 0, FormMatrix(1, 1, n, 0)};
  even.m(0, 0) = one(dzbar_bit(n, 0), 1.0);
  CHECK(super_apply(even, beta, 0)(0, 0).value(dz_bit(0) | dzbar_bit(n, 0)) == cplx(-3.0));
}

TEST_CASE("super composition is compatible with super action") {
  std::mt19937_64 rng(5);
  const int n = 2;
  const JetSpace& sp = JetSpace::get(n, 0);
  auto rand_form = [&]() {
    FormJet w(n, 0);
    for (int k = 0; k < 3; ++k) w.add(static_cast<Mask>(rng() % 16), Jet::constant(sp, 0, testutil::rand_c(rng)));
    return w;
  };
  auto rand_mat = [&](std::size_t r, std::size_t c) {
    FormMatrix m(r, c, n, 0);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) m(i, j) = rand_form();
    return m;
  };
  for (int k = 0; k < 20; ++k) {
    EndForm a{2, 1, rand_mat(2, 3)};
    EndForm b{1, 0, rand_mat(3, 2)};
    const FormMatrix beta = rand_mat(2, 1);
    const FormMatrix lhs = super_apply(super_compose(a, b), beta, 0);
    const FormMatrix rhs = super_apply(a, super_apply(b, beta, 0), 1);
    CHECK((lhs - rhs).max_abs() < 1e-13);
  }
  // Homogeneous scalar operators on one level: the graded commutator
  // alpha alpha' - (-1)^{|alpha||alpha'|} alpha' alpha vanishes.
  for (int k = 0; k < 20; ++k) {
    const Mask ma = static_cast<Mask>(rng() % 16), mb = static_cast<Mask>(rng() % 16);
    EndForm a{1, 1, FormMatrix(1, 1, n, 0)};
    EndForm b{1, 1, FormMatrix(1, 1, n, 0)};
    a.m(0, 0).add(ma, Jet::constant(sp, 0, testutil::rand_c(rng)));
    b.m(0, 0).add(mb, Jet::constant(sp, 0, testutil::rand_c(rng)));
    const double s = (mask_degree(ma) * mask_degree(mb)) % 2 ? -1.0 : 1.0;
    const FormMatrix c = super_compose(a, b).m - s * super_compose(b, a).m;
    CHECK(c.max_abs() < 1e-15);
  }
}
