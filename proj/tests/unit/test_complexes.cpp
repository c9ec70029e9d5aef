#include <doctest.h>

#include <cmath>
#include <random>

#include "chernres/complexes.hpp"
#include "test_util.hpp"

using namespace chernres;

namespace {

BundleComplex make(int n, std::vector<int> ranks, const std::vector<std::vector<std::vector<std::string>>>& maps, bool foliation = false) {
  std::vector<PolyMatrix> pm;
  for (auto& m : maps) pm.push_back(PolyMatrix::parse(m, n));
  return BundleComplex(n, std::move(ranks), std::move(pm), {}, foliation);
}

BundleComplex koszul2() { return make(2, {1, 2, 1}, {{{"z1", "z2"}}, {{"-z2"}, {"z1"}}}); }

Point pt(std::vector<cplx> z) { return Point{std::move(z), {}}; }

double jet_diff(const JetMatrix& a, const JetMatrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) m = std::max(m, (a(i, j) - b(i, j)).max_abs());
  return m;
}

std::vector<FormMatrix> plus(const std::vector<FormMatrix>& theta, const TildeAt& t) {
  std::vector<FormMatrix> out = theta;
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += t.a[k];
  return out;
}

std::vector<FormMatrix> truncate_all(const std::vector<FormMatrix>& th, int order) {
  std::vector<FormMatrix> out;
  for (auto& m : th) {
    FormMatrix c = m;
    for (std::size_t i = 0; i < c.rows(); ++i)
      for (std::size_t j = 0; j < c.cols(); ++j) c(i, j) = c(i, j).truncated(order);
    out.push_back(c);
  }
  return out;
}

}  // namespace

TEST_CASE("Fubini-Study curvature at the origin") {
  const JetSpace& sp = JetSpace::get(1, 0);
  const int order = 3;
  const Point p0 = pt({0.0});
  // theta = zbar dz / (1 + |z|^2) for the metric 1 + |z|^2.
  Polynomial h = Polynomial::constant(1, 1.0) + Polynomial::z(1, 0) * Polynomial::zbar(1, 0);
  const Jet coeff = Polynomial::zbar(1, 0).to_jet(p0, sp, order) * recip(h.to_jet(p0, sp, order));
  FormMatrix theta(1, 1, 1, 0);
  theta(0, 0).add(dz_bit(0), coeff);
  const FormMatrix Theta = curvature(theta);
  const Mask dzdzb = dz_bit(0) | dzbar_bit(1, 0);
  CHECK(std::abs(Theta(0, 0).value(dzdzb) - cplx(-1.0)) < 1e-14);
  // c_1 = (i/2pi) Theta integrates to 1 over P^1: check the density instead.
  const auto e = chern_forms(Theta, 1, sp, order - 1);
  CHECK(std::abs(e[1].value(dzdzb) - cplx(0.0, -1.0 / (2 * M_PI))) < 1e-14);
}

TEST_CASE("mixed Chern forms of two line bundles") {
  std::mt19937_64 rng(7);
  const int n = 2;
  const JetSpace& sp = JetSpace::get(n, 0);
  const Point p0 = testutil::random_point(rng, n);
  auto random2 = [&]() {
    FormMatrix m(1, 1, n, 0);
    m(0, 0).add(dz_bit(0) | dzbar_bit(n, 1), testutil::random_poly(rng, n, 2, 3).to_jet(p0, sp, 2));
    m(0, 0).add(dz_bit(1) | dzbar_bit(n, 0), testutil::random_poly(rng, n, 2, 3).to_jet(p0, sp, 2));
    return m;
  };
  const FormMatrix T0 = random2(), T1 = random2();
  const auto e = mixed_chern({T0, T1}, 2, sp, 2);
  const cplx s(0.0, 1.0 / (2 * M_PI));
  // e_1 = s(T0 - T1); e_2 = s^2 T1 (T1 - T0) from 1 + x over 1 + y.
  CHECK(testutil::max_diff(e[1], s * (T0(0, 0) - T1(0, 0))) < 1e-13);
  CHECK(testutil::max_diff(e[2], s * s * wedge(T1(0, 0), T1(0, 0) - T0(0, 0))) < 1e-13);
}

TEST_CASE("power sums follow Newton's identities") {
  const SymmetricPolynomial p2 = SymmetricPolynomial::power_sum(2);
  REQUIRE(p2.degree() == 2);
  const SymmetricPolynomial direct = SymmetricPolynomial::parse("e1^2 - 2*e2");
  REQUIRE(p2.terms().size() == direct.terms().size());
  for (std::size_t k = 0; k < p2.terms().size(); ++k) {
    CHECK(p2.terms()[k].parts == direct.terms()[k].parts);
    CHECK(std::abs(p2.terms()[k].coeff - direct.terms()[k].coeff) < 1e-15);
  }
  CHECK_THROWS_AS(SymmetricPolynomial::parse("e1 + e2"), ValidationError);
  CHECK(SymmetricPolynomial::parse("p3").degree() == 3);

  // p_2 of the curvature equals tr((i/2pi Theta)^2) for commuting 2-form entries.
  std::mt19937_64 rng(11);
  const int n = 2;
  const JetSpace& sp = JetSpace::get(n, 0);
  const Point p0 = testutil::random_point(rng, n);
  FormMatrix Th(3, 3, n, 0);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      Th(i, j).add(dz_bit(0) | dzbar_bit(n, 0), testutil::random_poly(rng, n, 2, 2).to_jet(p0, sp, 1));
      Th(i, j).add(dz_bit(1) | dzbar_bit(n, 1), testutil::random_poly(rng, n, 2, 2).to_jet(p0, sp, 1));
    }
  const cplx s(0.0, 1.0 / (2 * M_PI));
  FormJet tr(n, 0);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) tr += s * s * wedge(Th(i, j), Th(j, i));
  const FormJet via = phi_of_curvatures(p2, {Th}, sp, 1);
  CHECK(testutil::max_diff(via, tr) < 1e-13);
}

TEST_CASE("minimal inverses satisfy the pseudo-inverse identities") {
  const BundleComplex c = koszul2();
  c.validate();
  const JetSpace& sp = JetSpace::get(2, 0);
  const auto at = c.eval(pt({cplx(0.3, 0.2), cplx(-0.5, 0.1)}), sp, 3);
  const auto sigma = minimal_inverses(at);
  for (int k = 1; k <= 2; ++k) {
    const auto& phi = at.phi[static_cast<std::size_t>(k)];
    const auto& sg = sigma[static_cast<std::size_t>(k)];
    CHECK(jet_diff(phi * sg * phi, phi) < 1e-12);
    CHECK(jet_diff(sg * phi * sg, sg) < 1e-12);
  }
  CHECK(jet_diff(sigma[2] * sigma[1], JetMatrix(2, 1, sp, 3)) < 1e-12);
  // Exactness at a regular point gives a splitting of E_1.
  CHECK(jet_diff(sigma[1] * at.phi[1] + at.phi[2] * sigma[2], JetMatrix::identity(2, sp, 3)) < 1e-12);
  CHECK_THROWS_AS(minimal_inverses(c.eval(pt({0.0, 0.0}), sp, 1)), SingularPoint);
}

TEST_CASE("sheaf correction for O/(z) is dz/z") {
  const BundleComplex c = make(1, {1, 1}, {{{"z1"}}});
  const JetSpace& sp = JetSpace::get(1, 0);
  const cplx z0(0.4, -0.7);
  const auto at = c.eval(pt({z0}), sp, 3);
  const auto theta = ConnectionFamily::trivial(c).eval(pt({z0}), sp, 3, 1, 0);
  const TildeAt t = sheaf_tilde(at, theta, 1, 0);
  CHECK(t.a[0].max_abs() == 0.0);
  const Jet* a1 = t.a[1](0, 0).find(dz_bit(0));
  REQUIRE(a1 != nullptr);
  const Jet oracle = recip(Polynomial::z(1, 0).to_jet(pt({z0}), sp, 2));
  CHECK((*a1 - oracle).max_abs() < 1e-12);
}

TEST_CASE("corrected connections are compatible with the complex") {
  std::mt19937_64 rng(3);
  const BundleComplex c = koszul2();
  const JetSpace& sp = JetSpace::get(2, 0);
  for (int trial = 0; trial < 5; ++trial) {
    const Point p0 = testutil::random_point(rng, 2);
    const auto at = c.eval(p0, sp, 3);
    // A nontrivial (1,0) background connection.
    std::vector<FormMatrix> theta;
    for (int r : c.ranks()) {
      FormMatrix m(static_cast<std::size_t>(r), static_cast<std::size_t>(r), 2, 0);
      for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) m(i, j).add(dz_bit(trial % 2), testutil::random_poly(rng, 2, 2, 2, true).to_jet(p0, sp, 2));
      theta.push_back(m);
    }
    const TildeAt t = sheaf_tilde(at, theta, 2, 0);
    CHECK(compatibility_defect(at, theta, 2, 0) > 1e-3);
    CHECK(compatibility_defect(at, plus(theta, t), 2, 0) < 1e-10);
    // (1,0) connections stay (1,0).
    for (auto& a : t.a) CHECK(a.filter([](Mask m) { return antiholo_part(m, 2) != 0u; }).max_abs() == 0.0);
  }
}

TEST_CASE("exact complexes have trivial mixed Chern form") {
  // 0 -> O -> O^2 -> O -> 0, pointwise exact.
  const BundleComplex c = make(2, {1, 2, 1}, {{{"1", "z1"}}, {{"-z1"}, {"1"}}});
  c.validate();
  std::mt19937_64 rng(5);
  const JetSpace& sp = JetSpace::get(2, 0);
  const int K = 3;
  for (int trial = 0; trial < 3; ++trial) {
    const Point p0 = testutil::random_point(rng, 2);
    const auto at = c.eval(p0, sp, K);
    const auto theta = ConnectionFamily::trivial(c).eval(p0, sp, K - 1, 2, 0);
    const auto hat = truncate_all(plus(theta, sheaf_tilde(at, theta, 2, 0)), K - 1);
    std::vector<FormMatrix> Th;
    for (auto& m : hat) Th.push_back(curvature(m));
    const FormJet total = mixed_chern_total(Th, sp, K - 2);
    CHECK(total.filter([](Mask m) { return m != 0u; }).max_abs() < 1e-10);
  }
}

TEST_CASE("foliation correction is basic and Bott vanishing holds") {
  // Linear vector field on C^2 spanning a foliation by curves: E_1 = O -> TM.
  const BundleComplex c = make(2, {2, 1}, {{{"z1"}, {"3*z2"}}}, true);
  c.validate();
  const JetSpace& sp = JetSpace::get(2, 0);
  const int K = 4;
  std::mt19937_64 rng(9);
  const Point p0 = pt({cplx(0.6, 0.1), cplx(-0.2, 0.4)});
  const auto at = c.eval(p0, sp, K);
  const auto theta = ConnectionFamily::trivial(c).eval(p0, sp, K - 1, 2, 0);
  const TildeAt t = foliation_tilde(at, theta, 2, 0);
  const auto hat = plus(theta, t);
  CHECK(compatibility_defect(at, hat, 2, 0) < 1e-10);

  const std::vector<Polynomial> vfield = {testutil::random_poly(rng, 2, 2, 3, true), testutil::random_poly(rng, 2, 2, 3, true)};
  const Polynomial f = testutil::random_poly(rng, 2, 1, 2, true);
  CHECK(basic_defect(c, hat, p0, f, 0, vfield) < 1e-9);
  // Negative control: the opposite sign of b is not basic.
  const auto wrong = plus(theta, foliation_tilde(at, theta, 2, 0, +1.0));
  CHECK(basic_defect(c, wrong, p0, f, 0, vfield) > 0.1);

  // Codimension 1: degree-2 characteristic forms vanish for the basic connection.
  std::vector<FormMatrix> Th;
  for (auto& m : truncate_all(hat, K - 1)) Th.push_back(curvature(m));
  for (const char* phi : {"e1^2", "e2"}) {
    const FormJet v = phi_of_curvatures(SymmetricPolynomial::parse(phi), Th, sp, K - 2);
    CHECK(v.max_abs() < 1e-9);
  }
  // Degree 1 does not vanish in general.
  const FormJet e1 = phi_of_curvatures(SymmetricPolynomial::parse("e1"), Th, sp, K - 2);
  CHECK(e1.max_abs() > 1e-6);
}

TEST_CASE("cutoffs are flat at the ends and monotone") {
  const JetSpace& sp = JetSpace::get(1, 0);
  for (CutoffKind kind : {CutoffKind::ExpStep, CutoffKind::LogStep}) {
    CHECK(parse_cutoff(cutoff_name(kind)) == kind);
    double prev = -1.0;
    for (int i = 0; i <= 400; ++i) {
      const double u = 3.0 * i / 400.0;
      const Jet v = cutoff(kind, Jet::variable(sp, 3, 0, u), 0.5, 2.0);
      const double x = v.value().real();
      CHECK(x >= prev - 1e-15);
      prev = x;
      if (u <= 0.5 || u >= 2.0) {
        CHECK(x == doctest::Approx(u <= 0.5 ? 0.0 : 1.0));
        CHECK(v.derivative(0).max_abs() == 0.0);
      }
    }
  }
  CHECK_THROWS_AS(parse_cutoff("box"), ValidationError);
}

TEST_CASE("default section is the maximal minors") {
  const BundleComplex c = koszul2();
  const RegulatorSection s = default_section(c, 1);
  REQUIRE(s.s.size() == 2);
  const std::vector<cplx> z = {cplx(0.3, 0.1), cplx(-0.2, 0.5)};
  CHECK(std::abs(s.abs2(z) - (std::norm(z[0]) + std::norm(z[1]))) < 1e-14);
  const auto r = c.generic_ranks({-1, -1, -1, -1}, {1, 1, 1, 1});
  CHECK(r[1] == 1);
  CHECK(r[2] == 1);
}

TEST_CASE("validation reports structural problems") {
  CHECK_THROWS_AS(make(2, {1, 2, 1}, {{{"z1", "z2"}}, {{"z2"}, {"z1"}}}).validate(), ValidationError);
  CHECK_THROWS_AS(make(1, {1, 1}, {{{"conj(z1)"}}}).validate(), ValidationError);
  CHECK_THROWS_AS(make(1, {1, 2}, {{{"z1"}}}).validate(), ValidationError);
}
