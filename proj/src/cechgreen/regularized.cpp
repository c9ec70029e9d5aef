#include "chernres/regularized.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace chernres {

namespace {

struct Interval {
  double lo = 0.0, hi = 0.0;
};

Interval operator+(Interval a, Interval b) { return {a.lo + b.lo, a.hi + b.hi}; }
Interval operator-(Interval a, Interval b) { return {a.lo - b.hi, a.hi - b.lo}; }
Interval operator*(Interval a, Interval b) {
  const double c[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
  return {*std::min_element(c, c + 4), *std::max_element(c, c + 4)};
}

// Rectangle re x im in the complex plane.
struct CInterval {
  Interval re, im;
};

CInterval operator+(CInterval a, CInterval b) { return {a.re + b.re, a.im + b.im}; }
CInterval operator*(CInterval a, CInterval b) { return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re}; }
CInterval scale(cplx c, CInterval a) {
  const Interval r{c.real(), c.real()}, i{c.imag(), c.imag()};
  return {r * a.re - i * a.im, r * a.im + i * a.re};
}

}  // namespace

std::pair<double, double> abs2_range(const Polynomial& p, const Box& b) {
  const int n = p.dim();
  CInterval acc{{0.0, 0.0}, {0.0, 0.0}};
  for (auto& [e, c] : p.terms()) {
    CInterval m{{1.0, 1.0}, {0.0, 0.0}};
    for (int i = 0; i < n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      const CInterval z{{b.lo[2 * ui], b.hi[2 * ui]}, {b.lo[2 * ui + 1], b.hi[2 * ui + 1]}};
      const CInterval zb{z.re, {-z.im.hi, -z.im.lo}};
      for (int k = 0; k < e[ui]; ++k) m = m * z;
      for (int k = 0; k < e[ui + static_cast<std::size_t>(n)]; ++k) m = m * zb;
    }
    acc = acc + scale(c, m);
  }
  auto sq_range = [](Interval v) {
    const double a = v.lo * v.lo, c = v.hi * v.hi;
    const double lo = (v.lo <= 0.0 && v.hi >= 0.0) ? 0.0 : std::min(a, c);
    return Interval{lo, std::max(a, c)};
  };
  const Interval r = sq_range(acc.re) + sq_range(acc.im);
  return {r.lo, r.hi};
}

void RegularizedSetup::finalize() {
  const int m = cover.size();
  if (res.size() != m) throw ValidationError("the resolution needs one complex per chart of the cover");
  if (connections.empty())
    for (int a = 0; a < m; ++a) connections.push_back(ConnectionFamily::trivial(res.chart(a)));
  if (static_cast<int>(connections.size()) != m) throw ValidationError("one connection family per chart is required");
  for (int a = 0; a < m; ++a)
    if (static_cast<int>(connections[static_cast<std::size_t>(a)].size()) != res.chart(a).length() + 1)
      throw ValidationError("connection of chart " + std::to_string(a) + " needs one matrix per level");
  if (sections.empty()) {
    if (regulator_cover.size()) throw ValidationError("a separate regulator cover needs explicit sections");
    for (int a = 0; a < m; ++a) {
      const BundleComplex& c = res.chart(a);
      const Box b = cover.box(a).intersect(cover.domain());
      const int rho = c.length() ? c.generic_ranks(b.lo, b.hi)[1] : 0;
      sections.push_back(default_section(c, rho));
    }
  }
  if (static_cast<int>(sections.size()) != reg_cover().size()) throw ValidationError("one regulator section per regulator chart is required");
  if (!(regulator.tau0 > 0.0 && regulator.tau1 > regulator.tau0)) throw ValidationError("cutoff needs 0 < tau0 < tau1");
}

Jet RegularizedSetup::chi(double eps, const Point& pt, int order) const {
  const JetSpace& sp = JetSpace::get(dim(), 0);
  const Cover& v = reg_cover();
  Jet acc = Jet::constant(sp, order, 0.0);
  for (int b : v.charts_at(pt.z)) {
    const Jet w = v.psi(b, pt, sp, order);
    if (w.is_zero()) continue;
    const Jet u = sections[static_cast<std::size_t>(b)].abs2.to_jet(pt, sp, order) * cplx(1.0 / eps);
    const Jet c = cutoff(regulator.kind, u, regulator.tau0, regulator.tau1);
    if (!c.is_zero()) acc += w * c;
  }
  return acc;
}

std::vector<FormMatrix> RegularizedSetup::theta(int alpha, const Point& pt, int order) const {
  return connections[static_cast<std::size_t>(alpha)].eval(pt, JetSpace::get(dim(), 0), order, dim(), 0);
}

TildeAt RegularizedSetup::tilde(int alpha, const Point& pt, int order) const {
  const int n = dim();
  const BundleComplex::At at = res.chart(alpha).eval(pt, JetSpace::get(n, 0), order + 1);
  const std::vector<FormMatrix> th = theta(alpha, pt, order);
  return kind == TildeKind::Sheaf ? sheaf_tilde(at, th, n, 0, threshold) : foliation_tilde(at, th, n, 0, b_sign, threshold);
}

std::vector<FormMatrix> RegularizedSetup::theta_tilde(int alpha, const Point& pt, int order) const {
  return regularize(theta(alpha, pt, order), tilde(alpha, pt, order), Jet::constant(JetSpace::get(dim(), 0), order, 1.0));
}

std::vector<FormMatrix> RegularizedSetup::theta_hat(int alpha, double eps, const Point& pt, int order) const {
  const Jet c = chi(eps, pt, order);
  if (c.is_zero()) return theta(alpha, pt, order);
  return regularize(theta(alpha, pt, order), tilde(alpha, pt, order), c);
}

CechSetup RegularizedSetup::at(double eps) const {
  auto self = std::make_shared<const RegularizedSetup>(*this);
  return CechSetup{cover, res, memoize([self, eps](int a, const Point& pt, int order) { return self->theta_hat(a, eps, pt, order); })};
}

CechSetup RegularizedSetup::reference() const {
  auto self = std::make_shared<const RegularizedSetup>(*this);
  return CechSetup{cover, res, memoize([self](int a, const Point& pt, int order) { return self->theta(a, pt, order); })};
}

std::vector<std::pair<double, double>> RegularizedSetup::section_ranges(const Box& b) const {
  std::vector<std::pair<double, double>> out;
  const Cover& v = reg_cover();
  for (int c = 0; c < v.size(); ++c) {
    if (v.box(c).intersect(b).empty()) continue;
    const RegulatorSection& s = sections[static_cast<std::size_t>(c)];
    if (s.s.empty()) {
      out.emplace_back(1.0, 1.0);
      continue;
    }
    double lo = 0.0, hi = 0.0;
    for (auto& p : s.s) {
      const auto r = abs2_range(p, b);
      lo += r.first;
      hi += r.second;
    }
    out.emplace_back(lo, hi);
  }
  return out;
}

}  // namespace chernres
