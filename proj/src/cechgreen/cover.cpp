#include "chernres/cover.hpp"

#include <algorithm>
#include <sstream>

#include "chernres/scalar_field.hpp"

namespace chernres {

Box Box::square(int n, double half_width) {
  Box b;
  b.lo.assign(static_cast<std::size_t>(2 * n), -half_width);
  b.hi.assign(static_cast<std::size_t>(2 * n), half_width);
  return b;
}

bool Box::contains(const std::vector<cplx>& z) const {
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double x = z[i].real(), y = z[i].imag();
    if (!(x > lo[2 * i] && x < hi[2 * i] && y > lo[2 * i + 1] && y < hi[2 * i + 1])) return false;
  }
  return true;
}

bool Box::empty() const {
  for (std::size_t k = 0; k < lo.size(); ++k)
    if (!(lo[k] < hi[k])) return true;
  return false;
}

Box Box::intersect(const Box& o) const {
  Box b = *this;
  for (std::size_t k = 0; k < lo.size(); ++k) {
    b.lo[k] = std::max(lo[k], o.lo[k]);
    b.hi[k] = std::min(hi[k], o.hi[k]);
  }
  return b;
}

Cover::Cover(int n, std::vector<Box> boxes, Box domain, double plateau_width)
    : n_(n), boxes_(std::move(boxes)), domain_(std::move(domain)), width_(plateau_width) {
  if (boxes_.empty()) throw ValidationError("a cover needs at least one box");
  const std::size_t m = static_cast<std::size_t>(2 * n);
  if (domain_.lo.size() != m || domain_.hi.size() != m) throw ValidationError("domain box must have 2n bounds");
  for (std::size_t a = 0; a < boxes_.size(); ++a) {
    if (boxes_[a].lo.size() != m || boxes_[a].hi.size() != m) throw ValidationError("box " + std::to_string(a) + " must have 2n bounds");
    if (boxes_[a].empty()) throw ValidationError("box " + std::to_string(a) + " is empty");
  }
  if (!(width_ > 0.0)) throw ValidationError("plateau width must be positive");
  if (boxes_.size() == 1) kind_ = Kind::Single;
}

Cover Cover::single(int n, Box domain) {
  Box b = domain;
  return Cover(n, {b}, std::move(domain));
}

Cover Cover::product(const Cover& u, const Cover& v) {
  if (u.n_ != v.n_) throw ValidationError("product of covers of different dimension");
  Cover c;
  c.n_ = u.n_;
  c.domain_ = u.domain_.intersect(v.domain_);
  for (auto& a : u.boxes_)
    for (auto& b : v.boxes_) c.boxes_.push_back(a.intersect(b));
  c.width_ = std::min(u.width_, v.width_);
  c.kind_ = Kind::Product;
  c.f1_ = std::make_shared<const Cover>(u);
  c.f2_ = std::make_shared<const Cover>(v);
  return c;
}

Cover Cover::disjoint_union(const Cover& u, const Cover& v) {
  if (u.n_ != v.n_) throw ValidationError("union of covers of different dimension");
  Cover c;
  c.n_ = u.n_;
  c.domain_ = u.domain_.intersect(v.domain_);
  c.boxes_ = u.boxes_;
  c.boxes_.insert(c.boxes_.end(), v.boxes_.begin(), v.boxes_.end());
  c.width_ = std::min(u.width_, v.width_);
  c.kind_ = Kind::Union;
  c.f1_ = std::make_shared<const Cover>(u);
  c.f2_ = std::make_shared<const Cover>(v);
  return c;
}

bool Cover::contains(const Tuple& t, const std::vector<cplx>& z) const {
  return std::all_of(t.begin(), t.end(), [&](int a) { return contains(a, z); });
}

std::vector<int> Cover::charts_at(const std::vector<cplx>& z) const {
  std::vector<int> out;
  for (int a = 0; a < size(); ++a)
    if (contains(a, z)) out.push_back(a);
  return out;
}

Box Cover::intersection(const Tuple& t) const {
  Box b = domain_;
  for (int a : t) b = b.intersect(box(a));
  return b;
}

bool Cover::intersects(const Tuple& t) const { return !intersection(t).empty(); }

std::vector<Tuple> Cover::nerve(int max_p) const {
  std::vector<Tuple> out;
  std::vector<Tuple> layer;
  for (int a = 0; a < size(); ++a)
    if (intersects({a})) layer.push_back({a});
  for (int p = 0; p <= max_p && !layer.empty(); ++p) {
    out.insert(out.end(), layer.begin(), layer.end());
    std::vector<Tuple> next;
    for (auto& t : layer)
      for (int a = 0; a < size(); ++a) {
        Tuple s = t;
        s.push_back(a);
        if (intersects(s)) next.push_back(std::move(s));
      }
    layer = std::move(next);
  }
  return out;
}

namespace {

Jet plateau(const Jet& x, double lo, double hi, double w) {
  const JetSpace& sp = x.space();
  const int order = x.order();
  const Jet a = smooth_step((x - Jet::constant(sp, order, lo)) * cplx(1.0 / w));
  const Jet b = smooth_step((Jet::constant(sp, order, hi) - x) * cplx(1.0 / w));
  return a * b;
}

}  // namespace

Jet Cover::bump(int a, const Point& pt, const JetSpace& sp, int order) const {
  const Box& b = box(a);
  Jet acc = Jet::constant(sp, order, 1.0);
  if (!b.contains(pt.z)) return Jet::constant(sp, order, 0.0);
  for (int i = 0; i < n_; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const Jet z = Jet::variable(sp, order, i, pt.z[ui]);
    const Jet zb = Jet::variable(sp, order, n_ + i, std::conj(pt.z[ui]));
    const Jet x = (z + zb) * cplx(0.5);
    const Jet y = (z - zb) * cplx(0.0, -0.5);
    const double wx = std::min(width_, 0.5 * b.width(2 * ui));
    const double wy = std::min(width_, 0.5 * b.width(2 * ui + 1));
    acc = acc * plateau(x, b.lo[2 * ui], b.hi[2 * ui], wx) * plateau(y, b.lo[2 * ui + 1], b.hi[2 * ui + 1], wy);
    if (acc.is_zero()) break;
  }
  return acc;
}

Jet Cover::psi(int a, const Point& pt, const JetSpace& sp, int order) const {
  switch (kind_) {
    case Kind::Single:
      return Jet::constant(sp, order, 1.0);
    case Kind::Product: {
      const int m = f2_->size();
      return f1_->psi(a / m, pt, sp, order) * f2_->psi(a % m, pt, sp, order);
    }
    case Kind::Union: {
      const int m = f1_->size();
      const Jet v = a < m ? f1_->psi(a, pt, sp, order) : f2_->psi(a - m, pt, sp, order);
      return v * cplx(0.5);
    }
    case Kind::Boxes:
      break;
  }
  const Jet own = bump(a, pt, sp, order);
  if (own.is_zero()) return own;
  Jet sum = Jet::constant(sp, order, 0.0);
  for (int b : charts_at(pt.z)) sum += b == a ? own : bump(b, pt, sp, order);
  return own * recip(sum);
}

void Cover::validate(int samples, unsigned seed) const {
  if (kind_ == Kind::Single) return;
  if (kind_ != Kind::Boxes) {
    f1_->validate(samples, seed);
    f2_->validate(samples, seed);
    return;
  }
  std::mt19937_64 rng(seed);
  const JetSpace& sp = JetSpace::get(n_, 0);
  for (int s = 0; s < samples; ++s) {
    const Point pt{sample(domain_, rng), {}};
    double total = 0.0;
    for (int a : charts_at(pt.z)) total += bump(a, pt, sp, 0).value().real();
    if (total < 1e-6) {
      std::ostringstream os;
      os << "the boxes do not cover the domain with their plateaus near z = (";
      for (std::size_t i = 0; i < pt.z.size(); ++i) os << (i ? ", " : "") << pt.z[i].real() << (pt.z[i].imag() < 0 ? "" : "+") << pt.z[i].imag() << "i";
      os << "); enlarge the overlaps or reduce the plateau width";
      throw ValidationError(os.str());
    }
  }
}

}  // namespace chernres
