#include "chernres/cochain.hpp"

#include <map>
#include <mutex>

namespace chernres {

Cochain::Cochain(int n, int min_p, int max_p, Fn f) : n_(n), min_p_(min_p), max_p_(max_p), f_(std::move(f)) {}

Cochain Cochain::zero(int n) { return Cochain(n, 0, -1, nullptr); }

FormJet Cochain::operator()(const Tuple& t, const Point& pt, int order) const {
  const int p = static_cast<int>(t.size()) - 1;
  if (!f_ || p < min_p_ || p > max_p_) return FormJet(n_, 0);
  return f_(t, pt, order);
}

Cochain Cochain::degree_part(int p) const {
  if (p < min_p_ || p > max_p_) return zero(n_);
  return Cochain(n_, p, p, f_);
}

Cochain Cochain::memoized() const {
  if (is_zero()) return *this;
  struct Cache {
    std::mutex mu;
    std::map<std::tuple<Tuple, int, std::vector<double>>, FormJet> map;
  };
  auto cache = std::make_shared<Cache>();
  const Fn inner = f_;
  return Cochain(n_, min_p_, max_p_, [cache, inner](const Tuple& t, const Point& pt, int order) {
    std::vector<double> key;
    for (auto& c : pt.z) {
      key.push_back(c.real());
      key.push_back(c.imag());
    }
    auto k = std::make_tuple(t, order, std::move(key));
    {
      std::lock_guard<std::mutex> lock(cache->mu);
      auto it = cache->map.find(k);
      if (it != cache->map.end()) return it->second;
    }
    FormJet v = inner(t, pt, order);
    std::lock_guard<std::mutex> lock(cache->mu);
    if (cache->map.size() > 20000) cache->map.clear();
    cache->map.emplace(std::move(k), v);
    return v;
  });
}

Cochain operator+(const Cochain& a, const Cochain& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  return Cochain(a.n_, std::min(a.min_p_, b.min_p_), std::max(a.max_p_, b.max_p_),
                 [a, b](const Tuple& t, const Point& pt, int order) { return a(t, pt, order) + b(t, pt, order); });
}

Cochain operator*(cplx s, const Cochain& a) {
  if (a.is_zero()) return a;
  return Cochain(a.n_, a.min_p_, a.max_p_, [a, s](const Tuple& t, const Point& pt, int order) { return s * a(t, pt, order); });
}

Cochain operator-(const Cochain& a, const Cochain& b) { return a + cplx(-1.0) * b; }

Cochain cech_delta(const Cochain& g) {
  if (g.is_zero()) return g;
  return Cochain(g.dim(), g.min_p() + 1, g.max_p() + 1, [g](const Tuple& t, const Point& pt, int order) {
    FormJet acc(g.dim(), 0);
    for (std::size_t j = 0; j < t.size(); ++j) {
      Tuple face = t;
      face.erase(face.begin() + static_cast<std::ptrdiff_t>(j));
      const FormJet v = g(face, pt, order);
      if (j % 2)
        acc -= v;
      else
        acc += v;
    }
    return acc;
  });
}

Cochain exterior_d(const Cochain& g) {
  if (g.is_zero()) return g;
  return Cochain(g.dim(), g.min_p(), g.max_p(), [g](const Tuple& t, const Point& pt, int order) {
    FormJet v = g(t, pt, order + 1).d().truncated(order);
    if ((t.size() - 1) % 2) v *= -1.0;
    return v;
  });
}

Cochain nabla(const Cochain& g) { return exterior_d(g) + cech_delta(g); }

Cochain psi_op(const Cochain& g, const Cover& cover) {
  if (g.is_zero() || g.max_p() < 1) return Cochain::zero(g.dim());
  return Cochain(g.dim(), std::max(0, g.min_p() - 1), g.max_p() - 1, [g, cover](const Tuple& t, const Point& pt, int order) {
    const JetSpace& sp = JetSpace::get(g.dim(), 0);
    // Input degree p = |t|; the sign (-1)^(p+1) makes psi a contraction for
    // delta with the appended index and the (-1)^p twisted d.
    const cplx sign = t.size() % 2 ? 1.0 : -1.0;
    FormJet acc(g.dim(), 0);
    for (int a : cover.charts_at(pt.z)) {
      const Jet w = cover.psi(a, pt, sp, order);
      if (w.is_zero()) continue;
      Tuple s = t;
      s.push_back(a);
      acc += w * g(s, pt, order) * sign;
    }
    return acc;
  });
}

namespace {

Cochain d_psi_power(Cochain g, const Cover& cover, int p) {
  for (int k = 0; k < p; ++k) g = exterior_d(psi_op(g, cover));
  return g;
}

}  // namespace

Cochain psi_prime(const Cochain& g, const Cover& cover, bool cocycle) {
  Cochain out = Cochain::zero(g.dim());
  if (g.is_zero()) return out;
  for (int p = std::max(0, g.min_p()); p <= g.max_p(); ++p) out = out + d_psi_power(g.degree_part(p), cover, p);
  if (!cocycle) {
    const Cochain ng = nabla(g);
    for (int p = 0; p + 1 <= ng.max_p(); ++p) {
      if (p + 1 < ng.min_p()) continue;
      out = out + psi_op(d_psi_power(ng.degree_part(p + 1), cover, p), cover);
    }
  }
  return out.degree_part(0);
}

GlobalForm psi_global(const Cochain& g, const Cover& cover, bool cocycle) {
  const Cochain c = psi_prime(g, cover, cocycle);
  return [c, cover](const Point& pt, int order) {
    const JetSpace& sp = JetSpace::get(cover.dim(), 0);
    FormJet acc(cover.dim(), 0);
    for (int a : cover.charts_at(pt.z)) {
      const Jet w = cover.psi(a, pt, sp, order);
      if (w.is_zero()) continue;
      acc += w * c({a}, pt, order);
    }
    return acc;
  };
}

void check_refinement(const Refinement& r, const Cover& finer, const Cover& coarser) {
  if (static_cast<int>(r.rho.size()) != finer.size()) throw ValidationError("refinement map must assign a coarse index to every fine index");
  for (int b = 0; b < finer.size(); ++b) {
    const int a = r.rho[static_cast<std::size_t>(b)];
    if (a < 0 || a >= coarser.size()) throw ValidationError("refinement index out of range for fine set " + std::to_string(b));
    const Box& vb = finer.box(b);
    if (vb.empty()) continue;
    const Box& ua = coarser.box(a);
    for (std::size_t k = 0; k < vb.lo.size(); ++k)
      if (vb.lo[k] < ua.lo[k] || vb.hi[k] > ua.hi[k])
        throw ValidationError("fine set " + std::to_string(b) + " is not contained in coarse set " + std::to_string(a));
  }
}

Cochain refine(const Cochain& g, const Refinement& r) {
  if (g.is_zero()) return g;
  return Cochain(g.dim(), g.min_p(), g.max_p(), [g, r](const Tuple& t, const Point& pt, int order) {
    Tuple s;
    for (int b : t) s.push_back(r.rho[static_cast<std::size_t>(b)]);
    return g(s, pt, order);
  });
}

Cochain homotopy_h(const Cochain& g, const Refinement& r1, const Refinement& r2) {
  if (g.is_zero() || g.max_p() < 1) return Cochain::zero(g.dim());
  return Cochain(g.dim(), std::max(0, g.min_p() - 1), g.max_p() - 1, [g, r1, r2](const Tuple& t, const Point& pt, int order) {
    FormJet acc(g.dim(), 0);
    for (std::size_t k = 0; k < t.size(); ++k) {
      Tuple s;
      for (std::size_t i = 0; i <= k; ++i) s.push_back(r1.rho[static_cast<std::size_t>(t[i])]);
      for (std::size_t i = k; i < t.size(); ++i) s.push_back(r2.rho[static_cast<std::size_t>(t[i])]);
      const FormJet v = g(s, pt, order);
      if (k % 2)
        acc -= v;
      else
        acc += v;
    }
    return acc;
  });
}

double max_entry(const Cochain& g, const Cover& cover, const SampleOptions& opt) {
  std::mt19937_64 rng(opt.seed);
  double worst = 0.0;
  for (const Tuple& t : cover.nerve(opt.max_p)) {
    const Box b = cover.intersection(t);
    for (int s = 0; s < opt.samples; ++s) {
      const Point pt{cover.sample(b, rng), {}};
      worst = std::max(worst, g(t, pt, opt.order).max_abs());
    }
  }
  return worst;
}

double overlap_mismatch(const Cochain& g, const Cover& cover, const SampleOptions& opt) {
  std::mt19937_64 rng(opt.seed);
  double worst = 0.0;
  for (int a = 0; a < cover.size(); ++a)
    for (int b = a + 1; b < cover.size(); ++b) {
      const Box box = cover.intersection({a, b});
      if (box.empty()) continue;
      for (int s = 0; s < opt.samples; ++s) {
        const Point pt{cover.sample(box, rng), {}};
        worst = std::max(worst, (g({a}, pt, opt.order) - g({b}, pt, opt.order)).max_abs());
      }
    }
  return worst;
}

}  // namespace chernres
