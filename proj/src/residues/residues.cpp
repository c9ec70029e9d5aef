#include "chernres/residues.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <thread>

namespace chernres {

namespace {

constexpr double kPi = std::numbers::pi;

// Factor turning the coefficient of dz_1..dz_k dzbar_1..dzbar_k into a
// density for dx_1 dy_1 .. dx_k dy_k.
cplx density_factor(int k) {
  cplx f = ((k * (k - 1) / 2) % 2) ? -1.0 : 1.0;
  for (int i = 0; i < k; ++i) f *= cplx(0.0, -2.0);
  return f;
}

Mask top_mask(int n) { return (Mask{1} << (2 * n)) - 1; }

double volume(const Box& b) {
  double v = 1.0;
  for (std::size_t k = 0; k < b.lo.size(); ++k) v *= b.hi[k] - b.lo[k];
  return v;
}

// Halves b along the axes in `axes`.
std::vector<Box> split(const Box& b, std::uint32_t axes) {
  std::vector<Box> out{b};
  for (std::size_t k = 0; k < b.lo.size(); ++k) {
    if (!(axes >> k & 1)) continue;
    const double mid = 0.5 * (b.lo[k] + b.hi[k]);
    std::vector<Box> next;
    for (const Box& c : out) {
      Box l = c, h = c;
      l.hi[k] = mid;
      h.lo[k] = mid;
      next.push_back(std::move(l));
      next.push_back(std::move(h));
    }
    out = std::move(next);
  }
  return out;
}

std::uint32_t all_axes(const Box& b) { return (std::uint32_t{1} << b.lo.size()) - 1; }

std::vector<Box> initial_cells(const Box& region, double cell) {
  std::vector<Box> cells{region};
  for (std::size_t k = 0; k < region.lo.size(); ++k) {
    const int parts = std::max(1, static_cast<int>(std::ceil(region.width(k) / cell - 1e-9)));
    std::vector<Box> next;
    for (auto& c : cells)
      for (int i = 0; i < parts; ++i) {
        Box s = c;
        s.lo[k] = region.lo[k] + region.width(k) * i / parts;
        s.hi[k] = region.lo[k] + region.width(k) * (i + 1) / parts;
        next.push_back(s);
      }
    cells = std::move(next);
  }
  return cells;
}

struct Rule1d {
  std::vector<double> x, w;
};

const Rule1d& gl_rule(int m) {
  static std::mutex mu;
  static std::map<int, Rule1d> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(m);
  if (it != cache.end()) return it->second;
  Rule1d r;
  gauss_legendre(m, r.x, r.w);
  return cache.emplace(m, std::move(r)).first->second;
}

// Tensor Gauss-Legendre over a cell of dimension 2n.
template <class F>
cplx tensor_rule(const Box& cell, int m, const F& f, long& evals) {
  const Rule1d& r = gl_rule(m);
  const std::size_t d = cell.lo.size();
  std::vector<int> idx(d, 0);
  std::vector<double> x(d);
  cplx acc = 0.0;
  const double jac = volume(cell) / std::pow(2.0, static_cast<double>(d));
  while (true) {
    double w = jac;
    for (std::size_t k = 0; k < d; ++k) {
      const auto i = static_cast<std::size_t>(idx[k]);
      x[k] = 0.5 * (cell.lo[k] + cell.hi[k]) + 0.5 * (cell.hi[k] - cell.lo[k]) * r.x[i];
      w *= r.w[i];
    }
    acc += w * f(x);
    ++evals;
    std::size_t k = 0;
    while (k < d && ++idx[k] == m) idx[k++] = 0;
    if (k == d) break;
  }
  return acc;
}

Point point_of(const std::vector<double>& x) {
  Point pt;
  for (std::size_t i = 0; i + 1 < x.size(); i += 2) pt.z.emplace_back(x[i], x[i + 1]);
  return pt;
}

int thread_count(int requested) {
  if (requested > 0) return requested;
  const unsigned h = std::thread::hardware_concurrency();
  return h ? static_cast<int>(h) : 1;
}

// Runs f(i) for i in [0, count) on a pool; rethrows the first failure.
template <class F>
void parallel_for(std::size_t count, int threads, const F& f) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto work = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!err) err = std::current_exception();
        next = count;
        return;
      }
    }
  };
  const int t = std::min<int>(thread_count(threads), static_cast<int>(std::max<std::size_t>(count, 1)));
  std::vector<std::thread> pool;
  for (int k = 1; k < t; ++k) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

Jet abs2_from(const Point& pt, const std::vector<cplx>& c, const JetSpace& sp, int order) {
  const int n = sp.chart_dim();
  Jet acc = Jet::constant(sp, order, 0.0);
  for (int i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const Jet z = Jet::variable(sp, order, i, pt.z[ui]) - Jet::constant(sp, order, c[ui]);
    const Jet zb = Jet::variable(sp, order, n + i, std::conj(pt.z[ui])) - Jet::constant(sp, order, std::conj(c[ui]));
    acc += z * zb;
  }
  return acc;
}

}  // namespace

Jet Bump::eval(const Point& pt, const JetSpace& sp, int order) const {
  double r2 = 0.0;
  for (std::size_t i = 0; i < center.size(); ++i) r2 += std::norm(pt.z[i] - center[i]);
  if (r2 >= radius * radius) return Jet::constant(sp, order, 0.0);
  if (r2 <= inner * inner * radius * radius * (1.0 - 1e-12) && order == 0) return Jet::constant(sp, order, 1.0);
  const Jet u = (Jet::constant(sp, order, radius * radius) - abs2_from(pt, center, sp, order)) *
                cplx(1.0 / (radius * radius * (1.0 - inner * inner)));
  return smooth_step(u);
}

TestForm TestForm::bump(int n, std::vector<cplx> center, double radius, double inner) {
  if (static_cast<int>(center.size()) != n) throw ValidationError("test form center needs n coordinates");
  TestForm t;
  t.bumps.push_back(Bump{std::move(center), radius, inner});
  return t;
}

TestForm TestForm::slice(int n, std::vector<cplx> center, double radius, const std::vector<int>& coords, double inner) {
  TestForm t = bump(n, std::move(center), radius, inner);
  Mask m = 0;
  for (int j : coords) {
    if (j < 0 || j >= n) throw ValidationError("slice coordinate out of range");
    m |= dz_bit(j) | dzbar_bit(n, j);
  }
  const int k = static_cast<int>(coords.size());
  cplx c = ((k * (k - 1) / 2) % 2) ? -1.0 : 1.0;
  for (int i = 0; i < k; ++i) c *= cplx(0.0, 0.5);
  t.form[m] = Polynomial::constant(n, c);
  return t;
}

int TestForm::degree(int) const {
  if (form.empty()) return 0;
  const int d = mask_degree(form.begin()->first);
  for (auto& [m, p] : form)
    if (mask_degree(m) != d) throw ValidationError("test form must be homogeneous");
  return d;
}

FormJet TestForm::eval(int n, const Point& pt, int order) const {
  const JetSpace& sp = JetSpace::get(n, 0);
  Jet b = Jet::constant(sp, order, 1.0);
  for (auto& bump : bumps) {
    b = b * bump.eval(pt, sp, order);
    if (b.is_zero()) return FormJet(n, 0);
  }
  if (form.empty()) return FormJet::scalar(n, 0, b);
  FormJet out(n, 0);
  for (auto& [m, p] : form) out.add(m, p.to_jet(pt, sp, order) * b);
  return out;
}

FormJet TestForm::d_eval(int n, const Point& pt) const { return eval(n, pt, 1).d().truncated(0); }

Box TestForm::support(int n) const {
  Box b = Box::square(n, 1e300);
  for (auto& bump : bumps) {
    Box s = Box::square(n, bump.radius);
    for (int i = 0; i < n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      s.lo[2 * ui] += bump.center[ui].real();
      s.hi[2 * ui] += bump.center[ui].real();
      s.lo[2 * ui + 1] += bump.center[ui].imag();
      s.hi[2 * ui + 1] += bump.center[ui].imag();
    }
    b = b.intersect(s);
  }
  return b;
}

TestForm TestForm::times(const Bump& b) const {
  TestForm t = *this;
  t.bumps.push_back(b);
  return t;
}

QuadSettings QuadSettings::for_dim(int n) {
  QuadSettings q;
  if (n >= 2) {
    q.nodes = 4;
    q.shell_nodes = 1.5;
    q.initial_cell = 0.5;
    q.adapt_rounds = 0;
  }
  return q;
}

Pairing pair(const GlobalForm& form, int form_degree, const std::function<FormJet(const Point&)>& test, int test_degree, int n,
             const Box& region, const QuadSettings& q, const SplitFn& refine, const RefineFn& skip) {
  if (form_degree + test_degree != 2 * n)
    throw ValidationError("pairing needs total degree " + std::to_string(2 * n) + ", got " + std::to_string(form_degree) + " + " +
                          std::to_string(test_degree));
  Pairing out;
  if (region.empty()) return out;
  const cplx dens = density_factor(n);
  const Mask top = top_mask(n);
  auto integrand = [&](const std::vector<double>& x) -> cplx {
    const Point pt = point_of(x);
    const FormJet t = test(pt);
    if (t.empty() || t.max_abs() == 0.0) return 0.0;
    return wedge(form(pt, 0), t).value(top) * dens;
  };

  struct Leaf {
    Box box;
    int depth;
  };
  std::vector<Leaf> leaves;
  std::vector<Leaf> stack;
  for (auto& c : initial_cells(region, q.initial_cell)) stack.push_back({c, 0});
  std::reverse(stack.begin(), stack.end());
  while (!stack.empty()) {
    Leaf l = std::move(stack.back());
    stack.pop_back();
    if (skip && skip(l.box)) continue;
    if (const std::uint32_t axes = refine ? refine(l.box) : 0) {
      if (l.depth < q.max_depth) {
        auto kids = split(l.box, axes);
        for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back({*it, l.depth + 1});
        continue;
      }
      out.converged = false;
    }
    leaves.push_back(std::move(l));
  }

  const int m = std::max(3, q.nodes);
  const double total_vol = volume(region);
  std::vector<cplx> val;
  std::vector<double> err;
  std::vector<long> ev;
  for (int round = 0;; ++round) {
    val.assign(leaves.size(), 0.0);
    err.assign(leaves.size(), 0.0);
    ev.assign(leaves.size(), 0);
    parallel_for(leaves.size(), q.threads, [&](std::size_t i) {
      long e = 0;
      const cplx hi = tensor_rule(leaves[i].box, m, integrand, e);
      const cplx lo = tensor_rule(leaves[i].box, m - 2, integrand, e);
      val[i] = hi;
      err[i] = std::abs(hi - lo);
      ev[i] = e;
    });
    if (round >= q.adapt_rounds) break;
    std::vector<Leaf> next;
    bool changed = false;
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      const double allowed = q.abs_tol * volume(leaves[i].box) / total_vol;
      if (err[i] > allowed && leaves[i].depth < q.max_depth) {
        for (auto& k : split(leaves[i].box, all_axes(leaves[i].box))) next.push_back({k, leaves[i].depth + 1});
        changed = true;
      } else {
        next.push_back(leaves[i]);
      }
    }
    if (!changed) break;
    out.evaluations += std::accumulate(ev.begin(), ev.end(), 0L);
    leaves = std::move(next);
  }
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    out.value += val[i];
    out.error += err[i];
    out.evaluations += ev[i];
  }
  out.cells = static_cast<long>(leaves.size());
  if (out.error > std::max(q.abs_tol, 1e-12)) out.converged = false;
  return out;
}

Pairing pair(const GlobalForm& form, int form_degree, const TestForm& test, int n, const Box& domain, const QuadSettings& q,
             const SplitFn& refine, const RefineFn& skip) {
  return pair(
      form, form_degree, [&](const Point& pt) { return test.eval(n, pt, 0); }, test.degree(n), n, test.support(n).intersect(domain), q,
      refine, skip);
}

SplitFn shell_refinement(const RegularizedSetup& s, double eps, const QuadSettings& q) {
  auto self = std::make_shared<const RegularizedSetup>(s);
  // Largest span of the cutoff variable per cell that keeps shell_nodes
  // nodes across the transition.
  const double allowed = std::max(q.nodes, 1) / q.shell_nodes;
  // Span of the cutoff variable over b, in units of the transition width;
  // 0 when b misses the transition.
  auto span = [self, eps](const Box& b) {
    const RegulatorSettings& r = self->regulator;
    double worst = 0.0;
    for (auto [lo, hi] : self->section_ranges(b)) {
      const double ulo = lo / eps, uhi = hi / eps;
      if (uhi <= r.tau0 || ulo >= r.tau1) continue;
      worst = std::max(worst, r.kind == CutoffKind::ExpStep ? (uhi - ulo) / (r.tau1 - r.tau0)
                                                            : (ulo > 0.0 ? std::log(uhi / ulo) / std::log(r.tau1 / r.tau0) : 1e300));
    }
    return worst;
  };
  return [span, allowed](const Box& b) -> std::uint32_t {
    const double full = span(b);
    if (!(full > allowed)) return 0;
    // An axis matters when squeezing it to a thin slab about its midpoint
    // shrinks the span.
    std::uint32_t axes = 0;
    for (std::size_t k = 0; k < b.lo.size(); ++k) {
      Box c = b;
      const double mid = 0.5 * (b.lo[k] + b.hi[k]), h = 1e-6 * (b.hi[k] - b.lo[k]);
      c.lo[k] = mid - h;
      c.hi[k] = mid + h;
      if (full - span(c) > 0.1 * full) axes |= std::uint32_t{1} << k;
    }
    return axes ? axes : all_axes(b);
  };
}

RefineFn vanishing_cells(const RegularizedSetup& s, double eps, bool use_reference) {
  auto self = std::make_shared<const RegularizedSetup>(s);
  bool flat = use_reference;
  for (auto& c : s.connections) flat = flat && c.is_trivial();
  for (int a = 0; a < s.cover.size() && flat; ++a)
    for (int b = a + 1; b < s.cover.size() && flat; ++b) flat = s.res.identity_transition(a, b);
  return [self, eps, flat](const Box& b) {
    const RegulatorSettings& r = self->regulator;
    bool one = true, zero = true;
    for (auto [lo, hi] : self->section_ranges(b)) {
      one = one && lo / eps >= r.tau1;
      zero = zero && hi / eps <= r.tau0;
    }
    return one || (zero && flat);
  };
}

EpsLadder EpsLadder::geometric(double first, double last, double ratio) {
  EpsLadder l;
  for (double e = first; e >= last * (1.0 - 1e-9); e /= ratio) l.eps.push_back(e);
  return l;
}

void EpsLadder::validate() const {
  if (eps.empty()) throw ValidationError("empty epsilon ladder");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0)) throw ValidationError("epsilon values must be positive");
    if (i && !(eps[i] < eps[i - 1])) throw ValidationError("epsilon ladder must be strictly decreasing");
  }
}

namespace {

struct Fit {
  cplx p0, c;
  double rss = 0.0;
  bool ok = false;
};

Fit fit_for(const std::vector<double>& eps, const std::vector<cplx>& p, double a) {
  // Least squares for P0 + c eps^a with real design matrix.
  double s1 = 0, sx = 0, sxx = 0;
  cplx sy = 0, sxy = 0;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const double x = std::pow(eps[i], a);
    s1 += 1;
    sx += x;
    sxx += x * x;
    sy += p[i];
    sxy += x * p[i];
  }
  Fit f;
  const double det = s1 * sxx - sx * sx;
  if (!(std::abs(det) > 1e-14 * std::max(1.0, s1 * sxx))) return f;
  f.c = (s1 * sxy - sx * sy) / det;
  f.p0 = (sy - f.c * sx) / s1;
  for (std::size_t i = 0; i < eps.size(); ++i) f.rss += std::norm(p[i] - f.p0 - f.c * std::pow(eps[i], a));
  f.ok = true;
  return f;
}

}  // namespace

CurrentEstimate extrapolate(const std::vector<double>& eps, const std::vector<cplx>& pairings, const std::vector<double>& quad_errors) {
  if (eps.size() != pairings.size()) throw ValidationError("ladder and pairings differ in length");
  if (eps.size() < 4) throw ValidationError("extrapolation needs at least 4 ladder points");
  CurrentEstimate e;
  e.eps = eps;
  e.pairings = pairings;
  e.quad_errors = quad_errors;
  if (e.quad_errors.empty()) e.quad_errors.assign(eps.size(), 0.0);
  e.quad_error = *std::max_element(e.quad_errors.begin(), e.quad_errors.end());
  const std::size_t N = eps.size();
  const cplx last = pairings.back(), prev = pairings[N - 2];

  double scale = 0.0;
  for (auto& p : pairings) scale = std::max(scale, std::abs(p - last));
  if (scale <= 1e-14 * std::max(1.0, std::abs(last))) {
    e.limit = last;
    e.coefficient = 0.0;
    e.exponent = 0.0;
    e.residual = 0.0;
    e.error = e.quad_error;
    e.note = "constant ladder";
    return e;
  }

  // Coarse scan of the exponent, then golden-section refinement.
  const double amin = 0.05, amax = 4.0;
  auto rss = [&](double a) {
    const Fit f = fit_for(eps, pairings, a);
    return f.ok ? f.rss : std::numeric_limits<double>::infinity();
  };
  double best_a = amin, best = rss(amin);
  const int grid = 80;
  for (int k = 1; k <= grid; ++k) {
    const double a = amin * std::pow(amax / amin, static_cast<double>(k) / grid);
    const double r = rss(a);
    if (r < best) best = r, best_a = a;
  }
  double lo = std::max(amin, best_a / std::pow(amax / amin, 1.0 / grid)), hi = std::min(amax, best_a * std::pow(amax / amin, 1.0 / grid));
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = rss(x1), f2 = rss(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    if (f1 < f2) {
      hi = x2, x2 = x1, f2 = f1;
      x1 = hi - g * (hi - lo), f1 = rss(x1);
    } else {
      lo = x1, x1 = x2, f1 = f2;
      x2 = lo + g * (hi - lo), f2 = rss(x2);
    }
  }
  const double a = f1 < f2 ? x1 : x2;
  const Fit f = fit_for(eps, pairings, a);
  e.exponent = a;
  e.limit = f.p0;
  e.coefficient = f.c;
  e.residual = std::sqrt(f.rss / static_cast<double>(N));
  const double dof = static_cast<double>(N) / static_cast<double>(std::max<std::size_t>(N - 3, 1));
  double last_res = std::abs(last - f.p0 - f.c * std::pow(eps.back(), a));
  e.error = std::max(2.0 * e.residual * std::sqrt(dof), last_res) + e.quad_error;

  // Sign changes in consecutive differences indicate an oscillating ladder.
  int flips = 0;
  for (std::size_t i = 2; i < N; ++i) {
    const cplx d1 = pairings[i - 1] - pairings[i - 2], d2 = pairings[i] - pairings[i - 1];
    if (std::real(d1 * std::conj(d2)) < 0.0) ++flips;
  }
  const bool at_edge = a <= amin * 1.0001 || a >= amax * 0.9999;
  const bool wild = std::abs(f.p0 - last) > 10.0 * std::max(std::abs(last - prev), 1e-300) + 10.0 * e.quad_error && std::abs(last - prev) > 0;
  if (at_edge || wild || !f.ok) {
    e.fit_ok = false;
    e.limit = last;
    e.error = std::abs(last - prev) + e.quad_error;
    e.note = "fit ill-conditioned; last value with difference bound";
  }
  if (flips > 1 && e.residual > e.quad_error) {
    e.flagged = true;
    e.error *= 2.0;
    e.note += e.note.empty() ? "non-monotone ladder" : "; non-monotone ladder";
  }
  return e;
}

int foliation_rank(const RegularizedSetup& s) {
  const BundleComplex& c = s.res.chart(0);
  const Box b = s.cover.box(0).intersect(s.cover.domain());
  return c.length() ? c.generic_ranks(b.lo, b.hi)[1] : 0;
}

void check_degree(const RegularizedSetup& s, const SymmetricPolynomial& Phi) {
  const int n = s.dim(), l = Phi.degree();
  if (s.kind == TildeKind::Sheaf) {
    if (l < 1 || l > n) throw ValidationError("sheaf residues need 1 <= deg Phi <= n; got deg " + std::to_string(l) + ", n = " + std::to_string(n));
    return;
  }
  const int kappa = foliation_rank(s);
  if (l <= n - kappa || l > n)
    throw ValidationError("foliation residues need n - kappa < deg Phi <= n; got deg " + std::to_string(l) + ", n = " + std::to_string(n) +
                          ", kappa = " + std::to_string(kappa));
}

CurrentEstimate residue_ladder(const RegularizedSetup& s, const SymmetricPolynomial& Phi, const TestForm& test, const ResidueOptions& opt) {
  check_degree(s, Phi);
  opt.ladder.validate();
  std::vector<cplx> vals;
  std::vector<double> errs;
  for (double eps : opt.ladder.eps) {
    const GlobalForm form = global_phi(s.at(eps), Phi);
    const Pairing p = pair(form, 2 * Phi.degree(), test, s.dim(), s.cover.domain(), opt.quad, shell_refinement(s, eps, opt.quad),
                           opt.quad.skip_vanishing ? vanishing_cells(s, eps) : RefineFn{});
    vals.push_back(p.value);
    errs.push_back(p.error);
  }
  if (vals.size() < 4) {
    CurrentEstimate e;
    e.eps = opt.ladder.eps;
    e.pairings = vals;
    e.quad_errors = errs;
    e.limit = vals.back();
    e.quad_error = *std::max_element(errs.begin(), errs.end());
    e.error = (vals.size() > 1 ? std::abs(vals.back() - vals[vals.size() - 2]) : 0.0) + e.quad_error;
    e.fit_ok = false;
    e.note = "short ladder; last value";
    return e;
  }
  return extrapolate(opt.ladder.eps, vals, errs);
}

std::vector<ResidueResult> residue_current(const RegularizedSetup& s, const SymmetricPolynomial& Phi, const std::vector<TestForm>& tests,
                                           const ResidueOptions& opt) {
  std::vector<ResidueResult> out;
  for (auto& t : tests) {
    ResidueResult r;
    r.test = t;
    r.estimate = residue_ladder(s, Phi, t, opt);
    if (opt.chi_check) {
      RegularizedSetup alt = s;
      alt.regulator.kind = s.regulator.kind == CutoffKind::ExpStep ? CutoffKind::LogStep : CutoffKind::ExpStep;
      r.alternate = residue_ladder(alt, Phi, t, opt);
      r.chi_independent = std::abs(r.estimate.limit - r.alternate.limit) <= r.estimate.error + r.alternate.error + 1e-8;
    }
    out.push_back(std::move(r));
  }
  return out;
}

TestForm localize(const TestForm& test, const std::vector<Bump>& components, std::size_t which) {
  if (which >= components.size()) throw ValidationError("component index out of range");
  for (std::size_t i = 0; i < components.size(); ++i)
    for (std::size_t j = i + 1; j < components.size(); ++j) {
      double d2 = 0.0;
      for (std::size_t k = 0; k < components[i].center.size(); ++k) d2 += std::norm(components[i].center[k] - components[j].center[k]);
      if (std::sqrt(d2) <= components[i].radius + components[j].radius)
        throw ValidationError("neighborhoods of components " + std::to_string(i) + " and " + std::to_string(j) + " overlap");
    }
  return test.times(components[which]);
}

cplx cycle_pairing(const CycleSpec& c, const TestForm& test, int n, const Box& domain, int nodes, double cell) {
  const int deg = test.degree(n);
  cplx total = 0.0;
  for (auto& comp : c.components) {
    if (comp.fixed.size() != comp.values.size()) throw ValidationError("cycle component needs one value per fixed coordinate");
    std::vector<bool> is_fixed(static_cast<std::size_t>(n), false);
    for (int j : comp.fixed) {
      if (j < 0 || j >= n) throw ValidationError("cycle coordinate out of range");
      is_fixed[static_cast<std::size_t>(j)] = true;
    }
    std::vector<int> free;
    for (int j = 0; j < n; ++j)
      if (!is_fixed[static_cast<std::size_t>(j)]) free.push_back(j);
    const int k = static_cast<int>(free.size());
    if (deg != 2 * k) throw ValidationError("test form degree does not match the dimension of the cycle component");
    std::vector<cplx> base(static_cast<std::size_t>(n), 0.0);
    for (std::size_t i = 0; i < comp.fixed.size(); ++i) base[static_cast<std::size_t>(comp.fixed[i])] = comp.values[i];
    if (k == 0) {
      total += static_cast<double>(comp.multiplicity) * test.eval(n, Point{base, {}}, 0).value(0);
      continue;
    }
    Mask m = 0;
    for (int j : free) m |= dz_bit(j) | dzbar_bit(n, j);
    const Box supp = test.support(n).intersect(domain);
    if (supp.empty()) continue;
    Box region{{}, {}};
    for (int j : free) {
      const auto uj = static_cast<std::size_t>(j);
      region.lo.push_back(supp.lo[2 * uj]);
      region.lo.push_back(supp.lo[2 * uj + 1]);
      region.hi.push_back(supp.hi[2 * uj]);
      region.hi.push_back(supp.hi[2 * uj + 1]);
    }
    const cplx dens = density_factor(k);
    cplx acc = 0.0;
    long evals = 0;
    for (auto& cl : initial_cells(region, cell)) {
      acc += tensor_rule(cl, nodes, [&](const std::vector<double>& x) {
        Point pt{base, {}};
        for (int i = 0; i < k; ++i) pt.z[static_cast<std::size_t>(free[static_cast<std::size_t>(i)])] = {x[2 * static_cast<std::size_t>(i)], x[2 * static_cast<std::size_t>(i) + 1]};
        return test.eval(n, pt, 0).value(m) * dens;
      }, evals);
    }
    total += static_cast<double>(comp.multiplicity) * acc;
  }
  return total;
}

CycleCheck fundamental_cycle_check(const RegularizedSetup& s, int p, const CycleSpec& c, const TestForm& test, const ResidueOptions& opt) {
  CycleCheck r;
  r.residue = residue_ladder(s, SymmetricPolynomial::elementary(p), test, opt);
  double coeff = (p - 1) % 2 ? -1.0 : 1.0;
  for (int k = 2; k < p; ++k) coeff *= k;
  r.expected = coeff * cycle_pairing(c, test, s.dim(), s.cover.domain());
  r.relative_error = std::abs(r.residue.limit - r.expected) / std::max(std::abs(r.expected), 1e-300);
  return r;
}

double transgression_defect(const RegularizedSetup& s1, const RegularizedSetup& s2, const SymmetricPolynomial& Phi, double eps,
                            const std::vector<EdgeIso>& mixed, int samples, unsigned seed) {
  const CechSetup c1 = s1.at(eps), c2 = s2.at(eps);
  const GlobalForm eta = transgression_form(c1, c2, Phi, mixed);
  const GlobalForm p1 = global_phi(c1, Phi), p2 = global_phi(c2, Phi);
  const Box dom = s1.cover.domain().intersect(s2.cover.domain());
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  int tries = 0;
  for (int k = 0; k < samples; ++k) {
    Point pt{s1.cover.sample(dom, rng), {}};
    // Half of the points in the cutoff shell of the first setup.
    if (k % 2 == 0) {
      while (tries < 20000) {
        ++tries;
        const double c = s1.chi(eps, pt, 0).value().real();
        if (c > 1e-6 && c < 1.0 - 1e-6) break;
        Box near = dom;
        const double h = 4.0 * std::sqrt(s1.regulator.tau1 * eps);
        for (std::size_t i = 0; i < near.lo.size(); ++i) near.lo[i] = std::max(dom.lo[i], -h), near.hi[i] = std::min(dom.hi[i], h);
        pt.z = s1.cover.sample(near, rng);
      }
    }
    const FormJet lhs = eta(pt, 1).d().truncated(0);
    const FormJet rhs = p2(pt, 0) - p1(pt, 0);
    worst = std::max(worst, (lhs - rhs).max_abs());
  }
  return worst;
}

ComparisonResult comparison_current(const RegularizedSetup& s1, const RegularizedSetup& s2, const SymmetricPolynomial& Phi,
                                    const TestForm& test, const ResidueOptions& opt, const std::vector<EdgeIso>& mixed) {
  check_degree(s1, Phi);
  check_degree(s2, Phi);
  opt.ladder.validate();
  const int n = s1.dim(), l = Phi.degree();
  const Box region = test.support(n).intersect(s1.cover.domain());
  std::vector<cplx> tv, dv;
  std::vector<double> te, de;
  for (double eps : opt.ladder.eps) {
    const SplitFn r1 = shell_refinement(s1, eps, opt.quad), r2 = shell_refinement(s2, eps, opt.quad);
    const SplitFn both = [r1, r2](const Box& b) { return r1(b) | r2(b); };
    RefineFn skip;
    if (opt.quad.skip_vanishing) {
      // Both families compatible: the product family is too, and eta vanishes.
      const RefineFn v1 = vanishing_cells(s1, eps, false), v2 = vanishing_cells(s2, eps, false);
      skip = [v1, v2](const Box& b) { return v1(b) && v2(b); };
    }
    const CechSetup c1 = s1.at(eps), c2 = s2.at(eps);
    const GlobalForm eta = transgression_form(c1, c2, Phi, mixed);
    const Pairing pt = pair(eta, 2 * l - 1, [&](const Point& p) { return test.d_eval(n, p); }, test.degree(n) + 1, n, region, opt.quad, both, skip);
    const GlobalForm p1 = global_phi(c1, Phi), p2 = global_phi(c2, Phi);
    const GlobalForm diff = [p1, p2](const Point& p, int order) { return p2(p, order) - p1(p, order); };
    const Pairing pd = pair(diff, 2 * l, test, n, s1.cover.domain(), opt.quad, both, skip);
    tv.push_back(pt.value);
    te.push_back(pt.error);
    dv.push_back(pd.value);
    de.push_back(pd.error);
  }
  ComparisonResult r;
  if (tv.size() >= 4) {
    r.transgression = extrapolate(opt.ladder.eps, tv, te);
    r.difference = extrapolate(opt.ladder.eps, dv, de);
  } else {
    r.transgression.limit = tv.back();
    r.difference.limit = dv.back();
    r.transgression.quad_error = *std::max_element(te.begin(), te.end());
    r.difference.quad_error = *std::max_element(de.begin(), de.end());
    r.transgression.error = r.transgression.quad_error;
    r.difference.error = r.difference.quad_error;
  }
  r.identity_eps = opt.ladder.eps.front();
  r.identity_defect = transgression_defect(s1, s2, Phi, r.identity_eps, mixed, 30, 7);
  return r;
}

std::vector<cplx> elementary_symmetric(const std::vector<std::vector<cplx>>& J) {
  const Eigen::Index n = static_cast<Eigen::Index>(J.size());
  Eigen::MatrixXcd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = J[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m, false);
  std::vector<cplx> e(static_cast<std::size_t>(n) + 1, 0.0);
  e[0] = 1.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const cplx lam = es.eigenvalues()(k);
    for (std::size_t j = static_cast<std::size_t>(k) + 1; j >= 1; --j) e[j] += lam * e[j - 1];
  }
  return e;
}

namespace {

cplx torus_average(const std::vector<Polynomial>& v, const std::vector<std::vector<Polynomial>>& jac, const SymmetricPolynomial& Phi,
                   double radius, int nodes) {
  const int n = static_cast<int>(v.size());
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  cplx acc = 0.0;
  long count = 0;
  double vmin = std::numeric_limits<double>::infinity(), vmax = 0.0;
  while (true) {
    std::vector<cplx> z(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) z[static_cast<std::size_t>(i)] = std::polar(radius, 2.0 * kPi * (idx[static_cast<std::size_t>(i)] + 0.5) / nodes);
    std::vector<std::vector<cplx>> J(static_cast<std::size_t>(n), std::vector<cplx>(static_cast<std::size_t>(n)));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) J[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = jac[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)](z);
    const std::vector<cplx> e = elementary_symmetric(J);
    cplx phi = 0.0;
    for (auto& t : Phi.terms()) {
      cplx m = t.coeff;
      for (int part : t.parts) m *= part <= n ? e[static_cast<std::size_t>(part)] : 0.0;
      phi += m;
    }
    cplx f = phi;
    for (int i = 0; i < n; ++i) {
      const cplx vi = v[static_cast<std::size_t>(i)](z);
      vmin = std::min(vmin, std::abs(vi));
      vmax = std::max(vmax, std::abs(vi));
      f *= z[static_cast<std::size_t>(i)] / vi;
    }
    acc += f;
    ++count;
    int k = 0;
    while (k < n && ++idx[static_cast<std::size_t>(k)] == nodes) idx[static_cast<std::size_t>(k++)] = 0;
    if (k == n) break;
  }
  if (!(vmin > 1e-6 * std::max(vmax, 1e-300))) throw ValidationError("the torus meets a zero of a component of v; choose another radius");
  return acc / static_cast<double>(count);
}

}  // namespace

cplx grothendieck_oracle(const std::vector<Polynomial>& v, const SymmetricPolynomial& Phi, double radius, int nodes) {
  const int n = static_cast<int>(v.size());
  if (n < 1) throw ValidationError("vector field needs at least one component");
  for (auto& p : v)
    if (!p.is_holomorphic()) throw ValidationError("vector field components must be holomorphic");
  std::vector<std::vector<Polynomial>> jac(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) jac[static_cast<std::size_t>(i)].push_back(v[static_cast<std::size_t>(i)].d_z(j));
  const cplx coarse = torus_average(v, jac, Phi, radius, nodes);
  const cplx fine = torus_average(v, jac, Phi, radius, 2 * nodes);
  // The periodic trapezoid rule converges geometrically and the integral does
  // not depend on the radius, unless a zero of v lies on or near the torus.
  const double tol = 1e-8 * std::max(1.0, std::abs(fine));
  bool ok = std::abs(fine - coarse) <= tol;
  for (double f : {0.98, 1.02}) ok = ok && std::abs(torus_average(v, jac, Phi, f * radius, 2 * nodes) - fine) <= tol;
  if (!ok) throw ValidationError("torus integral is unstable; a zero of v is too close to the torus of radius " + std::to_string(radius));
  return fine;
}

BottProbe bott_vanishing_probe(const RegularizedSetup& s, const SymmetricPolynomial& Phi, const std::vector<Point>& points,
                               const RegularizedSetup* other) {
  BottProbe r;
  const int n = s.dim();
  const JetSpace& sp = JetSpace::get(n, 0);
  for (const Point& pt : points) {
    const auto charts = s.cover.charts_at(pt.z);
    if (charts.empty()) continue;
    const int a = charts.front();
    const std::vector<FormMatrix> th = s.theta_tilde(a, pt, 1);
    std::vector<FormMatrix> Theta;
    for (auto& t : th) Theta.push_back(curvature(t));
    r.single = std::max(r.single, phi_of_curvatures(Phi, Theta, sp, 0).max_abs());
    if (other) {
      const std::vector<FormMatrix> th2 = other->theta_tilde(a, pt, 1);
      r.interpolated = std::max(r.interpolated, interpolated_phi({th, th2}, Phi, n, 0).max_abs());
    }
  }
  return r;
}

}  // namespace chernres
