#include "chernres/simplicial.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <map>
#include <mutex>
#include <sstream>

namespace chernres {

namespace {

bool same_polys(const PolyMatrix& a, const PolyMatrix& b) {
  if (a.rows != b.rows || a.cols != b.cols) return false;
  for (std::size_t k = 0; k < a.e.size(); ++k)
    if (!(a.e[k] - b.e[k]).is_zero()) return false;
  return true;
}

bool same_maps(const BundleComplex& a, const BundleComplex& b) {
  if (a.dim() != b.dim() || a.ranks() != b.ranks()) return false;
  for (int k = 1; k <= a.length(); ++k)
    if (!same_polys(a.phi(k), b.phi(k))) return false;
  return true;
}

Eigen::MatrixXcd values_of(const std::vector<std::vector<cplx>>& v) {
  const Eigen::Index r = static_cast<Eigen::Index>(v.size());
  const Eigen::Index c = r ? static_cast<Eigen::Index>(v[0].size()) : 0;
  Eigen::MatrixXcd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = v[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

FormMatrix truncated(const FormMatrix& m, int order) {
  FormMatrix out(m.rows(), m.cols(), m.chart_dim(), m.simplex_dim());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j).truncated(order);
  return out;
}

FormMatrix left_wedge(const FormJet& w, const FormMatrix& m) {
  FormMatrix out(m.rows(), m.cols(), m.chart_dim(), std::max(w.simplex_dim(), m.simplex_dim()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (!m(i, j).empty()) out(i, j) = wedge(w, m(i, j));
  return out;
}

std::string pair_name(int a, int b) { return "(" + std::to_string(a) + "," + std::to_string(b) + ")"; }

}  // namespace

SimplicialResolution SimplicialResolution::global(BundleComplex c, int charts) {
  SimplicialResolution r;
  r.charts_.assign(static_cast<std::size_t>(std::max(charts, 1)), c);
  r.global_class_.assign(r.charts_.size(), 0);
  return r;
}

SimplicialResolution SimplicialResolution::padded(std::vector<BundleComplex> charts, std::vector<EdgeIso> edges) {
  SimplicialResolution r;
  r.charts_ = std::move(charts);
  r.edges_ = std::move(edges);
  for (std::size_t a = 0; a < r.charts_.size(); ++a) r.global_class_.push_back(static_cast<int>(a));
  for (auto& e : r.edges_)
    if (e.alpha < 0 || e.beta < 0 || e.alpha >= r.size() || e.beta >= r.size())
      throw ValidationError("isomorphism " + pair_name(e.alpha, e.beta) + " refers to a missing chart");
  return r;
}

SimplicialResolution SimplicialResolution::join(const SimplicialResolution& a, const SimplicialResolution& b, std::vector<EdgeIso> mixed) {
  SimplicialResolution r;
  r.charts_ = a.charts_;
  r.charts_.insert(r.charts_.end(), b.charts_.begin(), b.charts_.end());
  r.edges_ = a.edges_;
  const int off = a.size();
  int class_off = 0;
  for (int c : a.global_class_) class_off = std::max(class_off, c + 1);
  r.global_class_ = a.global_class_;
  for (int c : b.global_class_) r.global_class_.push_back(c + class_off);
  for (auto e : b.edges_) {
    e.alpha += off;
    e.beta += off;
    r.edges_.push_back(std::move(e));
  }
  if (mixed.empty()) {
    auto single_class = [](const SimplicialResolution& s) {
      for (int c : s.global_class_)
        if (c != s.global_class_.front()) return false;
      return true;
    };
    if (!single_class(a) || !single_class(b) || !same_maps(a.chart(0), b.chart(0)))
      throw ValidationError("comparison of different resolutions needs isomorphisms between their charts");
    for (std::size_t k = static_cast<std::size_t>(off); k < r.global_class_.size(); ++k) r.global_class_[k] = a.global_class_.front();
  }
  for (auto e : mixed) {
    if (e.alpha < 0 || e.alpha >= a.size() || e.beta < 0 || e.beta >= b.size())
      throw ValidationError("mixed isomorphism " + pair_name(e.alpha, e.beta) + " refers to a missing chart");
    e.beta += off;
    r.edges_.push_back(std::move(e));
  }
  return r;
}

bool SimplicialResolution::identity_transition(int a, int b) const {
  return global_class_[static_cast<std::size_t>(a)] == global_class_[static_cast<std::size_t>(b)];
}

const EdgeIso* SimplicialResolution::find_edge(int a, int b) const {
  for (auto& e : edges_)
    if (e.alpha == a && e.beta == b) return &e;
  return nullptr;
}

std::vector<JetMatrix> SimplicialResolution::transition(int a, int b, const Point& pt, const JetSpace& sp, int order) const {
  std::vector<JetMatrix> g;
  const BundleComplex& c = chart(a);
  if (identity_transition(a, b)) {
    for (int k = 0; k <= c.length(); ++k) g.push_back(JetMatrix::identity(static_cast<std::size_t>(c.rank(k)), sp, order));
    return g;
  }
  if (const EdgeIso* e = find_edge(a, b)) {
    for (auto& m : e->g) g.push_back(m.to_jets(pt, sp, order));
    return g;
  }
  if (const EdgeIso* e = find_edge(b, a)) {
    for (auto& m : e->g) g.push_back(m.to_jets(pt, sp, order).inverse());
    return g;
  }
  throw ValidationError("missing isomorphism between charts " + pair_name(a, b));
}

std::vector<std::string> SimplicialResolution::validate(const Cover& cover, int samples, unsigned seed) const {
  std::vector<std::string> errs;
  if (size() != cover.size()) {
    errs.push_back("resolution has " + std::to_string(size()) + " charts but the cover has " + std::to_string(cover.size()));
    return errs;
  }
  const int n = cover.dim();
  const JetSpace& sp = JetSpace::get(n, 0);
  std::mt19937_64 rng(seed);
  for (int a = 0; a < size(); ++a) {
    if (a > 0 && global_class_[static_cast<std::size_t>(a)] == global_class_[0]) continue;
    try {
      chart(a).validate();
    } catch (const ValidationError& e) {
      errs.push_back("chart " + std::to_string(a) + ": " + e.what());
      continue;
    }
    if (chart(a).ranks() != chart(0).ranks()) errs.push_back("chart " + std::to_string(a) + " has ranks different from chart 0");
    // Exactness at levels >= 1 at generic points of the chart.
    const Box box = cover.box(a).intersect(cover.domain());
    if (box.empty()) continue;
    const BundleComplex& c = chart(a);
    for (int s = 0; s < samples; ++s) {
      const std::vector<cplx> z = cover.sample(box, rng);
      for (int k = 1; k <= c.length(); ++k) {
        const int in = numeric_rank(c.phi(k).values(z));
        const int out = k < c.length() ? numeric_rank(c.phi(k + 1).values(z)) : 0;
        if (in + out != c.rank(k)) {
          std::ostringstream os;
          os << "chart " << a << " is not exact at level " << k << " near z = " << z[0];
          errs.push_back(os.str());
          s = samples;
          break;
        }
      }
    }
  }
  if (!errs.empty()) return errs;

  for (auto& e : edges_) {
    const std::string name = "isomorphism " + pair_name(e.alpha, e.beta);
    const BundleComplex& ca = chart(e.alpha);
    const BundleComplex& cb = chart(e.beta);
    if (static_cast<int>(e.g.size()) != ca.length() + 1) {
      errs.push_back(name + " needs one matrix per level");
      continue;
    }
    bool shapes = true;
    for (int k = 0; k <= ca.length(); ++k) {
      const PolyMatrix& g = e.g[static_cast<std::size_t>(k)];
      if (g.rows != static_cast<std::size_t>(ca.rank(k)) || g.cols != static_cast<std::size_t>(cb.rank(k))) {
        errs.push_back(name + " has the wrong shape at level " + std::to_string(k));
        shapes = false;
      } else if (!g.is_holomorphic()) {
        errs.push_back(name + " is not holomorphic at level " + std::to_string(k));
      }
    }
    if (!shapes) continue;
    for (int k = 1; k <= ca.length(); ++k) {
      const PolyMatrix lhs = ca.phi(k) * e.g[static_cast<std::size_t>(k)];
      const PolyMatrix rhs = e.g[static_cast<std::size_t>(k - 1)] * cb.phi(k);
      if (!same_polys(lhs, rhs)) errs.push_back(name + " does not commute with the differentials at level " + std::to_string(k));
    }
    const Box box = cover.intersection({e.alpha, e.beta});
    if (box.empty()) continue;
    double worst = 1.0;
    for (int s = 0; s < samples; ++s) {
      const std::vector<cplx> z = cover.sample(box, rng);
      for (auto& g : e.g) {
        if (g.rows == 0) continue;
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(values_of(g.values(z)));
        const auto& sv = svd.singularValues();
        worst = std::min(worst, sv(sv.size() - 1) / std::max(sv(0), 1e-300));
      }
    }
    if (worst < 1e-10) errs.push_back(name + " is not invertible on the overlap");
  }
  if (!errs.empty()) return errs;

  for (int a = 0; a < size(); ++a)
    for (int b = a + 1; b < size(); ++b) {
      if (identity_transition(a, b) || !cover.intersects({a, b})) continue;
      if (!find_edge(a, b) && !find_edge(b, a)) errs.push_back("missing isomorphism between charts " + pair_name(a, b));
    }
  if (!errs.empty()) return errs;

  // Cocycle coherence g_ab g_bc = g_ac on triple overlaps.
  for (int a = 0; a < size(); ++a)
    for (int b = 0; b < size(); ++b)
      for (int c = 0; c < size(); ++c) {
        if (a == b || b == c || a == c) continue;
        if (identity_transition(a, b) && identity_transition(b, c)) continue;
        const Box box = cover.intersection({a, b, c});
        if (box.empty()) continue;
        double worst = 0.0;
        for (int s = 0; s < std::max(1, samples / 4); ++s) {
          const Point pt{cover.sample(box, rng), {}};
          const auto gab = transition(a, b, pt, sp, 0);
          const auto gbc = transition(b, c, pt, sp, 0);
          const auto gac = transition(a, c, pt, sp, 0);
          for (std::size_t k = 0; k < gab.size(); ++k) worst = std::max(worst, (gab[k] * gbc[k] - gac[k]).max_abs());
        }
        if (worst > 1e-8) errs.push_back("isomorphisms are not coherent on the triple " + pair_name(a, b) + "," + std::to_string(c));
      }
  return errs;
}

void SimplicialResolution::validate_or_throw(const Cover& cover, int samples, unsigned seed) const {
  const auto errs = validate(cover, samples, seed);
  if (errs.empty()) return;
  std::string msg;
  for (auto& e : errs) msg += (msg.empty() ? "" : "; ") + e;
  throw ValidationError(msg);
}

VertexTheta memoize(VertexTheta f) {
  struct Cache {
    std::mutex mu;
    std::map<std::tuple<int, int, std::vector<double>>, std::vector<FormMatrix>> map;
  };
  auto cache = std::make_shared<Cache>();
  return [cache, f = std::move(f)](int alpha, const Point& pt, int order) {
    std::vector<double> key;
    for (auto& c : pt.z) {
      key.push_back(c.real());
      key.push_back(c.imag());
    }
    auto k = std::make_tuple(alpha, order, std::move(key));
    {
      std::lock_guard<std::mutex> lock(cache->mu);
      auto it = cache->map.find(k);
      if (it != cache->map.end()) return it->second;
    }
    auto v = f(alpha, pt, order);
    std::lock_guard<std::mutex> lock(cache->mu);
    if (cache->map.size() > 20000) cache->map.clear();
    cache->map.emplace(std::move(k), v);
    return v;
  };
}

std::vector<FormMatrix> transport(const std::vector<JetMatrix>& g, const std::vector<FormMatrix>& theta, int n) {
  if (g.size() != theta.size()) throw Error("transport needs one transition per level");
  std::vector<FormMatrix> out;
  out.reserve(theta.size());
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const JetMatrix gi = g[k].inverse();
    const FormMatrix G = g[k].as_forms(n, 0);
    const FormMatrix Gi = gi.as_forms(n, 0);
    out.push_back(G * theta[k] * Gi - g[k].d(n, 0) * Gi);
  }
  return out;
}

FormJet interpolated_phi(const std::vector<std::vector<FormMatrix>>& thetas, const SymmetricPolynomial& Phi, int n, int order) {
  const int p = static_cast<int>(thetas.size()) - 1;
  const JetSpace& sp = JetSpace::get(n, 0);
  const std::size_t levels = thetas[0].size();
  std::vector<std::vector<FormMatrix>> th(thetas.size()), dth(thetas.size());
  for (std::size_t j = 0; j < thetas.size(); ++j)
    for (std::size_t k = 0; k < levels; ++k) {
      th[j].push_back(truncated(thetas[j][k], order).with_simplex_dim(p));
      dth[j].push_back(truncated(thetas[j][k].d(), order).with_simplex_dim(p));
    }
  if (p == 0) {
    std::vector<FormMatrix> Theta;
    for (std::size_t k = 0; k < levels; ++k) Theta.push_back(dth[0][k] + th[0][k] * th[0][k]);
    return phi_of_curvatures(Phi, Theta, sp, order);
  }
  // dt_j wedge (theta_j - theta_0), t-independent.
  std::vector<FormMatrix> jump(levels);
  for (std::size_t k = 0; k < levels; ++k) {
    jump[k] = FormMatrix(th[0][k].rows(), th[0][k].cols(), n, p);
    for (int j = 1; j <= p; ++j) {
      FormJet dt(n, p);
      dt.add(dt_bit(n, j - 1), Jet::constant(sp, order, 1.0));
      jump[k] += left_wedge(dt, th[static_cast<std::size_t>(j)][k] - th[0][k]);
    }
  }
  const SimplexRule rule(p, 2 * Phi.degree());
  auto family = [&](const std::vector<double>& t) {
    double t0 = 1.0;
    for (double v : t) t0 -= v;
    std::vector<FormMatrix> Theta;
    for (std::size_t k = 0; k < levels; ++k) {
      FormMatrix th_t = cplx(t0) * th[0][k];
      FormMatrix dth_t = cplx(t0) * dth[0][k];
      for (int j = 1; j <= p; ++j) {
        th_t += cplx(t[static_cast<std::size_t>(j - 1)]) * th[static_cast<std::size_t>(j)][k];
        dth_t += cplx(t[static_cast<std::size_t>(j - 1)]) * dth[static_cast<std::size_t>(j)][k];
      }
      Theta.push_back(dth_t + jump[k] + th_t * th_t);
    }
    return phi_of_curvatures(Phi, Theta, sp, order);
  };
  return fiber_integrate(family, n, p, rule);
}

double interpolation_identity_defect(const std::vector<std::vector<FormMatrix>>& thetas, const SymmetricPolynomial& Phi, int n) {
  const int p = static_cast<int>(thetas.size()) - 1;
  FormJet acc = interpolated_phi(thetas, Phi, n, 1).d().truncated(0);
  if (p % 2) acc *= -1.0;
  for (int k = 0; k <= p; ++k) {
    auto face = thetas;
    face.erase(face.begin() + k);
    const FormJet v = interpolated_phi(face, Phi, n, 0);
    if (k % 2)
      acc -= v;
    else
      acc += v;
  }
  return acc.max_abs();
}

namespace {

// Connections of the vertices of delta in the frame of its first vertex.
std::vector<std::vector<FormMatrix>> glued_thetas(const CechSetup& s, const Tuple& delta, const Point& pt, int order) {
  const int n = s.cover.dim();
  const JetSpace& sp = JetSpace::get(n, 0);
  const int a0 = delta.front();
  std::vector<std::vector<FormMatrix>> out;
  for (int a : delta) {
    std::vector<FormMatrix> th = s.theta(a, pt, order);
    if (!s.res.identity_transition(a0, a)) th = transport(s.res.transition(a0, a, pt, sp, order + 1), th, n);
    out.push_back(std::move(th));
  }
  return out;
}

}  // namespace

FormJet simplex_phi(const CechSetup& s, const SymmetricPolynomial& Phi, const Tuple& delta, const Point& pt, int order) {
  const int n = s.cover.dim();
  const int p = static_cast<int>(delta.size()) - 1;
  if (p > Phi.degree()) return FormJet(n, 0);
  // A degenerate simplex on one chart carries the pulled-back connection.
  if (p > 0 && std::all_of(delta.begin(), delta.end(), [&](int a) { return a == delta.front(); })) return FormJet(n, 0);
  return interpolated_phi(glued_thetas(s, delta, pt, order + 1), Phi, n, order);
}

Cochain check_phi(const CechSetup& s, const SymmetricPolynomial& Phi) {
  return Cochain(s.cover.dim(), 0, Phi.degree(),
                 [s, Phi](const Tuple& t, const Point& pt, int order) { return simplex_phi(s, Phi, t, pt, order); })
      .memoized();
}

GlobalForm global_phi(const CechSetup& s, const SymmetricPolynomial& Phi) { return psi_global(check_phi(s, Phi), s.cover, true); }

Refinement product_projection(const Cover& u1, const Cover& u2, int which) {
  Refinement r;
  for (int a = 0; a < u1.size(); ++a)
    for (int b = 0; b < u2.size(); ++b) r.rho.push_back(which == 1 ? a : b);
  return r;
}

Cochain transgression_cochain(const CechSetup& s1, const CechSetup& s2, const SymmetricPolynomial& Phi, const std::vector<EdgeIso>& mixed) {
  const int m1 = s1.cover.size();
  CechSetup v;
  v.cover = Cover::disjoint_union(s1.cover, s2.cover);
  v.res = SimplicialResolution::join(s1.res, s2.res, mixed);
  v.theta = [t1 = s1.theta, t2 = s2.theta, m1](int a, const Point& pt, int order) {
    return a < m1 ? t1(a, pt, order) : t2(a - m1, pt, order);
  };
  Refinement r1 = product_projection(s1.cover, s2.cover, 1);
  Refinement r2 = product_projection(s1.cover, s2.cover, 2);
  for (int& b : r2.rho) b += m1;
  return homotopy_h(check_phi(v, Phi), r1, r2).memoized();
}

GlobalForm transgression_form(const CechSetup& s1, const CechSetup& s2, const SymmetricPolynomial& Phi, const std::vector<EdgeIso>& mixed) {
  return psi_global(transgression_cochain(s1, s2, Phi, mixed), Cover::product(s1.cover, s2.cover), false);
}

double bidegree_excess(const FormJet& w, int n, int ell, int p) {
  return w.max_abs([&](Mask m) {
    const int h = mask_degree(holo_part(m, n));
    const int a = mask_degree(antiholo_part(m, n));
    return !(h >= ell && h + a == 2 * ell - p);
  });
}

double face_consistency_defect(const CechSetup& s, const Tuple& delta, const Point& pt, int order) {
  const int n = s.cover.dim();
  const JetSpace& sp = JetSpace::get(n, 0);
  const auto full = glued_thetas(s, delta, pt, order);
  const int m = static_cast<int>(delta.size());
  double worst = 0.0;
  for (unsigned sub = 1; sub < (1u << m); ++sub) {
    Tuple tau;
    std::vector<int> pos;
    for (int j = 0; j < m; ++j)
      if (sub >> j & 1) {
        tau.push_back(delta[static_cast<std::size_t>(j)]);
        pos.push_back(j);
      }
    auto part = glued_thetas(s, tau, pt, order + 1);
    const int b0 = tau.front();
    for (std::size_t i = 0; i < tau.size(); ++i) {
      std::vector<FormMatrix> th = part[i];
      if (!s.res.identity_transition(delta.front(), b0)) th = transport(s.res.transition(delta.front(), b0, pt, sp, order + 1), th, n);
      const auto& ref = full[static_cast<std::size_t>(pos[i])];
      for (std::size_t k = 0; k < th.size(); ++k) worst = std::max(worst, (truncated(th[k], 0) - truncated(ref[k], 0)).max_abs());
    }
  }
  return worst;
}

}  // namespace chernres
