#include "chernres/complexes.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace chernres {

namespace {

constexpr cplx kChernScale(0.0, 1.0 / (2.0 * M_PI));

std::string level_name(int k) { return "E_" + std::to_string(k); }

Eigen::MatrixXcd values_of(const JetMatrix& m) {
  Eigen::MatrixXcd a(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(i, j).value();
  return a;
}

// Ratio of smallest to largest eigenvalue of the h-selfadjoint matrix M.
double conditioning(const JetMatrix& M, const JetMatrix& h) {
  if (M.rows() == 0) return 1.0;
  const Eigen::MatrixXcd hv = values_of(h);
  Eigen::MatrixXcd hm = hv * values_of(M);
  hm = 0.5 * (hm + hm.adjoint()).eval();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXcd> es(hm, 0.5 * (hv + hv.adjoint()));
  const auto& ev = es.eigenvalues();
  const double lo = ev.minCoeff(), hi = ev.maxCoeff();
  if (hi <= 0.0) return 0.0;
  return lo / hi;
}

}  // namespace

BundleComplex::BundleComplex(int n, std::vector<int> ranks, std::vector<PolyMatrix> maps, std::vector<PolyMatrix> metrics, bool foliation)
    : n_(n), ranks_(std::move(ranks)), maps_(std::move(maps)), metrics_(std::move(metrics)), foliation_(foliation) {
  if (ranks_.empty()) throw ValidationError("a complex needs at least the level E_0");
  if (maps_.size() + 1 != ranks_.size())
    throw ValidationError("complex of length " + std::to_string(ranks_.size() - 1) + " needs " + std::to_string(ranks_.size() - 1) + " maps, got " +
                          std::to_string(maps_.size()));
  if (metrics_.empty())
    for (int r : ranks_) metrics_.push_back(PolyMatrix::identity(static_cast<std::size_t>(r), n_));
  if (metrics_.size() != ranks_.size()) throw ValidationError("one metric per level is required");
}

bool BundleComplex::has_identity_metrics() const {
  for (std::size_t k = 0; k < metrics_.size(); ++k) {
    const PolyMatrix id = PolyMatrix::identity(static_cast<std::size_t>(ranks_[k]), n_);
    for (std::size_t i = 0; i < id.e.size(); ++i)
      if (!(metrics_[k].e[i] - id.e[i]).is_zero()) return false;
  }
  return true;
}

bool BundleComplex::is_complex() const {
  for (int k = 1; k < length(); ++k)
    if (!(phi(k) * phi(k + 1)).is_zero()) return false;
  return true;
}

void BundleComplex::validate() const {
  std::vector<std::string> errs;
  for (int k = 1; k <= length(); ++k) {
    const PolyMatrix& m = phi(k);
    if (m.rows != static_cast<std::size_t>(rank(k - 1)) || m.cols != static_cast<std::size_t>(rank(k)))
      errs.push_back("phi_" + std::to_string(k) + " must be " + std::to_string(rank(k - 1)) + "x" + std::to_string(rank(k)));
    else if (!m.is_holomorphic())
      errs.push_back("phi_" + std::to_string(k) + " is not holomorphic (conjugates are not permitted in maps)");
  }
  for (int k = 0; k <= length(); ++k) {
    const PolyMatrix& h = metric(k);
    if (h.rows != static_cast<std::size_t>(rank(k)) || h.cols != h.rows) {
      errs.push_back("metric on " + level_name(k) + " has the wrong shape");
      continue;
    }
    for (std::size_t i = 0; i < h.rows; ++i)
      for (std::size_t j = 0; j < h.cols; ++j)
        if (!(h.at(i, j) - h.at(j, i).conj()).is_zero()) errs.push_back("metric on " + level_name(k) + " is not Hermitian");
  }
  if (errs.empty() && !is_complex()) errs.push_back("phi_k phi_{k+1} != 0: the maps do not form a complex");
  if (foliation_ && rank(0) != n_) errs.push_back("foliation mode needs E_0 = TM of rank " + std::to_string(n_));
  if (errs.empty()) {
    // Positive definiteness at sample points of the unit polydisc.
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int s = 0; s < 20 && errs.empty(); ++s) {
      std::vector<cplx> z(static_cast<std::size_t>(n_));
      for (auto& c : z) c = {u(rng), u(rng)};
      for (int k = 0; k <= length(); ++k) {
        if (rank(k) == 0) continue;
        const auto v = metric(k).values(z);
        Eigen::MatrixXcd a(rank(k), rank(k));
        for (int i = 0; i < rank(k); ++i)
          for (int j = 0; j < rank(k); ++j) a(i, j) = v[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a);
        if (es.eigenvalues().minCoeff() <= 0.0) {
          errs.push_back("metric on " + level_name(k) + " is not positive definite at a sample point");
          break;
        }
      }
    }
  }
  if (!errs.empty()) {
    std::string msg;
    for (auto& e : errs) msg += (msg.empty() ? "" : "; ") + e;
    throw ValidationError(msg);
  }
}

std::vector<int> BundleComplex::generic_ranks(const std::vector<double>& lower, const std::vector<double>& upper, unsigned seed) const {
  std::vector<int> r(static_cast<std::size_t>(length()) + 1, 0);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int s = 0; s < 8; ++s) {
    std::vector<cplx> z(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      const double x = lower[2 * ui] + (upper[2 * ui] - lower[2 * ui]) * u(rng);
      const double y = lower[2 * ui + 1] + (upper[2 * ui + 1] - lower[2 * ui + 1]) * u(rng);
      z[ui] = {x, y};
    }
    for (int k = 1; k <= length(); ++k) r[static_cast<std::size_t>(k)] = std::max(r[static_cast<std::size_t>(k)], numeric_rank(phi(k).values(z)));
  }
  return r;
}

BundleComplex::At BundleComplex::eval(const Point& pt, const JetSpace& sp, int order) const {
  At a;
  a.phi.resize(static_cast<std::size_t>(length()) + 1);
  for (int k = 1; k <= length(); ++k) a.phi[static_cast<std::size_t>(k)] = phi(k).to_jets(pt, sp, order);
  for (int k = 0; k <= length(); ++k) a.h.push_back(metric(k).to_jets(pt, sp, order));
  return a;
}

ConnectionFamily ConnectionFamily::trivial(const BundleComplex& c) {
  std::vector<FormPolyMatrix> th;
  for (int r : c.ranks()) th.push_back(FormPolyMatrix::zero(static_cast<std::size_t>(r), c.dim()));
  return ConnectionFamily(std::move(th), true);
}

bool ConnectionFamily::is_10(int n) const {
  return std::all_of(theta_.begin(), theta_.end(), [n](const FormPolyMatrix& m) { return m.is_10(n); });
}

bool ConnectionFamily::is_trivial() const {
  return std::all_of(theta_.begin(), theta_.end(), [](const FormPolyMatrix& m) { return m.is_zero(); });
}

std::vector<FormMatrix> ConnectionFamily::eval(const Point& pt, const JetSpace& sp, int order, int n, int p) const {
  std::vector<FormMatrix> out;
  out.reserve(theta_.size());
  for (auto& t : theta_) out.push_back(t.eval(pt, sp, order, n, p));
  return out;
}

SymmetricPolynomial::SymmetricPolynomial(std::vector<Monomial> terms) {
  std::map<std::vector<int>, cplx> acc;
  for (auto& t : terms) {
    std::vector<int> parts = t.parts;
    std::sort(parts.begin(), parts.end());
    for (int x : parts)
      if (x < 1) throw ValidationError("elementary symmetric generators are e_1, e_2, ...");
    acc[parts] += t.coeff;
  }
  degree_ = -1;
  for (auto& [parts, c] : acc) {
    if (c == cplx{}) continue;
    const int d = std::accumulate(parts.begin(), parts.end(), 0);
    if (degree_ >= 0 && d != degree_) throw ValidationError("symmetric polynomial is not homogeneous (degrees " + std::to_string(degree_) + " and " + std::to_string(d) + ")");
    degree_ = d;
    terms_.push_back({c, parts});
  }
  if (degree_ < 0) degree_ = 0;
}

SymmetricPolynomial SymmetricPolynomial::elementary(int l) { return SymmetricPolynomial(std::vector<Monomial>{Monomial{cplx(1.0), {l}}}); }

namespace {

constexpr int kMaxGenerators = 8;

// Newton's identities as polynomials in the variables e_k -> z_k.
Polynomial power_sum_poly(int k) {
  std::vector<Polynomial> p(static_cast<std::size_t>(k) + 1, Polynomial(kMaxGenerators));
  for (int m = 1; m <= k; ++m) {
    Polynomial acc = Polynomial::z(kMaxGenerators, m - 1) * ((m % 2 ? 1.0 : -1.0) * m);
    for (int i = 1; i < m; ++i) acc += Polynomial::z(kMaxGenerators, i - 1) * p[static_cast<std::size_t>(m - i)] * (i % 2 ? 1.0 : -1.0);
    p[static_cast<std::size_t>(m)] = acc;
  }
  return p[static_cast<std::size_t>(k)];
}

SymmetricPolynomial from_poly(const Polynomial& poly) {
  std::vector<SymmetricPolynomial::Monomial> terms;
  for (auto& [e, c] : poly.terms()) {
    std::vector<int> parts;
    for (int k = 0; k < kMaxGenerators; ++k)
      for (int r = 0; r < e[static_cast<std::size_t>(k)]; ++r) parts.push_back(k + 1);
    terms.push_back({c, parts});
  }
  return SymmetricPolynomial(std::move(terms));
}

}  // namespace

SymmetricPolynomial SymmetricPolynomial::power_sum(int k) {
  if (k < 1 || k > kMaxGenerators) throw ValidationError("power sum index out of range");
  return from_poly(power_sum_poly(k));
}

SymmetricPolynomial SymmetricPolynomial::parse(const std::string& text) {
  const SymbolResolver resolver = [](const std::string& name) -> std::optional<Polynomial> {
    if (name.size() < 2) return std::nullopt;
    const char head = name[0];
    const std::string digits = name.substr(1);
    if (!std::all_of(digits.begin(), digits.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) return std::nullopt;
    const int k = std::stoi(digits);
    if (k < 1 || k > kMaxGenerators) return std::nullopt;
    if (head == 'e' || head == 'c') return Polynomial::z(kMaxGenerators, k - 1);
    if (head == 'p') return power_sum_poly(k);
    return std::nullopt;
  };
  // The generator names shadow nothing in the polynomial grammar except z/x/y,
  // which are not valid here; parse over zero chart variables.
  const Polynomial p = parse_polynomial(text, kMaxGenerators, resolver);
  for (auto& [e, c] : p.terms())
    for (int k = kMaxGenerators; k < 2 * kMaxGenerators; ++k)
      if (e[static_cast<std::size_t>(k)]) throw ValidationError("conjugates are not allowed in a symmetric polynomial");
  if (text.find('z') != std::string::npos) throw ValidationError("use e<k> or p<k> generators in \"" + text + "\"");
  return from_poly(p);
}

std::string SymmetricPolynomial::to_string() const {
  std::ostringstream os;
  bool first = true;
  for (auto& t : terms_) {
    if (!first) os << " + ";
    first = false;
    if (t.coeff != cplx(1.0)) {
      os << "(" << t.coeff.real();
      if (t.coeff.imag() != 0.0) os << (t.coeff.imag() < 0 ? "-" : "+") << std::abs(t.coeff.imag()) << "i";
      os << ")*";
    }
    for (std::size_t i = 0; i < t.parts.size(); ++i) os << (i ? "*" : "") << "e" << t.parts[i];
  }
  return os.str();
}

FormMatrix curvature(const FormMatrix& theta) { return theta.d() + theta * theta; }

FormJet total_chern(const FormMatrix& Theta, const JetSpace& sp, int order) {
  const std::size_t r = Theta.rows();
  const int n = Theta.chart_dim(), p = Theta.simplex_dim();
  const FormJet one = FormJet::scalar(n, p, Jet::constant(sp, order, 1.0));
  if (r == 0) return one;
  // Entries of I + (i/2pi) Theta; all even, so they commute.
  std::vector<FormJet> m(r * r);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j) {
      FormJet e = Theta(i, j).truncated(std::min(order, Theta(i, j).empty() ? order : Theta(i, j).min_order()));
      e *= kChernScale;
      if (i == j) e += one;
      m[i * r + j] = std::move(e);
    }
  FormJet det(n, p);
  std::vector<bool> used(r, false);
  // Leibniz expansion with pruning of empty entries.
  std::function<void(std::size_t, const FormJet&, int)> rec = [&](std::size_t row, const FormJet& acc, int sign) {
    if (row == r) {
      det += sign > 0 ? acc : -acc;
      return;
    }
    int below = 0;
    for (std::size_t c = 0; c < r; ++c) {
      if (used[c]) continue;
      const FormJet& e = m[row * r + c];
      if (!e.empty()) {
        used[c] = true;
        FormJet next = wedge(acc, e);
        if (!next.empty()) rec(row + 1, next, (below % 2) ? -sign : sign);
        used[c] = false;
      }
      ++below;
    }
  };
  rec(0, one, 1);
  return det;
}

std::vector<FormJet> chern_parts(const FormJet& total, int max_l) {
  std::vector<FormJet> e;
  for (int j = 0; j <= max_l; ++j) e.push_back(total.degree_part(2 * j));
  return e;
}

std::vector<FormJet> chern_forms(const FormMatrix& Theta, int max_l, const JetSpace& sp, int order) {
  return chern_parts(total_chern(Theta, sp, order), max_l);
}

FormJet inverse_total(const FormJet& c, const JetSpace& sp, int order) {
  const int n = c.chart_dim(), p = c.simplex_dim();
  const FormJet one = FormJet::scalar(n, p, Jet::constant(sp, order, 1.0));
  FormJet x = c.filter([](Mask m) { return m != 0u; });
  const Jet* c0 = c.find(0u);
  if (!c0 || std::abs(c0->value() - 1.0) > 1e-12 || !(*c0 - Jet::constant(sp, c0->order(), 1.0)).is_zero(1e-12))
    throw Error("inverse_total expects a form with constant part 1");
  FormJet result = one, power = one;
  const int max_terms = (2 * n + p) / 2;
  for (int k = 1; k <= max_terms; ++k) {
    power = -wedge(power, x);
    if (power.empty()) break;
    result += power;
  }
  return result;
}

FormJet mixed_chern_total(const std::vector<FormMatrix>& Thetas, const JetSpace& sp, int order) {
  if (Thetas.empty()) throw Error("mixed Chern form of an empty family");
  FormJet num = FormJet::scalar(Thetas[0].chart_dim(), Thetas[0].simplex_dim(), Jet::constant(sp, order, 1.0));
  FormJet den = num;
  for (std::size_t k = 0; k < Thetas.size(); ++k) {
    const FormJet c = total_chern(Thetas[k], sp, order);
    if (k % 2 == 0)
      num = wedge(num, c);
    else
      den = wedge(den, c);
  }
  return wedge(num, inverse_total(den, sp, order));
}

std::vector<FormJet> mixed_chern(const std::vector<FormMatrix>& Thetas, int max_l, const JetSpace& sp, int order) {
  return chern_parts(mixed_chern_total(Thetas, sp, order), max_l);
}

FormJet phi_form(const SymmetricPolynomial& Phi, const std::vector<FormJet>& e) {
  if (e.empty()) throw Error("phi_form needs e_0");
  FormJet out(e[0].chart_dim(), e[0].simplex_dim());
  for (auto& t : Phi.terms()) {
    FormJet prod = e[0];
    for (int part : t.parts) {
      if (part >= static_cast<int>(e.size())) {
        prod = FormJet(e[0].chart_dim(), e[0].simplex_dim());
        break;
      }
      prod = wedge(prod, e[static_cast<std::size_t>(part)]);
    }
    out += t.coeff * prod;
  }
  return out;
}

FormJet phi_of_curvatures(const SymmetricPolynomial& Phi, const std::vector<FormMatrix>& Thetas, const JetSpace& sp, int order) {
  return phi_form(Phi, mixed_chern(Thetas, Phi.degree(), sp, order));
}

JetMatrix metric_adjoint(const JetMatrix& phi, const JetMatrix& h_src, const JetMatrix& h_tgt) {
  return h_src.inverse() * (phi.adjoint() * h_tgt);
}

std::vector<JetMatrix> minimal_inverses(const BundleComplex::At& c, double threshold) {
  const int N = static_cast<int>(c.phi.size()) - 1;
  std::vector<JetMatrix> adj(static_cast<std::size_t>(N) + 2);
  for (int k = 1; k <= N; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    adj[uk] = metric_adjoint(c.phi[uk], c.h[uk], c.h[uk - 1]);
  }
  std::vector<JetMatrix> sigma(static_cast<std::size_t>(N) + 1);
  for (int k = 1; k <= N; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    const JetMatrix& phi = c.phi[uk];
    // Laplacian on E_k: phi_k^* phi_k + phi_{k+1} phi_{k+1}^*.
    JetMatrix M = adj[uk] * phi;
    if (k < N) M = M + c.phi[uk + 1] * adj[uk + 1];
    if (conditioning(M, c.h[uk]) >= threshold) {
      sigma[uk] = M.inverse() * adj[uk];
      continue;
    }
    // Laplacian on E_{k-1}: phi_k phi_k^* + phi_{k-1}^* phi_{k-1}.
    JetMatrix L = phi * adj[uk];
    if (k > 1) L = L + adj[uk - 1] * c.phi[uk - 1];
    if (conditioning(L, c.h[uk - 1]) >= threshold) {
      sigma[uk] = adj[uk] * L.inverse();
      continue;
    }
    throw SingularPoint("phi_" + std::to_string(k) + " drops rank at this point (conditioning below " + std::to_string(threshold) + ")");
  }
  return sigma;
}

std::vector<FormMatrix> d_phi(const BundleComplex::At& c, const std::vector<FormMatrix>& theta, int n, int p) {
  const int N = static_cast<int>(c.phi.size()) - 1;
  std::vector<FormMatrix> out(static_cast<std::size_t>(N) + 1);
  for (int k = 1; k <= N; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    const FormMatrix phi = c.phi[uk].as_forms(n, p);
    out[uk] = c.phi[uk].d(n, p) + theta[uk - 1] * phi - phi * theta[uk];
  }
  return out;
}

double compatibility_defect(const BundleComplex::At& c, const std::vector<FormMatrix>& theta, int n, int p) {
  double worst = 0.0;
  for (auto& m : d_phi(c, theta, n, p)) {
    double fro = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = 0; j < m.cols(); ++j)
        for (auto& [mask, f] : m(i, j).terms()) fro += std::norm(f.value());
    worst = std::max(worst, std::sqrt(fro));
  }
  return worst;
}

TildeAt sheaf_tilde(const BundleComplex::At& c, const std::vector<FormMatrix>& theta, int n, int p, double threshold) {
  const int N = static_cast<int>(c.phi.size()) - 1;
  TildeAt t;
  t.sigma = minimal_inverses(c, threshold);
  const std::vector<FormMatrix> dphi = d_phi(c, theta, n, p);
  t.a.resize(static_cast<std::size_t>(N) + 1);
  t.a[0] = FormMatrix(theta[0].rows(), theta[0].cols(), n, p);
  for (int k = 1; k <= N; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    // a_k = -sigma_k D phi_k in the graded sense.
    const EndForm sigma{k, k - 1, t.sigma[uk].as_forms(n, p)};
    const EndForm dp{k - 1, k, dphi[uk]};
    t.a[uk] = cplx(-1.0) * super_compose(sigma, dp).m;
  }
  return t;
}

FormMatrix build_b(const FormMatrix& A, int n, double sign) {
  const std::size_t r = A.rows();
  if (r != static_cast<std::size_t>(n) || A.cols() != r) throw ValidationError("b needs End(TM)-valued input");
  FormMatrix b(r, r, n, A.simplex_dim());
  for (std::size_t j = 0; j < r; ++j)
    for (std::size_t k = 0; k < r; ++k)
      for (std::size_t m = 0; m < r; ++m) {
        // (B_m)^j_k = (A_k)^j_m: coefficient of dz_k in A(j, m), placed on dz_m.
        const Jet* coef = A(j, m).find(dz_bit(static_cast<int>(k)));
        if (!coef) continue;
        b(j, k).add(dz_bit(static_cast<int>(m)), *coef * cplx(sign));
      }
  return b;
}

TildeAt foliation_tilde(const BundleComplex::At& c, const std::vector<FormMatrix>& theta, int n, int p, double b_sign, double threshold) {
  const int N = static_cast<int>(c.phi.size()) - 1;
  if (N < 1) throw ValidationError("foliation complex needs phi_1");
  TildeAt t;
  t.sigma = minimal_inverses(c, threshold);
  const std::vector<FormMatrix> dphi = d_phi(c, theta, n, p);
  t.a.resize(static_cast<std::size_t>(N) + 1);
  const JetSpace& sp = c.phi[1](0, 0).space();
  const int order = t.sigma[1](0, 0).order();
  const FormMatrix A = super_compose(EndForm{0, 1, dphi[1]}, EndForm{1, 0, t.sigma[1].as_forms(n, p)}).m;
  t.b = build_b(A, n, b_sign);
  const FormMatrix P = (JetMatrix::identity(static_cast<std::size_t>(n), sp, order) - c.phi[1] * t.sigma[1]).as_forms(n, p);
  t.a[0] = t.b * P - A;
  for (int k = 1; k < N; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    t.a[uk] = cplx(-1.0) * super_compose(EndForm{k, k + 1, dphi[uk + 1]}, EndForm{k + 1, k, t.sigma[uk + 1].as_forms(n, p)}).m;
  }
  t.a[static_cast<std::size_t>(N)] = FormMatrix(theta[static_cast<std::size_t>(N)].rows(), theta[static_cast<std::size_t>(N)].cols(), n, p);
  return t;
}

double basic_defect(const BundleComplex& c, const std::vector<FormMatrix>& theta_tilde, const Point& pt, const Polynomial& f, int g,
                    const std::vector<Polynomial>& v, double threshold) {
  const int n = c.dim();
  const JetSpace& sp = JetSpace::get(n, 0);
  const BundleComplex::At at = c.eval(pt, sp, 0);
  const std::vector<JetMatrix> sigma = minimal_inverses(at, threshold);
  Eigen::MatrixXcd P = Eigen::MatrixXcd::Identity(n, n) - values_of(at.phi[1]) * values_of(sigma[1]);
  std::vector<Polynomial> u;
  for (int i = 0; i < n; ++i) u.push_back(f * c.phi(1).at(static_cast<std::size_t>(i), static_cast<std::size_t>(g)));
  Eigen::VectorXcd lhs = Eigen::VectorXcd::Zero(n), bracket = Eigen::VectorXcd::Zero(n);
  for (int j = 0; j < n; ++j) {
    const auto uj = static_cast<std::size_t>(j);
    for (int m = 0; m < n; ++m) {
      const auto um = static_cast<std::size_t>(m);
      const cplx um_val = u[um](pt.z);
      lhs(j) += um_val * v[uj].d_z(m)(pt.z);
      bracket(j) += um_val * v[uj].d_z(m)(pt.z) - v[um](pt.z) * u[uj].d_z(m)(pt.z);
      // i(u) theta0 v: theta0(j, k) dz_m coefficient times u^m v^k.
      for (int k = 0; k < n; ++k) lhs(j) += um_val * theta_tilde[0](uj, static_cast<std::size_t>(k)).value(dz_bit(m)) * v[static_cast<std::size_t>(k)](pt.z);
    }
  }
  return (P * (lhs - bracket)).norm();
}

CutoffKind parse_cutoff(const std::string& name) {
  if (name == "exp-step" || name == "exp") return CutoffKind::ExpStep;
  if (name == "log-step" || name == "log") return CutoffKind::LogStep;
  throw ValidationError("unknown cutoff '" + name + "' (expected exp-step or log-step)");
}

std::string cutoff_name(CutoffKind k) { return k == CutoffKind::ExpStep ? "exp-step" : "log-step"; }

Jet cutoff(CutoffKind kind, const Jet& u, double tau0, double tau1) {
  const JetSpace& sp = u.space();
  const double u0 = u.value().real();
  if (u0 <= tau0) return Jet::constant(sp, u.order(), 0.0);
  if (u0 >= tau1) return Jet::constant(sp, u.order(), 1.0);
  if (kind == CutoffKind::ExpStep) return smooth_step((u - Jet::constant(sp, u.order(), tau0)) * cplx(1.0 / (tau1 - tau0)));
  return smooth_step((log(u * cplx(1.0 / tau0))) * cplx(1.0 / std::log(tau1 / tau0)));
}

RegulatorSection RegulatorSection::from(std::vector<Polynomial> s, int n) {
  RegulatorSection r;
  r.s = std::move(s);
  r.abs2 = Polynomial(n);
  if (r.s.empty()) {
    r.abs2 = Polynomial::constant(n, 1.0);
    return r;
  }
  for (auto& p : r.s) r.abs2 += p * p.conj();
  return r;
}

namespace {

Polynomial poly_det(const PolyMatrix& m, const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols) {
  const std::size_t k = rows.size();
  const int n = m.e.empty() ? 0 : m.e[0].dim();
  if (k == 0) return Polynomial::constant(n, 1.0);
  if (k == 1) return m.at(rows[0], cols[0]);
  Polynomial acc(n);
  for (std::size_t c = 0; c < k; ++c) {
    std::vector<std::size_t> sub_rows(rows.begin() + 1, rows.end());
    std::vector<std::size_t> sub_cols;
    for (std::size_t j = 0; j < k; ++j)
      if (j != c) sub_cols.push_back(cols[j]);
    Polynomial t = m.at(rows[0], cols[c]) * poly_det(m, sub_rows, sub_cols);
    if (c % 2) t *= -1.0;
    acc += t;
  }
  return acc;
}

void subsets(std::size_t n, std::size_t k, std::size_t start, std::vector<std::size_t>& cur, std::vector<std::vector<std::size_t>>& out) {
  if (cur.size() == k) {
    out.push_back(cur);
    return;
  }
  for (std::size_t i = start; i < n; ++i) {
    cur.push_back(i);
    subsets(n, k, i + 1, cur, out);
    cur.pop_back();
  }
}

}  // namespace

RegulatorSection default_section(const BundleComplex& c, int rho) {
  const int n = c.dim();
  if (c.length() < 1 || rho == 0) return RegulatorSection::from({}, n);
  const PolyMatrix& phi = c.phi(1);
  std::vector<std::vector<std::size_t>> rs, cs;
  std::vector<std::size_t> cur;
  subsets(phi.rows, static_cast<std::size_t>(rho), 0, cur, rs);
  subsets(phi.cols, static_cast<std::size_t>(rho), 0, cur, cs);
  std::vector<Polynomial> minors;
  for (auto& r : rs)
    for (auto& cc : cs) {
      Polynomial d = poly_det(phi, r, cc);
      if (!d.is_zero()) minors.push_back(std::move(d));
    }
  if (minors.empty()) return RegulatorSection::from({}, n);
  return RegulatorSection::from(std::move(minors), n);
}

std::vector<FormMatrix> regularize(const std::vector<FormMatrix>& theta, const TildeAt& tilde, const Jet& chi) {
  std::vector<FormMatrix> out = theta;
  for (std::size_t k = 0; k < out.size() && k < tilde.a.size(); ++k) out[k] += chi * tilde.a[k];
  return out;
}

}  // namespace chernres
