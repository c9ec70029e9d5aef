#include "chernres/forms.hpp"

#include <algorithm>

namespace chernres {

namespace {

void merge_terms(std::vector<FormJet::Term>& terms) {
  std::stable_sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::size_t out = 0;
  for (std::size_t i = 0; i < terms.size();) {
    std::size_t j = i + 1;
    Jet acc = std::move(terms[i].second);
    while (j < terms.size() && terms[j].first == terms[i].first) acc += terms[j++].second;
    terms[out].first = terms[i].first;
    terms[out].second = std::move(acc);
    ++out;
    i = j;
  }
  terms.resize(out);
}

int form_parity(Mask m) { return mask_degree(m) & 1; }

}  // namespace

FormJet FormJet::scalar(int n, int p, const Jet& f) {
  FormJet w(n, p);
  w.terms_.emplace_back(0u, f);
  return w;
}

void FormJet::add(Mask m, const Jet& c) {
  auto it = std::lower_bound(terms_.begin(), terms_.end(), m, [](const Term& t, Mask k) { return t.first < k; });
  if (it != terms_.end() && it->first == m)
    it->second += c;
  else
    terms_.insert(it, Term{m, c});
}

const Jet* FormJet::find(Mask m) const {
  auto it = std::lower_bound(terms_.begin(), terms_.end(), m, [](const Term& t, Mask k) { return t.first < k; });
  if (it != terms_.end() && it->first == m) return &it->second;
  return nullptr;
}

cplx FormJet::value(Mask m) const {
  const Jet* j = find(m);
  return j ? j->value() : cplx{};
}

FormJet& FormJet::operator+=(const FormJet& o) {
  if (terms_.empty() && n_ == 0) {
    n_ = o.n_;
    p_ = o.p_;
  }
  if (o.terms_.empty()) return *this;
  std::vector<Term> merged;
  merged.reserve(terms_.size() + o.terms_.size());
  std::size_t i = 0, j = 0;
  while (i < terms_.size() || j < o.terms_.size()) {
    if (j == o.terms_.size() || (i < terms_.size() && terms_[i].first < o.terms_[j].first)) {
      merged.push_back(std::move(terms_[i++]));
    } else if (i == terms_.size() || o.terms_[j].first < terms_[i].first) {
      merged.push_back(o.terms_[j++]);
    } else {
      merged.push_back(std::move(terms_[i++]));
      merged.back().second += o.terms_[j++].second;
    }
  }
  terms_ = std::move(merged);
  p_ = std::max(p_, o.p_);
  return *this;
}

FormJet& FormJet::operator-=(const FormJet& o) { return *this += -o; }

FormJet& FormJet::operator*=(cplx s) {
  for (auto& t : terms_) t.second *= s;
  return *this;
}

FormJet FormJet::operator-() const {
  FormJet w = *this;
  for (auto& t : w.terms_) t.second = -t.second;
  return w;
}

FormJet operator*(const Jet& f, const FormJet& a) {
  FormJet w(a.n_, a.p_);
  w.terms_.reserve(a.terms_.size());
  for (auto& t : a.terms_) w.terms_.emplace_back(t.first, f * t.second);
  return w;
}

FormJet wedge(const FormJet& a, const FormJet& b) {
  FormJet w(a.n_, std::max(a.p_, b.p_));
  if (a.terms_.empty() || b.terms_.empty()) return w;
  w.terms_.reserve(a.terms_.size() * b.terms_.size());
  for (auto& ta : a.terms_)
    for (auto& tb : b.terms_) {
      const int s = wedge_sign(ta.first, tb.first);
      if (!s) continue;
      Jet c = ta.second * tb.second;
      if (s < 0) c = -c;
      w.terms_.emplace_back(ta.first | tb.first, std::move(c));
    }
  merge_terms(w.terms_);
  return w;
}

FormJet FormJet::exterior(int var_lo, int var_hi) const {
  FormJet w(n_, p_);
  for (auto& [m, f] : terms_) {
    const int nv = f.space().nvars();
    for (int v = var_lo; v < std::min(var_hi, nv); ++v) {
      const Mask bit = Mask{1} << v;
      const int s = wedge_sign(bit, m);
      if (!s) continue;
      Jet df = f.derivative(v);
      if (s < 0) df = -df;
      w.terms_.emplace_back(m | bit, std::move(df));
    }
  }
  merge_terms(w.terms_);
  return w;
}

FormJet FormJet::d() const { return exterior(0, 2 * n_ + p_); }
FormJet FormJet::partial_d() const { return exterior(0, n_); }
FormJet FormJet::bar_d() const { return exterior(n_, 2 * n_); }
FormJet FormJet::simplex_d() const { return exterior(2 * n_, 2 * n_ + p_); }

FormJet FormJet::degree_part(int k) const {
  return filter([k](Mask m) { return mask_degree(m) == k; });
}

FormJet FormJet::filter(const std::function<bool(Mask)>& keep) const {
  FormJet w(n_, p_);
  for (auto& t : terms_)
    if (keep(t.first)) w.terms_.push_back(t);
  return w;
}

FormJet FormJet::with_simplex_dim(int p) const {
  FormJet w = *this;
  for (auto& t : terms_)
    if (simplex_part(t.first, n_) >> p) throw Error("form has dt components beyond the target simplex dimension");
  w.p_ = p;
  return w;
}

FormJet FormJet::truncated(int order) const {
  FormJet w(n_, p_);
  for (auto& t : terms_) w.terms_.emplace_back(t.first, t.second.truncated(order));
  return w;
}

int FormJet::min_order() const {
  int o = kMaxJetOrder;
  for (auto& t : terms_) o = std::min(o, t.second.order());
  return o;
}

double FormJet::max_abs() const {
  double m = 0.0;
  for (auto& t : terms_) m = std::max(m, std::abs(t.second.value()));
  return m;
}

double FormJet::max_abs(const std::function<bool(Mask)>& on) const {
  double m = 0.0;
  for (auto& t : terms_)
    if (on(t.first)) m = std::max(m, std::abs(t.second.value()));
  return m;
}

GradedForm GradedForm::scalar(int n, int p, const ScalarField& f) { return basis(n, p, 0u, f); }

GradedForm GradedForm::basis(int n, int p, Mask m, const ScalarField& f) {
  GradedForm g(n, p);
  g.add(m, f);
  return g;
}

GradedForm GradedForm::from_poly_form(int n, int p, const PolyForm& pf) {
  GradedForm g(n, p);
  for (auto& [m, poly] : pf) g.add(m, ScalarField::polynomial(poly));
  return g;
}

void GradedForm::add(Mask m, const ScalarField& f) {
  if (simplex_part(m, n_) >> p_) throw Error("basis monomial outside the form's simplex dimension");
  if (f.is_zero()) return;
  auto it = terms_.find(m);
  if (it == terms_.end())
    terms_.emplace(m, f);
  else
    it->second = it->second + f;
}

FormJet GradedForm::eval(const Point& pt, int order) const {
  const JetSpace& sp = JetSpace::get(n_, p_);
  FormJet w(n_, p_);
  for (auto& [m, f] : terms_) w.add(m, f.eval(pt, sp, order));
  return w;
}

GradedForm operator+(const GradedForm& a, const GradedForm& b) {
  if (a.n_ != b.n_ || a.p_ != b.p_) throw ValidationError("form dimension mismatch");
  GradedForm g = a;
  for (auto& [m, f] : b.terms_) g.add(m, f);
  return g;
}

GradedForm operator-(const GradedForm& a, const GradedForm& b) {
  if (a.n_ != b.n_ || a.p_ != b.p_) throw ValidationError("form dimension mismatch");
  GradedForm g = a;
  for (auto& [m, f] : b.terms_) g.add(m, -f);
  return g;
}

GradedForm operator*(const ScalarField& f, const GradedForm& a) {
  GradedForm g(a.n_, a.p_);
  for (auto& [m, c] : a.terms_) g.add(m, f * c);
  return g;
}

GradedForm wedge(const GradedForm& a, const GradedForm& b) {
  if (a.n_ != b.n_ || a.p_ != b.p_) throw ValidationError("form dimension mismatch");
  GradedForm g(a.n_, a.p_);
  for (auto& [ma, fa] : a.terms_)
    for (auto& [mb, fb] : b.terms_) {
      const int s = wedge_sign(ma, mb);
      if (!s) continue;
      g.add(ma | mb, s > 0 ? fa * fb : -(fa * fb));
    }
  return g;
}

GradedForm GradedForm::exterior(int var_lo, int var_hi) const {
  GradedForm g(n_, p_);
  for (auto& [m, f] : terms_)
    for (int v = var_lo; v < var_hi; ++v) {
      const Mask bit = Mask{1} << v;
      const int s = wedge_sign(bit, m);
      if (!s) continue;
      ScalarField df = f.partial(v);
      g.add(m | bit, s > 0 ? df : -df);
    }
  return g;
}

GradedForm GradedForm::d() const { return exterior(0, 2 * n_ + p_); }
GradedForm GradedForm::partial_d() const { return exterior(0, n_); }
GradedForm GradedForm::bar_d() const { return exterior(n_, 2 * n_); }
GradedForm GradedForm::simplex_d() const { return exterior(2 * n_, 2 * n_ + p_); }

int dt_leftmost_sign(Mask m, int n) {
  const int k = mask_degree(simplex_part(m, n));
  const int rest = mask_degree(m) - k;
  return (k * rest) % 2 ? -1 : 1;
}

GradedForm GradedForm::fiber_integrate(const SimplexRule& rule) const {
  if (rule.dim() != p_) throw ValidationError("simplex rule dimension does not match the form");
  GradedForm g(n_, 0);
  const Mask top = ((Mask{1} << p_) - 1) << (2 * n_);
  for (auto& [m, f] : terms_) {
    if ((m & top) != top) continue;
    const ScalarField c = f.simplex_integral(p_, rule);
    g.add(m & ~top, dt_leftmost_sign(m, n_) > 0 ? c : -c);
  }
  return g;
}

FormJet fiber_integrate(const std::function<FormJet(const std::vector<double>&)>& family, int n, int p, const SimplexRule& rule) {
  FormJet out(n, 0);
  const Mask top = ((Mask{1} << p) - 1) << (2 * n);
  std::vector<FormJet::Term> acc;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const FormJet w = family(rule.node(q));
    for (auto& [m, f] : w.terms()) {
      if ((m & top) != top) continue;
      const double s = dt_leftmost_sign(m, n) * rule.weight(q);
      acc.emplace_back(m & ~top, f.restrict_to_chart() * cplx(s));
    }
  }
  for (auto& [m, f] : acc) out.add(m, f);
  return out;
}

FormMatrix& FormMatrix::operator+=(const FormMatrix& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw Error("form matrix shape mismatch");
  for (std::size_t k = 0; k < e_.size(); ++k) e_[k] += o.e_[k];
  p_ = std::max(p_, o.p_);
  return *this;
}

FormMatrix& FormMatrix::operator-=(const FormMatrix& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw Error("form matrix shape mismatch");
  for (std::size_t k = 0; k < e_.size(); ++k) e_[k] -= o.e_[k];
  p_ = std::max(p_, o.p_);
  return *this;
}

FormMatrix operator*(cplx s, FormMatrix a) {
  for (auto& e : a.e_) e *= s;
  return a;
}

FormMatrix operator*(const Jet& f, FormMatrix a) {
  for (auto& e : a.e_) e = f * e;
  return a;
}

FormMatrix operator*(const FormMatrix& a, const FormMatrix& b) {
  if (a.cols_ != b.rows_) throw Error("form matrix product shape mismatch");
  FormMatrix c(a.rows_, b.cols_, a.n_, std::max(a.p_, b.p_));
  for (std::size_t i = 0; i < a.rows_; ++i)
    for (std::size_t j = 0; j < b.cols_; ++j) {
      FormJet acc(a.n_, c.p_);
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const FormJet& x = a(i, k);
        const FormJet& y = b(k, j);
        if (x.empty() || y.empty()) continue;
        acc += wedge(x, y);
      }
      c(i, j) = std::move(acc);
    }
  return c;
}

FormMatrix FormMatrix::d() const {
  FormMatrix r(rows_, cols_, n_, p_);
  for (std::size_t k = 0; k < e_.size(); ++k) r.e_[k] = e_[k].d();
  return r;
}

FormMatrix FormMatrix::with_simplex_dim(int p) const {
  FormMatrix r(rows_, cols_, n_, p);
  for (std::size_t k = 0; k < e_.size(); ++k) r.e_[k] = e_[k].with_simplex_dim(p);
  return r;
}

FormMatrix FormMatrix::filter(const std::function<bool(Mask)>& keep) const {
  FormMatrix r(rows_, cols_, n_, p_);
  for (std::size_t k = 0; k < e_.size(); ++k) r.e_[k] = e_[k].filter(keep);
  return r;
}

double FormMatrix::max_abs() const {
  double m = 0.0;
  for (auto& e : e_) m = std::max(m, e.max_abs());
  return m;
}

FormMatrix FormMatrix::identity(std::size_t r, const JetSpace& sp, int order, int n, int p) {
  FormMatrix m(r, r, n, p);
  for (std::size_t i = 0; i < r; ++i) m(i, i) = FormJet::scalar(n, p, Jet::constant(sp, order, 1.0));
  return m;
}

namespace {

FormJet odd_sign_flip(const FormJet& w) {
  return w.filter([](Mask m) { return form_parity(m) == 0; }) - w.filter([](Mask m) { return form_parity(m) == 1; });
}

}  // namespace

FormMatrix super_apply(const EndForm& alpha, const FormMatrix& beta, int level) {
  if (level != alpha.source) throw ValidationError("super_apply level mismatch: operator acts on level " + std::to_string(alpha.source) +
                                                   ", vector lives at level " + std::to_string(level));
  if (alpha.m.cols() != beta.rows()) throw ValidationError("super_apply rank mismatch");
  if (alpha.endo_degree() % 2 == 0) return alpha.m * beta;
  FormMatrix flipped(beta.rows(), beta.cols(), beta.chart_dim(), beta.simplex_dim());
  for (std::size_t i = 0; i < beta.rows(); ++i)
    for (std::size_t j = 0; j < beta.cols(); ++j) flipped(i, j) = odd_sign_flip(beta(i, j));
  return alpha.m * flipped;
}

EndForm super_compose(const EndForm& a, const EndForm& b) {
  if (a.source != b.target) throw ValidationError("super_compose level mismatch: " + std::to_string(a.source) + " vs " + std::to_string(b.target));
  EndForm r{a.target, b.source, {}};
  if (a.endo_degree() % 2 == 0) {
    r.m = a.m * b.m;
    return r;
  }
  FormMatrix flipped(b.m.rows(), b.m.cols(), b.m.chart_dim(), b.m.simplex_dim());
  for (std::size_t i = 0; i < b.m.rows(); ++i)
    for (std::size_t j = 0; j < b.m.cols(); ++j) flipped(i, j) = odd_sign_flip(b.m(i, j));
  r.m = a.m * flipped;
  return r;
}

}  // namespace chernres
