#include "chernres/polynomial.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

#include "chernres/basis.hpp"

namespace chernres {

Polynomial Polynomial::constant(int n, cplx c) {
  Polynomial p(n);
  p.add_term(Exps(static_cast<std::size_t>(2 * n), 0), c);
  return p;
}

Polynomial Polynomial::z(int n, int i) {
  Polynomial p(n);
  Exps e(static_cast<std::size_t>(2 * n), 0);
  e[static_cast<std::size_t>(i)] = 1;
  p.add_term(e, 1.0);
  return p;
}

Polynomial Polynomial::zbar(int n, int i) {
  Polynomial p(n);
  Exps e(static_cast<std::size_t>(2 * n), 0);
  e[static_cast<std::size_t>(n + i)] = 1;
  p.add_term(e, 1.0);
  return p;
}

void Polynomial::add_term(const Exps& e, cplx c) {
  if (c == cplx{}) return;
  auto it = terms_.find(e);
  if (it == terms_.end()) {
    terms_.emplace(e, c);
    return;
  }
  it->second += c;
  if (it->second == cplx{}) terms_.erase(it);
}

bool Polynomial::is_constant() const {
  for (auto& [e, c] : terms_)
    for (int x : e)
      if (x) return false;
  return true;
}

bool Polynomial::is_holomorphic() const {
  for (auto& [e, c] : terms_)
    for (int i = 0; i < n_; ++i)
      if (e[static_cast<std::size_t>(n_ + i)]) return false;
  return true;
}

int Polynomial::degree() const {
  int d = 0;
  for (auto& [e, c] : terms_) {
    int s = 0;
    for (int x : e) s += x;
    d = std::max(d, s);
  }
  return d;
}

int Polynomial::max_exponent(int v) const {
  int m = 0;
  for (auto& [e, c] : terms_) m = std::max(m, e[static_cast<std::size_t>(v)]);
  return m;
}

cplx Polynomial::operator()(const std::vector<cplx>& z) const {
  cplx sum{};
  for (auto& [e, c] : terms_) {
    cplx t = c;
    for (int i = 0; i < n_; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      for (int k = 0; k < e[ui]; ++k) t *= z[ui];
      for (int k = 0; k < e[static_cast<std::size_t>(n_) + ui]; ++k) t *= std::conj(z[ui]);
    }
    sum += t;
  }
  return sum;
}

Jet Polynomial::to_jet(const Point& pt, const JetSpace& sp, int order) const {
  Jet out = Jet::constant(sp, order, 0.0);
  if (terms_.empty()) return out;
  // Powers of each shifted variable, built lazily.
  std::vector<std::vector<Jet>> pw(static_cast<std::size_t>(2 * n_));
  auto power = [&](int v, int k) -> const Jet& {
    auto& list = pw[static_cast<std::size_t>(v)];
    if (list.empty()) {
      const cplx val = v < n_ ? pt.z[static_cast<std::size_t>(v)] : std::conj(pt.z[static_cast<std::size_t>(v - n_)]);
      list.push_back(Jet::constant(sp, order, 1.0));
      list.push_back(Jet::variable(sp, order, v, val));
    }
    while (static_cast<int>(list.size()) <= k) list.push_back(list.back() * list[1]);
    return list[static_cast<std::size_t>(k)];
  };
  for (auto& [e, c] : terms_) {
    Jet t = Jet::constant(sp, order, c);
    bool first = true;
    for (int v = 0; v < 2 * n_; ++v) {
      const int k = e[static_cast<std::size_t>(v)];
      if (!k) continue;
      if (first) {
        t = power(v, k) * c;
        first = false;
      } else {
        t = t * power(v, k);
      }
    }
    out += t;
  }
  return out;
}

Polynomial Polynomial::conj() const {
  Polynomial p(n_);
  for (auto& [e, c] : terms_) {
    Exps f = e;
    for (int i = 0; i < n_; ++i) std::swap(f[static_cast<std::size_t>(i)], f[static_cast<std::size_t>(n_ + i)]);
    p.add_term(f, std::conj(c));
  }
  return p;
}

Polynomial Polynomial::d_z(int i) const {
  Polynomial p(n_);
  for (auto& [e, c] : terms_) {
    const auto ui = static_cast<std::size_t>(i);
    if (!e[ui]) continue;
    Exps f = e;
    --f[ui];
    p.add_term(f, c * static_cast<double>(e[ui]));
  }
  return p;
}

Polynomial Polynomial::d_zbar(int i) const {
  Polynomial p(n_);
  for (auto& [e, c] : terms_) {
    const auto ui = static_cast<std::size_t>(n_ + i);
    if (!e[ui]) continue;
    Exps f = e;
    --f[ui];
    p.add_term(f, c * static_cast<double>(e[ui]));
  }
  return p;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  if (n_ == 0 && terms_.empty()) n_ = o.n_;
  for (auto& [e, c] : o.terms_) add_term(e, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
  if (n_ == 0 && terms_.empty()) n_ = o.n_;
  for (auto& [e, c] : o.terms_) add_term(e, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(cplx s) {
  if (s == cplx{}) {
    terms_.clear();
    return *this;
  }
  for (auto& [e, c] : terms_) c *= s;
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  Polynomial p(std::max(a.n_, b.n_));
  for (auto& [ea, ca] : a.terms_)
    for (auto& [eb, cb] : b.terms_) {
      Polynomial::Exps e = ea;
      for (std::size_t k = 0; k < e.size(); ++k) e[k] += eb[k];
      p.add_term(e, ca * cb);
    }
  return p;
}

Polynomial Polynomial::pow(int k) const {
  Polynomial r = constant(n_, 1.0);
  for (int i = 0; i < k; ++i) r = r * *this;
  return r;
}

std::string Polynomial::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  for (auto& [e, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << "(" << c.real();
    if (c.imag() != 0.0) os << (c.imag() < 0 ? "-" : "+") << std::abs(c.imag()) << "i";
    os << ")";
    for (int v = 0; v < 2 * n_; ++v) {
      const int k = e[static_cast<std::size_t>(v)];
      if (!k) continue;
      os << "*" << (v < n_ ? "z" : "zbar") << (v < n_ ? v + 1 : v - n_ + 1);
      if (k > 1) os << "^" << k;
    }
  }
  return os.str();
}

namespace {

PolyForm pf_scalar(const Polynomial& p) {
  PolyForm f;
  if (!p.is_zero()) f.emplace(0u, p);
  return f;
}

void pf_add(PolyForm& a, const PolyForm& b, double sign) {
  for (auto& [m, p] : b) {
    auto it = a.find(m);
    Polynomial q = p;
    q *= sign;
    if (it == a.end()) {
      a.emplace(m, q);
    } else {
      it->second += q;
      if (it->second.is_zero()) a.erase(it);
    }
  }
}

PolyForm pf_mul(const PolyForm& a, const PolyForm& b) {
  PolyForm out;
  for (auto& [ma, pa] : a)
    for (auto& [mb, pb] : b) {
      const int s = wedge_sign(ma, mb);
      if (!s) continue;
      pf_add(out, PolyForm{{ma | mb, pa * pb}}, s);
    }
  return out;
}

class Parser {
 public:
  Parser(const std::string& text, int n, int p, bool forms, const SymbolResolver& extra)
      : s_(text), n_(n), p_(p), forms_(forms), extra_(extra) {}

  PolyForm parse() {
    PolyForm v = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ValidationError("cannot parse \"" + s_ + "\" at position " + std::to_string(pos_) + ": " + what);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  PolyForm expr() {
    PolyForm v = term();
    for (;;) {
      if (eat('+'))
        pf_add(v, term(), 1.0);
      else if (eat('-'))
        pf_add(v, term(), -1.0);
      else
        return v;
    }
  }

  PolyForm term() {
    PolyForm v = unary();
    for (;;) {
      if (eat('*')) {
        v = pf_mul(v, unary());
      } else if (eat('/')) {
        PolyForm d = unary();
        if (d.size() != 1 || !d.count(0u) || !d.at(0u).is_constant()) fail("division only by nonzero constants");
        const cplx c = d.at(0u)(std::vector<cplx>(static_cast<std::size_t>(n_)));
        for (auto& [m, p] : v) p *= 1.0 / c;
      } else {
        return v;
      }
    }
  }

  PolyForm unary() {
    if (eat('-')) {
      PolyForm v = unary();
      for (auto& [m, p] : v) p *= -1.0;
      return v;
    }
    if (eat('+')) return unary();
    return power();
  }

  PolyForm power() {
    PolyForm base = atom();
    if (eat('^')) {
      skip();
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (start == pos_) fail("expected a nonnegative integer exponent");
      const int k = std::stoi(s_.substr(start, pos_ - start));
      if (base.size() > 1 || (base.size() == 1 && !base.count(0u))) fail("powers of differentials are not allowed");
      Polynomial b = base.empty() ? Polynomial(n_) : base.at(0u);
      return pf_scalar(b.pow(k));
    }
    return base;
  }

  PolyForm atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      PolyForm v = expr();
      if (!eat(')')) fail("expected ')'");
      return v;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t used = 0;
      const double x = std::stod(s_.substr(pos_), &used);
      pos_ += used;
      cplx val = x;
      if (pos_ < s_.size() && s_[pos_] == 'i' && (pos_ + 1 >= s_.size() || !std::isalnum(static_cast<unsigned char>(s_[pos_ + 1])))) {
        ++pos_;
        val = cplx(0.0, x);
      }
      return pf_scalar(Polynomial::constant(n_, val));
    }
    if (!std::isalpha(static_cast<unsigned char>(c))) fail("unexpected '" + std::string(1, c) + "'");
    std::size_t start = pos_;
    while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    const std::string word = s_.substr(start, pos_ - start);
    std::size_t nstart = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    const std::string digits = s_.substr(nstart, pos_ - nstart);

    if (word == "conj" && digits.empty()) {
      if (!eat('(')) fail("expected '(' after conj");
      PolyForm v = expr();
      if (!eat(')')) fail("expected ')'");
      if (v.size() > 1 || (v.size() == 1 && !v.count(0u))) fail("conj of a differential is not supported");
      return v.empty() ? v : pf_scalar(v.at(0u).conj());
    }
    if (word == "i" && digits.empty()) return pf_scalar(Polynomial::constant(n_, cplx(0.0, 1.0)));
    if (word == "pi" && digits.empty()) return pf_scalar(Polynomial::constant(n_, M_PI));

    if (!digits.empty()) {
      const int k = std::stoi(digits) - 1;
      auto check = [&](int lim) {
        if (k < 0 || k >= lim) fail("index out of range in '" + word + digits + "'");
      };
      if (word == "z") {
        check(n_);
        return pf_scalar(Polynomial::z(n_, k));
      }
      if (word == "zbar" || word == "zb") {
        check(n_);
        return pf_scalar(Polynomial::zbar(n_, k));
      }
      if (word == "x") {
        check(n_);
        Polynomial p = Polynomial::z(n_, k) + Polynomial::zbar(n_, k);
        return pf_scalar(p * 0.5);
      }
      if (word == "y") {
        check(n_);
        Polynomial p = Polynomial::z(n_, k) - Polynomial::zbar(n_, k);
        return pf_scalar(p * cplx(0.0, -0.5));
      }
      if (forms_ && (word == "dz" || word == "dzbar" || word == "dzb" || word == "dt")) {
        Mask m;
        if (word == "dt") {
          check(p_);
          m = dt_bit(n_, k);
        } else {
          check(n_);
          m = word == "dz" ? dz_bit(k) : dzbar_bit(n_, k);
        }
        return PolyForm{{m, Polynomial::constant(n_, 1.0)}};
      }
    }
    if (extra_) {
      if (auto p = extra_(word + digits)) return pf_scalar(*p);
    }
    fail("unknown symbol '" + word + digits + "'");
  }

  std::string s_;
  std::size_t pos_ = 0;
  int n_, p_;
  bool forms_;
  const SymbolResolver& extra_;
};

}  // namespace

Polynomial parse_polynomial(const std::string& text, int n, const SymbolResolver& extra) {
  PolyForm f = Parser(text, n, 0, false, extra).parse();
  if (f.empty()) return Polynomial(n);
  return f.at(0u);
}

PolyForm parse_poly_form(const std::string& text, int n, int p) {
  static const SymbolResolver none;
  return Parser(text, n, p, true, none).parse();
}

}  // namespace chernres
