#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chernres/jet.hpp"

namespace chernres {

// Polynomial in z_1..z_n and their conjugates. Exponent vectors have length 2n:
// the first n entries are powers of z, the last n powers of zbar.
class Polynomial {
 public:
  using Exps = std::vector<int>;

  Polynomial() = default;
  explicit Polynomial(int n) : n_(n) {}
  static Polynomial constant(int n, cplx c);
  static Polynomial z(int n, int i);
  static Polynomial zbar(int n, int i);

  int dim() const { return n_; }
  const std::map<Exps, cplx>& terms() const { return terms_; }
  void add_term(const Exps& e, cplx c);

  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;
  bool is_holomorphic() const;
  int degree() const;
  int max_exponent(int v) const;

  cplx operator()(const std::vector<cplx>& z) const;
  Jet to_jet(const Point& pt, const JetSpace& sp, int order) const;

  Polynomial conj() const;
  Polynomial d_z(int i) const;
  Polynomial d_zbar(int i) const;

  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator-=(const Polynomial& o);
  Polynomial& operator*=(cplx s);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(Polynomial a, cplx s) { return a *= s; }
  Polynomial pow(int k) const;

  std::string to_string() const;

 private:
  int n_ = 0;
  std::map<Exps, cplx> terms_;
};

// Polynomial-coefficient differential form: basis mask -> coefficient.
// Bits 0..n-1 are dz_i, n..2n-1 are dzbar_i, 2n.. are dt_j.
using PolyForm = std::map<std::uint32_t, Polynomial>;

// Resolve an identifier that is not one of the built-in symbols. Returns the
// polynomial it stands for, or nullopt for an unknown name.
using SymbolResolver = std::function<std::optional<Polynomial>(const std::string&)>;

// Parse an expression over z1..zn, zbar1/zb1/conj(..), x1, y1, i, numbers,
// + - * / ^ and parentheses. Rejects differentials.
Polynomial parse_polynomial(const std::string& text, int n, const SymbolResolver& extra = {});

// Same grammar plus the differentials dz1, dzbar1 (dzb1) and dt1. Products of
// differentials are wedge products in the written order.
PolyForm parse_poly_form(const std::string& text, int n, int p);

}  // namespace chernres
