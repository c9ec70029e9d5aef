#pragma once

#include <functional>
#include <memory>
#include <string>

#include "chernres/jet.hpp"
#include "chernres/polynomial.hpp"

namespace chernres {

class SimplexRule;

// Exp-based smooth step on [0,1]: 0 for u <= 0, 1 for u >= 1, and
// f(u)/(f(u)+f(1-u)) in between with f(x) = exp(-1/x). Only the real part
// of u is used.
Jet smooth_step(const Jet& u);

// Immutable expression tree mapping a chart x simplex point to a jet.
class ScalarField {
 public:
  using Evaluator = std::function<Jet(const Point&, const JetSpace&, int)>;

  ScalarField();  // the zero field

  static ScalarField constant(cplx c);
  static ScalarField polynomial(const Polynomial& p);
  static ScalarField simplex_coord(int j);  // t_{j+1}; t_0 is 1 - sum t
  // Opaque field given by a jet-valued callback supporting max_order derivatives.
  static ScalarField custom(Evaluator f, int max_order, std::string label);

  Jet eval(const Point& pt, const JetSpace& sp, int order) const;
  int max_order() const;
  const std::string& label() const;
  bool is_zero() const;

  ScalarField with_label(std::string label) const;
  ScalarField capped(int max_order) const;

  friend ScalarField operator+(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator-(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator*(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator*(cplx s, const ScalarField& a);
  ScalarField operator-() const;

  ScalarField conj() const;
  ScalarField real() const;
  ScalarField imag() const;
  ScalarField recip() const;
  ScalarField exp() const;
  ScalarField step() const;
  // Wirtinger/simplex partial by jet variable index (z_i, zbar_i, t_j layout).
  ScalarField partial(int var) const;
  // Integral over the standard p-simplex of the coefficient, as a chart field.
  ScalarField simplex_integral(int p, const SimplexRule& rule) const;

  struct Node;

 private:
  explicit ScalarField(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

}  // namespace chernres
