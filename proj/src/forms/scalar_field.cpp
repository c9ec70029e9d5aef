#include "chernres/scalar_field.hpp"

#include <algorithm>
#include <cmath>

#include "chernres/simplex_quadrature.hpp"

namespace chernres {

namespace {

// Below this distance from the ends the step is 0 or 1 to far below double
// precision relative to any derivative that can appear.
constexpr double kStepFlat = 5e-3;

}  // namespace

Jet smooth_step(const Jet& u) {
  const double u0 = u.value().real();
  const JetSpace& sp = u.space();
  if (u0 <= kStepFlat) return Jet::constant(sp, u.order(), 0.0);
  if (u0 >= 1.0 - kStepFlat) return Jet::constant(sp, u.order(), 1.0);
  const Jet ur = real_part(u);
  const Jet one = Jet::constant(sp, u.order(), 1.0);
  const Jet fa = exp(-recip(ur));
  const Jet fb = exp(-recip(one - ur));
  return fa * recip(fa + fb);
}

enum class Kind { Zero, Const, Poly, SimplexCoord, Custom, Add, Mul, Neg, Conj, Re, Im, Recip, Exp, Step, Partial, Capped, SimplexIntegral };

struct ScalarField::Node {
  Kind kind = Kind::Zero;
  cplx value{};
  Polynomial poly;
  int index = 0;
  int cap = kMaxJetOrder;
  Evaluator fn;
  std::string label;
  std::shared_ptr<const Node> a, b;
  std::shared_ptr<const SimplexRule> rule;
};

namespace {

using NodePtr = std::shared_ptr<const ScalarField::Node>;

int node_max_order(const ScalarField::Node& n) {
  switch (n.kind) {
    case Kind::Zero:
    case Kind::Const:
    case Kind::Poly:
    case Kind::SimplexCoord:
      return kMaxJetOrder;
    case Kind::Custom:
    case Kind::Capped:
      return n.cap;
    case Kind::Add:
    case Kind::Mul:
      return std::min(node_max_order(*n.a), node_max_order(*n.b));
    case Kind::Partial:
      return node_max_order(*n.a) - 1;
    default:
      return node_max_order(*n.a);
  }
}

Jet eval_node(const ScalarField::Node& n, const Point& pt, const JetSpace& sp, int order) {
  if (order > node_max_order(n)) {
    throw OrderExhausted("coefficient '" + (n.label.empty() ? std::string("<unnamed>") : n.label) + "' supports derivative order " +
                         std::to_string(node_max_order(n)) + ", requested " + std::to_string(order));
  }
  switch (n.kind) {
    case Kind::Zero:
      return Jet::constant(sp, order, 0.0);
    case Kind::Const:
      return Jet::constant(sp, order, n.value);
    case Kind::Poly:
      return n.poly.to_jet(pt, sp, order);
    case Kind::SimplexCoord: {
      const int p = sp.simplex_dim();
      if (n.index < 0 || n.index >= p || static_cast<int>(pt.t.size()) != p) throw Error("simplex coordinate out of range");
      return Jet::variable(sp, order, 2 * sp.chart_dim() + n.index, pt.t[static_cast<std::size_t>(n.index)]);
    }
    case Kind::Custom:
      return n.fn(pt, sp, order);
    case Kind::Add:
      return eval_node(*n.a, pt, sp, order) + eval_node(*n.b, pt, sp, order);
    case Kind::Mul:
      return eval_node(*n.a, pt, sp, order) * eval_node(*n.b, pt, sp, order);
    case Kind::Neg:
      return -eval_node(*n.a, pt, sp, order);
    case Kind::Conj:
      return eval_node(*n.a, pt, sp, order).conj();
    case Kind::Re:
      return real_part(eval_node(*n.a, pt, sp, order));
    case Kind::Im:
      return imag_part(eval_node(*n.a, pt, sp, order));
    case Kind::Recip:
      return recip(eval_node(*n.a, pt, sp, order));
    case Kind::Exp:
      return exp(eval_node(*n.a, pt, sp, order));
    case Kind::Step:
      return smooth_step(eval_node(*n.a, pt, sp, order));
    case Kind::Partial:
      return eval_node(*n.a, pt, sp, order + 1).derivative(n.index);
    case Kind::Capped:
      return eval_node(*n.a, pt, sp, order);
    case Kind::SimplexIntegral: {
      const SimplexRule& rule = *n.rule;
      const JetSpace& inner = JetSpace::get(sp.chart_dim(), rule.dim());
      Jet acc = Jet::constant(JetSpace::get(sp.chart_dim(), 0), order, 0.0);
      Point q{pt.z, {}};
      for (std::size_t k = 0; k < rule.size(); ++k) {
        q.t = rule.node(k);
        acc += eval_node(*n.a, q, inner, order).restrict_to_chart() * rule.weight(k);
      }
      return acc.lift_to(sp);
    }
  }
  throw Error("unknown scalar field node");
}

NodePtr make(Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<ScalarField::Node>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  if (n->a) n->label = n->a->label;
  return n;
}

}  // namespace

ScalarField::ScalarField() : node_(std::make_shared<Node>()) {}

ScalarField ScalarField::constant(cplx c) {
  if (c == cplx{}) return ScalarField();
  auto n = std::make_shared<Node>();
  n->kind = Kind::Const;
  n->value = c;
  return ScalarField(n);
}

ScalarField ScalarField::polynomial(const Polynomial& p) {
  if (p.is_zero()) return ScalarField();
  auto n = std::make_shared<Node>();
  n->kind = Kind::Poly;
  n->poly = p;
  n->label = p.to_string();
  return ScalarField(n);
}

ScalarField ScalarField::simplex_coord(int j) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::SimplexCoord;
  n->index = j;
  n->label = "t" + std::to_string(j + 1);
  return ScalarField(n);
}

ScalarField ScalarField::custom(Evaluator f, int max_order, std::string label) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Custom;
  n->fn = std::move(f);
  n->cap = max_order;
  n->label = std::move(label);
  return ScalarField(n);
}

Jet ScalarField::eval(const Point& pt, const JetSpace& sp, int order) const { return eval_node(*node_, pt, sp, order); }

int ScalarField::max_order() const { return node_max_order(*node_); }

const std::string& ScalarField::label() const { return node_->label; }

bool ScalarField::is_zero() const { return node_->kind == Kind::Zero; }

ScalarField ScalarField::with_label(std::string label) const {
  auto n = std::make_shared<Node>(*node_);
  n->label = std::move(label);
  return ScalarField(n);
}

ScalarField ScalarField::capped(int max_order) const {
  auto n = make(Kind::Capped, node_);
  auto m = std::const_pointer_cast<Node>(n);
  m->cap = std::min(max_order, node_max_order(*node_));
  return ScalarField(n);
}

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  return ScalarField(make(Kind::Add, a.node_, b.node_));
}

ScalarField operator-(const ScalarField& a, const ScalarField& b) { return a + (-b); }

ScalarField operator*(const ScalarField& a, const ScalarField& b) {
  if (a.is_zero() || b.is_zero()) return ScalarField();
  return ScalarField(make(Kind::Mul, a.node_, b.node_));
}

ScalarField operator*(cplx s, const ScalarField& a) { return ScalarField::constant(s) * a; }

ScalarField ScalarField::operator-() const {
  if (is_zero()) return *this;
  return ScalarField(make(Kind::Neg, node_));
}

ScalarField ScalarField::conj() const { return is_zero() ? *this : ScalarField(make(Kind::Conj, node_)); }
ScalarField ScalarField::real() const { return is_zero() ? *this : ScalarField(make(Kind::Re, node_)); }
ScalarField ScalarField::imag() const { return is_zero() ? *this : ScalarField(make(Kind::Im, node_)); }
ScalarField ScalarField::recip() const { return ScalarField(make(Kind::Recip, node_)); }
ScalarField ScalarField::exp() const { return ScalarField(make(Kind::Exp, node_)); }
ScalarField ScalarField::step() const { return ScalarField(make(Kind::Step, node_)); }

ScalarField ScalarField::partial(int var) const {
  if (is_zero()) return *this;
  auto n = make(Kind::Partial, node_);
  std::const_pointer_cast<Node>(n)->index = var;
  return ScalarField(n);
}

ScalarField ScalarField::simplex_integral(int p, const SimplexRule& rule) const {
  if (is_zero()) return *this;
  if (rule.dim() != p) throw Error("simplex rule dimension mismatch");
  auto n = make(Kind::SimplexIntegral, node_);
  std::const_pointer_cast<Node>(n)->rule = std::make_shared<SimplexRule>(rule);
  return ScalarField(n);
}

}  // namespace chernres
