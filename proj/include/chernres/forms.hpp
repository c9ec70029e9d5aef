#pragma once

#include <functional>
#include <map>
#include <utility>
#include <vector>

#include "chernres/basis.hpp"
#include "chernres/jet.hpp"
#include "chernres/scalar_field.hpp"
#include "chernres/simplex_quadrature.hpp"

namespace chernres {

// A differential form at one point: basis monomial -> jet of its coefficient.
// Basis generators are dz_1..dz_n, dzbar_1..dzbar_n, dt_1..dt_p; the jets may
// carry fewer variables than the basis (coefficients constant in t).
class FormJet {
 public:
  using Term = std::pair<Mask, Jet>;

  FormJet() = default;
  FormJet(int n, int p) : n_(n), p_(p) {}
  static FormJet scalar(int n, int p, const Jet& f);

  int chart_dim() const { return n_; }
  int simplex_dim() const { return p_; }
  const std::vector<Term>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  // Adds c * basis(mask); merges with an existing term.
  void add(Mask m, const Jet& c);
  const Jet* find(Mask m) const;
  cplx value(Mask m) const;

  FormJet& operator+=(const FormJet& o);
  FormJet& operator-=(const FormJet& o);
  FormJet& operator*=(cplx s);
  FormJet operator-() const;
  friend FormJet operator+(FormJet a, const FormJet& b) { return a += b; }
  friend FormJet operator-(FormJet a, const FormJet& b) { return a -= b; }
  friend FormJet operator*(FormJet a, cplx s) { return a *= s; }
  friend FormJet operator*(cplx s, FormJet a) { return a *= s; }
  friend FormJet operator*(const Jet& f, const FormJet& a);

  friend FormJet wedge(const FormJet& a, const FormJet& b);

  // Exterior derivative and its parts; each consumes one jet order.
  FormJet d() const;
  FormJet partial_d() const;
  FormJet bar_d() const;
  FormJet simplex_d() const;

  FormJet degree_part(int k) const;
  FormJet filter(const std::function<bool(Mask)>& keep) const;
  // Re-index into a basis with simplex dimension p (dt bits must fit).
  FormJet with_simplex_dim(int p) const;
  FormJet truncated(int order) const;
  int min_order() const;

  // Largest |coefficient value| (order-0 part) over all terms.
  double max_abs() const;
  // Largest |coefficient value| over terms accepted by the predicate.
  double max_abs(const std::function<bool(Mask)>& on) const;

 private:
  FormJet exterior(int var_lo, int var_hi) const;
  int n_ = 0, p_ = 0;
  std::vector<Term> terms_;  // sorted by mask
};

// Symbolic form on chart x simplex with ScalarField coefficients.
class GradedForm {
 public:
  GradedForm() = default;
  GradedForm(int n, int p) : n_(n), p_(p) {}
  static GradedForm scalar(int n, int p, const ScalarField& f);
  static GradedForm basis(int n, int p, Mask m, const ScalarField& f = ScalarField::constant(1.0));
  static GradedForm from_poly_form(int n, int p, const PolyForm& pf);

  int chart_dim() const { return n_; }
  int simplex_dim() const { return p_; }
  const std::map<Mask, ScalarField>& terms() const { return terms_; }

  void add(Mask m, const ScalarField& f);
  FormJet eval(const Point& pt, int order) const;

  friend GradedForm operator+(const GradedForm& a, const GradedForm& b);
  friend GradedForm operator-(const GradedForm& a, const GradedForm& b);
  friend GradedForm operator*(const ScalarField& f, const GradedForm& a);
  friend GradedForm wedge(const GradedForm& a, const GradedForm& b);

  GradedForm d() const;
  GradedForm partial_d() const;
  GradedForm bar_d() const;
  GradedForm simplex_d() const;
  // Pushforward to the chart: keeps terms with all p dt's, moves them to the
  // left, integrates the coefficient over the simplex.
  GradedForm fiber_integrate(const SimplexRule& rule) const;

 private:
  GradedForm exterior(int var_lo, int var_hi) const;
  int n_ = 0, p_ = 0;
  std::map<Mask, ScalarField> terms_;
};

// Sign (+1/-1) that rewrites c dz_I dzbar_J dt_K as +-c dt_K dz_I dzbar_J.
int dt_leftmost_sign(Mask m, int n);

// Fiber integration of a pointwise family t -> FormJet over the standard simplex.
FormJet fiber_integrate(const std::function<FormJet(const std::vector<double>&)>& family, int n, int p, const SimplexRule& rule);

// Matrix of forms at a point.
class FormMatrix {
 public:
  FormMatrix() = default;
  FormMatrix(std::size_t rows, std::size_t cols, int n, int p)
      : rows_(rows), cols_(cols), n_(n), p_(p), e_(rows * cols, FormJet(n, p)) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  int chart_dim() const { return n_; }
  int simplex_dim() const { return p_; }
  FormJet& operator()(std::size_t i, std::size_t j) { return e_[i * cols_ + j]; }
  const FormJet& operator()(std::size_t i, std::size_t j) const { return e_[i * cols_ + j]; }

  FormMatrix& operator+=(const FormMatrix& o);
  FormMatrix& operator-=(const FormMatrix& o);
  friend FormMatrix operator+(FormMatrix a, const FormMatrix& b) { return a += b; }
  friend FormMatrix operator-(FormMatrix a, const FormMatrix& b) { return a -= b; }
  friend FormMatrix operator*(cplx s, FormMatrix a);
  friend FormMatrix operator*(const Jet& f, FormMatrix a);
  // Ordinary matrix product with wedge of entries (no super signs).
  friend FormMatrix operator*(const FormMatrix& a, const FormMatrix& b);
  FormMatrix d() const;
  FormMatrix with_simplex_dim(int p) const;
  FormMatrix filter(const std::function<bool(Mask)>& keep) const;
  double max_abs() const;

  static FormMatrix identity(std::size_t r, const JetSpace& sp, int order, int n, int p);

 private:
  std::size_t rows_ = 0, cols_ = 0;
  int n_ = 0, p_ = 0;
  std::vector<FormJet> e_;
};

// Form-valued homomorphism E_source -> E_target of the graded bundle, with
// endomorphism degree target - source. The matrix may mix form degrees.
struct EndForm {
  int target = 0;
  int source = 0;
  FormMatrix m;
  int endo_degree() const { return target - source; }
};

// alpha(beta) with the Koszul sign (-1)^{deg_e(alpha) deg_f(beta)} per term of
// beta. beta is a column of forms living at level `level`.
FormMatrix super_apply(const EndForm& alpha, const FormMatrix& beta, int level);
// alpha alpha' with sign (-1)^{deg_e(alpha) deg_f(alpha')} per term of alpha'.
EndForm super_compose(const EndForm& a, const EndForm& b);

}  // namespace chernres
