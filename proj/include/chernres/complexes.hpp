#pragma once

#include <string>
#include <vector>

#include "chernres/forms.hpp"
#include "chernres/polynomial.hpp"

namespace chernres {

// Dense matrix of scalar jets.
class JetMatrix {
 public:
  JetMatrix() = default;
  JetMatrix(std::size_t rows, std::size_t cols, const JetSpace& sp, int order);
  static JetMatrix identity(std::size_t r, const JetSpace& sp, int order);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  Jet& operator()(std::size_t i, std::size_t j) { return e_[i * cols_ + j]; }
  const Jet& operator()(std::size_t i, std::size_t j) const { return e_[i * cols_ + j]; }

  friend JetMatrix operator+(const JetMatrix& a, const JetMatrix& b);
  friend JetMatrix operator-(const JetMatrix& a, const JetMatrix& b);
  friend JetMatrix operator*(const JetMatrix& a, const JetMatrix& b);
  friend JetMatrix operator*(cplx s, JetMatrix a);
  JetMatrix adjoint() const;  // conjugate transpose
  // Inverse by Gaussian elimination, pivoting on coefficient values.
  JetMatrix inverse() const;
  JetMatrix truncated(int order) const;

  FormMatrix as_forms(int n, int p) const;
  FormMatrix d(int n, int p) const;
  double max_abs() const;  // of values

 private:
  std::size_t rows_ = 0, cols_ = 0;
  const JetSpace* sp_ = nullptr;
  int order_ = 0;
  std::vector<Jet> e_;
};

// Matrix of polynomials, as written in scenario files.
struct PolyMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<Polynomial> e;

  static PolyMatrix zero(std::size_t r, std::size_t c, int n);
  static PolyMatrix identity(std::size_t r, int n);
  static PolyMatrix parse(const std::vector<std::vector<std::string>>& rows, int n);
  Polynomial& at(std::size_t i, std::size_t j) { return e[i * cols + j]; }
  const Polynomial& at(std::size_t i, std::size_t j) const { return e[i * cols + j]; }
  friend PolyMatrix operator*(const PolyMatrix& a, const PolyMatrix& b);
  bool is_zero() const;
  bool is_holomorphic() const;
  JetMatrix to_jets(const Point& pt, const JetSpace& sp, int order) const;
  std::vector<std::vector<cplx>> values(const std::vector<cplx>& z) const;
};

// Matrix of polynomial-coefficient forms (connection matrices).
struct FormPolyMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<PolyForm> e;

  static FormPolyMatrix zero(std::size_t r, int n);
  static FormPolyMatrix parse(const std::vector<std::vector<std::string>>& rows, int n);
  bool is_zero() const;
  bool is_10(int n) const;
  FormMatrix eval(const Point& pt, const JetSpace& sp, int order, int n, int p) const;
};

// 0 -> E_N -> ... -> E_1 -> E_0 with phi_k : E_k -> E_{k-1} (r_{k-1} x r_k).
class BundleComplex {
 public:
  BundleComplex() = default;
  BundleComplex(int n, std::vector<int> ranks, std::vector<PolyMatrix> maps, std::vector<PolyMatrix> metrics = {}, bool foliation = false);

  int dim() const { return n_; }
  int length() const { return static_cast<int>(ranks_.size()) - 1; }
  int rank(int k) const { return ranks_[static_cast<std::size_t>(k)]; }
  const std::vector<int>& ranks() const { return ranks_; }
  bool foliation_mode() const { return foliation_; }
  // phi(k) for k = 1..N.
  const PolyMatrix& phi(int k) const { return maps_[static_cast<std::size_t>(k - 1)]; }
  const PolyMatrix& metric(int k) const { return metrics_[static_cast<std::size_t>(k)]; }
  bool has_identity_metrics() const;

  // Throws ValidationError describing every structural problem found.
  void validate() const;
  // phi_k phi_{k+1} = 0 symbolically.
  bool is_complex() const;
  // Generic rank of phi_k, estimated at random points of the box.
  std::vector<int> generic_ranks(const std::vector<double>& lower, const std::vector<double>& upper, unsigned seed = 1) const;

  struct At {
    std::vector<JetMatrix> phi;  // index k = 1..N; phi[0] unused
    std::vector<JetMatrix> h;    // index k = 0..N
  };
  At eval(const Point& pt, const JetSpace& sp, int order) const;

 private:
  int n_ = 0;
  std::vector<int> ranks_;
  std::vector<PolyMatrix> maps_;
  std::vector<PolyMatrix> metrics_;
  bool foliation_ = false;
};

// Connection matrices theta_k (r_k x r_k matrices of 1-forms), k = 0..N.
class ConnectionFamily {
 public:
  ConnectionFamily() = default;
  explicit ConnectionFamily(std::vector<FormPolyMatrix> theta, bool torsion_free_level0 = false)
      : theta_(std::move(theta)), torsion_free_(torsion_free_level0) {}
  static ConnectionFamily trivial(const BundleComplex& c);

  std::size_t size() const { return theta_.size(); }
  const FormPolyMatrix& theta(int k) const { return theta_[static_cast<std::size_t>(k)]; }
  bool is_10(int n) const;
  bool is_trivial() const;
  bool torsion_free_flag() const { return torsion_free_; }
  std::vector<FormMatrix> eval(const Point& pt, const JetSpace& sp, int order, int n, int p) const;

 private:
  std::vector<FormPolyMatrix> theta_;
  bool torsion_free_ = false;
};

// Homogeneous polynomial in the elementary symmetric generators e_1..e_n.
class SymmetricPolynomial {
 public:
  struct Monomial {
    cplx coeff;
    std::vector<int> parts;  // e_{parts[0]} ... e_{parts[m-1]}, sorted
  };

  SymmetricPolynomial() = default;
  explicit SymmetricPolynomial(std::vector<Monomial> terms);
  static SymmetricPolynomial elementary(int l);
  static SymmetricPolynomial power_sum(int k);
  // e.g. "e1^2 - 2*e2", "p2", "e1*e2"; pk expands by Newton's identities.
  static SymmetricPolynomial parse(const std::string& text);

  int degree() const { return degree_; }
  const std::vector<Monomial>& terms() const { return terms_; }
  std::string to_string() const;

 private:
  std::vector<Monomial> terms_;
  int degree_ = 0;
};

// Curvature dtheta + theta ^ theta.
FormMatrix curvature(const FormMatrix& theta);
// det(I + (i/2pi) Theta) as a mixed-degree form.
FormJet total_chern(const FormMatrix& Theta, const JetSpace& sp, int order);
// Homogeneous parts e_0..e_n of a mixed-degree total Chern form.
std::vector<FormJet> chern_parts(const FormJet& total, int max_l);
std::vector<FormJet> chern_forms(const FormMatrix& Theta, int max_l, const JetSpace& sp, int order);
// 1/c for c = 1 + (positive degree), by the Neumann series.
FormJet inverse_total(const FormJet& c, const JetSpace& sp, int order);
// prod_k c(Theta_k)^{(-1)^k}; inverses by Neumann series in form degree.
FormJet mixed_chern_total(const std::vector<FormMatrix>& Thetas, const JetSpace& sp, int order);
std::vector<FormJet> mixed_chern(const std::vector<FormMatrix>& Thetas, int max_l, const JetSpace& sp, int order);
// Phi evaluated on e_1..e_l (e[0] is ignored).
FormJet phi_form(const SymmetricPolynomial& Phi, const std::vector<FormJet>& e);
// Phi of the family of curvatures, the pipeline entry point.
FormJet phi_of_curvatures(const SymmetricPolynomial& Phi, const std::vector<FormMatrix>& Thetas, const JetSpace& sp, int order);

// Metric adjoint of phi_k : E_k -> E_{k-1}: h_k^{-1} phi^H h_{k-1}.
JetMatrix metric_adjoint(const JetMatrix& phi, const JetMatrix& h_src, const JetMatrix& h_tgt);

// Minimal inverses sigma_k : E_{k-1} -> E_k, k = 1..N (index 0 unused).
// Rank drop beyond the conditioning threshold raises SingularPoint.
std::vector<JetMatrix> minimal_inverses(const BundleComplex::At& c, double threshold = 1e-8);

// D phi_k = dphi_k + theta_{k-1} phi_k - phi_k theta_k, k = 1..N (index 0 unused).
std::vector<FormMatrix> d_phi(const BundleComplex::At& c, const std::vector<FormMatrix>& theta, int n, int p);
double compatibility_defect(const BundleComplex::At& c, const std::vector<FormMatrix>& theta, int n, int p);

enum class TildeKind { Sheaf, Foliation };

// Corrections a_k (k = 0..N) of the singular compatible connection.
struct TildeAt {
  std::vector<FormMatrix> a;
  std::vector<JetMatrix> sigma;
  FormMatrix b;  // foliation only
};
TildeAt sheaf_tilde(const BundleComplex::At& c, const std::vector<FormMatrix>& theta, int n, int p, double threshold = 1e-8);
// Foliation case; the sign of b is configurable for negative controls.
TildeAt foliation_tilde(const BundleComplex::At& c, const std::vector<FormMatrix>& theta, int n, int p, double b_sign = -1.0,
                        double threshold = 1e-8);
FormMatrix build_b(const FormMatrix& dphi1_sigma1, int n, double sign = -1.0);

// Norm of P(i(u)(dv + theta0 v) - [u, v]) with P the orthogonal projection
// onto (im phi_1)^perp; u = f * (generator column g) and v polynomial fields.
double basic_defect(const BundleComplex& c, const std::vector<FormMatrix>& theta_tilde_at, const Point& pt, const Polynomial& f, int g,
                    const std::vector<Polynomial>& v, double threshold = 1e-8);

// Smooth cutoff chi on [0, inf): 0 on [0, tau0], 1 on [tau1, inf).
enum class CutoffKind { ExpStep, LogStep };
CutoffKind parse_cutoff(const std::string& name);
std::string cutoff_name(CutoffKind k);
Jet cutoff(CutoffKind kind, const Jet& u, double tau0, double tau1);

// Holomorphic sections whose norm defines the regularization shell.
struct RegulatorSection {
  std::vector<Polynomial> s;  // empty => s = 1
  Polynomial abs2;            // sum |s_i|^2, precomputed
  static RegulatorSection from(std::vector<Polynomial> s, int n);
};
// Default s = all rho x rho minors of phi_1 (rho = its generic rank).
RegulatorSection default_section(const BundleComplex& c, int rho);

struct RegulatorSettings {
  CutoffKind kind = CutoffKind::ExpStep;
  double tau0 = 0.5, tau1 = 2.0;
};

// theta_k + chi a_k.
std::vector<FormMatrix> regularize(const std::vector<FormMatrix>& theta, const TildeAt& tilde, const Jet& chi);

// Value of phi_k minors etc. for rank determination.
int numeric_rank(const std::vector<std::vector<cplx>>& m, double rel_tol = 1e-9);

}  // namespace chernres
