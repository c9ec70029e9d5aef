#pragma once

#include <functional>
#include <memory>

#include "chernres/cover.hpp"
#include "chernres/forms.hpp"

namespace chernres {

// Non-alternating Cech-de Rham cochain on a cover, evaluated lazily: the
// entry at a tuple of length p+1 is its Cech degree p part, as a chart form
// at a point of U_tuple. Entries outside [min_p, max_p] are zero.
class Cochain {
 public:
  using Fn = std::function<FormJet(const Tuple&, const Point&, int order)>;

  Cochain() = default;
  Cochain(int n, int min_p, int max_p, Fn f);
  static Cochain zero(int n);

  int dim() const { return n_; }
  int min_p() const { return min_p_; }
  int max_p() const { return max_p_; }
  bool is_zero() const { return !f_ || max_p_ < min_p_; }
  FormJet operator()(const Tuple& t, const Point& pt, int order) const;

  Cochain degree_part(int p) const;
  // Caches entries by (tuple, order, point) to share work between operators.
  Cochain memoized() const;

  friend Cochain operator+(const Cochain& a, const Cochain& b);
  friend Cochain operator-(const Cochain& a, const Cochain& b);
  friend Cochain operator*(cplx s, const Cochain& a);

 private:
  int n_ = 0, min_p_ = 0, max_p_ = -1;
  Fn f_;
};

// (delta g)_{a_0..a_{p+1}} = sum_j (-1)^j g_{..^a_j..}.
Cochain cech_delta(const Cochain& g);
// (d g)_Delta = (-1)^p d(g_Delta).
Cochain exterior_d(const Cochain& g);
Cochain nabla(const Cochain& g);
// (psi g)_{a_0..a_{p-1}} = (-1)^(p+1) sum_a psi_a g_{a_0..a_{p-1} a} for g of degree p.
Cochain psi_op(const Cochain& g, const Cover& cover);
// Psi' g = sum_p (d psi)^p g_p + psi (d psi)^p (nabla g)_{p+1}; the second
// sum is dropped for cocycles.
Cochain psi_prime(const Cochain& g, const Cover& cover, bool cocycle);
// Global form Psi(g) = sum_a psi_a (Psi' g)_a.
using GlobalForm = std::function<FormJet(const Point&, int order)>;
GlobalForm psi_global(const Cochain& g, const Cover& cover, bool cocycle);

// Refinement map rho from a finer cover V (indices beta) into U.
struct Refinement {
  std::vector<int> rho;
};
// Throws ValidationError unless V_beta is contained in U_rho(beta).
void check_refinement(const Refinement& r, const Cover& finer, const Cover& coarser);
Cochain refine(const Cochain& g, const Refinement& r);
// (h g)_{b_0..b_{p-1}} = sum_k (-1)^k g_{rho1(b_0..b_k), rho2(b_k..b_{p-1})}.
Cochain homotopy_h(const Cochain& g, const Refinement& r1, const Refinement& r2);

// Largest coefficient of an entry over sampled points of its domain.
struct SampleOptions {
  int samples = 30;
  unsigned seed = 1;
  int max_p = 2;
  int order = 0;
};
double max_entry(const Cochain& g, const Cover& cover, const SampleOptions& opt);
// Largest mismatch of the 0-cochain g on overlaps U_a cap U_b.
double overlap_mismatch(const Cochain& g, const Cover& cover, const SampleOptions& opt);

}  // namespace chernres
