#pragma once

#include <string>
#include <vector>

#include "chernres/cochain.hpp"
#include "chernres/complexes.hpp"

namespace chernres {

// Chain isomorphism g_k : E^beta_k -> E^alpha_k over U_alpha cap U_beta, so
// that phi^alpha_k g_k = g_{k-1} phi^beta_k.
struct EdgeIso {
  int alpha = 0, beta = 0;
  std::vector<PolyMatrix> g;
};

// Simplicial resolution in ambient form: every chart carries a complex that
// already contains its elementary padding, all charts share the ranks, and
// E^Delta is the complex of the first vertex of Delta. Frames of the other
// vertices are carried over by the edge isomorphisms.
class SimplicialResolution {
 public:
  SimplicialResolution() = default;
  // One complex on every chart; all transitions are the identity.
  static SimplicialResolution global(BundleComplex c, int charts);
  static SimplicialResolution padded(std::vector<BundleComplex> charts, std::vector<EdgeIso> edges);
  // Resolution on the disjoint union of two covers. A mixed edge has alpha
  // indexing a and beta indexing b; they may be omitted when both sides are
  // the same global complex.
  static SimplicialResolution join(const SimplicialResolution& a, const SimplicialResolution& b, std::vector<EdgeIso> mixed = {});

  int size() const { return static_cast<int>(charts_.size()); }
  const BundleComplex& chart(int a) const { return charts_[static_cast<std::size_t>(a)]; }
  // Transition g_{ab} : E^b -> E^a per level (jets at pt).
  std::vector<JetMatrix> transition(int a, int b, const Point& pt, const JetSpace& sp, int order) const;
  bool identity_transition(int a, int b) const;

  // Every structural problem found over the cover; empty when valid.
  std::vector<std::string> validate(const Cover& cover, int samples = 20, unsigned seed = 1) const;
  void validate_or_throw(const Cover& cover, int samples = 20, unsigned seed = 1) const;

 private:
  const EdgeIso* find_edge(int a, int b) const;
  std::vector<BundleComplex> charts_;
  std::vector<EdgeIso> edges_;
  std::vector<int> global_class_;  // charts with equal class share one complex
};

// Connection matrices theta_k of the connection on chart alpha, in the frame
// of that chart, as chart forms of jet order `order`.
using VertexTheta = std::function<std::vector<FormMatrix>(int alpha, const Point& pt, int order)>;
// Caches results by (alpha, order, point).
VertexTheta memoize(VertexTheta f);

// theta^A = g theta g^{-1} - dg g^{-1}; g of jet order one more than theta.
std::vector<FormMatrix> transport(const std::vector<JetMatrix>& g, const std::vector<FormMatrix>& theta, int n);

// Cover, simplicial resolution and vertex connections.
struct CechSetup {
  Cover cover;
  SimplicialResolution res;
  VertexTheta theta;
};

// Phi(D^Delta) integrated over the simplex, at jet order `order`.
FormJet simplex_phi(const CechSetup& s, const SymmetricPolynomial& Phi, const Tuple& delta, const Point& pt, int order);
// pi_* Phi(sum_j t_j D^j) for connections on one complex; thetas at order+1.
FormJet interpolated_phi(const std::vector<std::vector<FormMatrix>>& thetas, const SymmetricPolynomial& Phi, int n, int order);
// Max coefficient of sum_k (-1)^k Phi(D^0..^D^k..D^p) + (-1)^p d Phi(D^0..D^p)
// with thetas at order 2.
double interpolation_identity_defect(const std::vector<std::vector<FormMatrix>>& thetas, const SymmetricPolynomial& Phi, int n);

// The cochain Delta -> pi_* Phi(D^Delta), Cech degrees 0..deg Phi.
Cochain check_phi(const CechSetup& s, const SymmetricPolynomial& Phi);
// Phi(D) = Psi(check Phi(D)).
GlobalForm global_phi(const CechSetup& s, const SymmetricPolynomial& Phi);

// Refinements r_1, r_2 of U_12 = U_1 cap U_2 (indices a * |U_2| + b).
Refinement product_projection(const Cover& u1, const Cover& u2, int which);
// eta = h check Phi_V on U_12, V = U_1 coprod U_2.
Cochain transgression_cochain(const CechSetup& s1, const CechSetup& s2, const SymmetricPolynomial& Phi, const std::vector<EdgeIso>& mixed = {});
// eta^Phi = Psi_{U_12}(eta); d eta^Phi = Phi(D_2) - Phi(D_1).
GlobalForm transgression_form(const CechSetup& s1, const CechSetup& s2, const SymmetricPolynomial& Phi, const std::vector<EdgeIso>& mixed = {});

// Largest coefficient outside the bidegrees (ell + r, s), r, s >= 0,
// r + s = ell - p. Cech degree p entries and degree 2 ell - p forms.
double bidegree_excess(const FormJet& w, int n, int ell, int p);

// Max over the sub-faces tau of Delta of the mismatch between the glued
// connection of vertex alpha on Delta and the one carried from tau.
double face_consistency_defect(const CechSetup& s, const Tuple& delta, const Point& pt, int order);

}  // namespace chernres
