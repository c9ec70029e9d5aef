#pragma once

#include <memory>
#include <random>
#include <vector>

#include "chernres/jet.hpp"

namespace chernres {

// Axis-aligned open box in C^n, bounds on (x_1, y_1, ..., x_n, y_n).
struct Box {
  std::vector<double> lo, hi;

  static Box square(int n, double half_width);
  bool contains(const std::vector<cplx>& z) const;
  bool empty() const;
  Box intersect(const Box& o) const;
  double width(std::size_t k) const { return hi[k] - lo[k]; }
};

// Nerve simplex: ordered index tuple, repetitions allowed.
using Tuple = std::vector<int>;

// Finite cover of a working domain by boxes with a smooth partition of unity.
// psi_a = b_a / sum_b b_b with b_a a product of one-dimensional plateaus that
// vanish near the faces of box a.
class Cover {
 public:
  Cover() = default;
  Cover(int n, std::vector<Box> boxes, Box domain, double plateau_width = 0.2);
  // One chart equal to the domain; psi = 1.
  static Cover single(int n, Box domain);
  // Cover (U_a cap V_b) indexed by a * |V| + b with psi_(a,b) = psi_a psi_b.
  static Cover product(const Cover& u, const Cover& v);
  // Disjoint union U coprod V: indices of V follow those of U.
  static Cover disjoint_union(const Cover& u, const Cover& v);

  int dim() const { return n_; }
  int size() const { return static_cast<int>(boxes_.size()); }
  const Box& box(int a) const { return boxes_[static_cast<std::size_t>(a)]; }
  const Box& domain() const { return domain_; }
  double plateau_width() const { return width_; }

  bool contains(int a, const std::vector<cplx>& z) const { return box(a).contains(z); }
  bool contains(const Tuple& t, const std::vector<cplx>& z) const;
  // Charts whose box contains z.
  std::vector<int> charts_at(const std::vector<cplx>& z) const;
  bool intersects(const Tuple& t) const;
  Box intersection(const Tuple& t) const;
  // Ordered tuples of Cech degree 0..max_p with nonempty intersection.
  std::vector<Tuple> nerve(int max_p) const;

  // psi_a at pt; zero outside the support of a.
  Jet psi(int a, const Point& pt, const JetSpace& sp, int order) const;
  // Throws ValidationError when some sampled domain point is not covered by
  // the positive part of the bumps.
  void validate(int samples = 200, unsigned seed = 1) const;
  // Uniform random point of a box.
  template <class Rng>
  std::vector<cplx> sample(const Box& b, Rng& rng) const;

 private:
  Jet bump(int a, const Point& pt, const JetSpace& sp, int order) const;
  int n_ = 0;
  std::vector<Box> boxes_;
  Box domain_;
  double width_ = 0.2;
  enum class Kind { Boxes, Single, Product, Union } kind_ = Kind::Boxes;
  std::shared_ptr<const Cover> f1_, f2_;
};

template <class Rng>
std::vector<cplx> Cover::sample(const Box& b, Rng& rng) const {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<cplx> z(static_cast<std::size_t>(n_));
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double x = b.lo[2 * i] + (b.hi[2 * i] - b.lo[2 * i]) * u(rng);
    const double y = b.lo[2 * i + 1] + (b.hi[2 * i + 1] - b.lo[2 * i + 1]) * u(rng);
    z[i] = {x, y};
  }
  return z;
}

}  // namespace chernres
