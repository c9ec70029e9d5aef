#pragma once

#include <vector>

namespace chernres {

// Grundmann-Moller rule on the standard simplex {t_i >= 0, sum t_i <= 1} in
// dimension p, exact for polynomials of degree 2s+1. Weights may be negative.
class SimplexRule {
 public:
  SimplexRule(int p, int degree);

  int dim() const { return p_; }
  int degree() const { return degree_; }
  std::size_t size() const { return weights_.size(); }
  // Coordinates t_1..t_p of node q.
  const std::vector<double>& node(std::size_t q) const { return nodes_[q]; }
  double weight(std::size_t q) const { return weights_[q]; }

 private:
  int p_, degree_;
  std::vector<std::vector<double>> nodes_;
  std::vector<double> weights_;
};

// One-dimensional Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int m, std::vector<double>& x, std::vector<double>& w);

}  // namespace chernres
