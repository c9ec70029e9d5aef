#include "chernres/simplex_quadrature.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace chernres {

SimplexRule::SimplexRule(int p, int degree) : p_(p), degree_(degree) {
  if (p < 0) throw std::invalid_argument("simplex dimension must be nonnegative");
  if (p == 0) {
    nodes_.push_back({});
    weights_.push_back(1.0);
    return;
  }
  if (degree < 1) degree = 1;
  const int s = degree / 2;  // exactness 2s+1 >= degree
  const int d = 2 * s + 1;
  degree_ = d;
  std::vector<int> beta(static_cast<std::size_t>(p) + 1);
  for (int i = 0; i <= s; ++i) {
    double w = std::pow(2.0, -2 * s) * std::pow(static_cast<double>(d + p - 2 * i), d);
    w /= std::tgamma(i + 1.0) * std::tgamma(static_cast<double>(d + p - i) + 1.0);
    if (i % 2) w = -w;
    const double denom = d + p - 2 * i;
    // All beta in N^{p+1} with |beta| = s - i.
    std::function<void(int, int)> rec = [&](int pos, int left) {
      if (pos == p) {
        beta[static_cast<std::size_t>(p)] = left;
        std::vector<double> t(static_cast<std::size_t>(p));
        for (int j = 1; j <= p; ++j) t[static_cast<std::size_t>(j - 1)] = (2.0 * beta[static_cast<std::size_t>(j)] + 1.0) / denom;
        nodes_.push_back(std::move(t));
        weights_.push_back(w);
        return;
      }
      for (int k = 0; k <= left; ++k) {
        beta[static_cast<std::size_t>(pos)] = k;
        rec(pos + 1, left - k);
      }
    };
    rec(0, s - i);
  }
}

void gauss_legendre(int m, std::vector<double>& x, std::vector<double>& w) {
  x.assign(static_cast<std::size_t>(m), 0.0);
  w.assign(static_cast<std::size_t>(m), 0.0);
  for (int i = 0; i < m; ++i) {
    double r = std::cos(M_PI * (i + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = r;
      for (int k = 2; k <= m; ++k) {
        const double p2 = ((2.0 * k - 1.0) * r * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (m == 1) {
        p1 = r;
        p0 = 1.0;
      }
      dp = m * (r * p1 - p0) / (r * r - 1.0);
      const double dr = p1 / dp;
      r -= dr;
      if (std::abs(dr) < 1e-16) break;
    }
    x[static_cast<std::size_t>(i)] = -r;
    w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - r * r) * dp * dp);
  }
}

}  // namespace chernres
