#pragma once

#include <random>

#include "chernres/forms.hpp"
#include "chernres/polynomial.hpp"

namespace testutil {

using chernres::cplx;

inline cplx rand_c(std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng)};
}

// Random polynomial in z and zbar with total degree at most deg.
inline chernres::Polynomial random_poly(std::mt19937_64& rng, int n, int deg, int terms, bool holomorphic = false) {
  chernres::Polynomial p(n);
  std::uniform_int_distribution<int> var(0, holomorphic ? n - 1 : 2 * n - 1);
  std::uniform_int_distribution<int> len(0, deg);
  for (int k = 0; k < terms; ++k) {
    std::vector<int> e(static_cast<std::size_t>(2 * n), 0);
    const int l = len(rng);
    for (int i = 0; i < l; ++i) ++e[static_cast<std::size_t>(var(rng))];
    p.add_term(e, rand_c(rng));
  }
  return p;
}

inline chernres::Point random_point(std::mt19937_64& rng, int n, int p = 0) {
  chernres::Point pt;
  for (int i = 0; i < n; ++i) pt.z.push_back(rand_c(rng));
  std::uniform_real_distribution<double> u(0.0, 1.0 / (p + 1));
  for (int j = 0; j < p; ++j) pt.t.push_back(u(rng));
  return pt;
}

// Random form with polynomial coefficients (also in t) on a few basis monomials.
inline chernres::GradedForm random_form(std::mt19937_64& rng, int n, int p, int degree_cap = 2) {
  chernres::GradedForm g(n, p);
  std::uniform_int_distribution<unsigned> mask(0, (1u << (2 * n + p)) - 1);
  for (int k = 0; k < 3; ++k) {
    const chernres::Mask m = mask(rng);
    chernres::ScalarField f = chernres::ScalarField::polynomial(random_poly(rng, n, degree_cap, 3));
    for (int j = 0; j < p; ++j)
      if (rng() % 2) f = f * chernres::ScalarField::simplex_coord(j);
    g.add(m, f);
  }
  return g;
}

inline double max_diff(const chernres::FormJet& a, const chernres::FormJet& b) { return (a - b).max_abs(); }

}  // namespace testutil
