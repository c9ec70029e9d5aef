#pragma once

#include <vector>

#include "chernres/simplicial.hpp"

namespace chernres {

// Cover, resolution and reference connections of a scenario, plus the data of
// the regularization theta_hat = theta + chi_eps a.
struct RegularizedSetup {
  Cover cover;
  SimplicialResolution res;
  std::vector<ConnectionFamily> connections;  // one per chart
  TildeKind kind = TildeKind::Sheaf;
  RegulatorSettings regulator;
  // Sections s^beta per chart of the regulator cover; empty uses the minors
  // of phi_1 on each chart.
  std::vector<RegulatorSection> sections;
  // Regulator cover V; defaults to the cover itself when unset.
  Cover regulator_cover;
  double threshold = 1e-8;
  double b_sign = -1.0;

  int dim() const { return cover.dim(); }
  // Fills defaults and checks shapes; throws ValidationError.
  void finalize();

  const Cover& reg_cover() const { return regulator_cover.size() ? regulator_cover : cover; }
  // chi_eps = sum_beta psi_beta chi(|s^beta|^2 / eps).
  Jet chi(double eps, const Point& pt, int order) const;
  // Corrections a_k of chart alpha (singular compatible connection minus theta).
  TildeAt tilde(int alpha, const Point& pt, int order) const;
  std::vector<FormMatrix> theta(int alpha, const Point& pt, int order) const;
  std::vector<FormMatrix> theta_hat(int alpha, double eps, const Point& pt, int order) const;
  // Compatible connection theta + a where defined.
  std::vector<FormMatrix> theta_tilde(int alpha, const Point& pt, int order) const;

  // Cech setup with vertex connections theta_hat at this eps.
  CechSetup at(double eps) const;
  // Cech setup with the reference connections theta.
  CechSetup reference() const;

  // Interval bound of |s^beta|^2 over a box, for every chart of the regulator
  // cover whose box meets it.
  std::vector<std::pair<double, double>> section_ranges(const Box& b) const;
};

// Enclosure [lo, hi] of a real-valued polynomial |p|^2 over a box, by complex
// rectangle arithmetic on p.
std::pair<double, double> abs2_range(const Polynomial& p, const Box& b);

}  // namespace chernres
