#pragma once

#include <vector>

#include "disclab/domain.hpp"
#include "disclab/field.hpp"

namespace disclab {

/// Linear Hodge split of a vector field chi with arity (m,1,2) on B_r(a):
/// f and g solve Laplace(f) = div(chi), Laplace(g) = curl(chi) with zero
/// trace on the circle; h is the remainder chi - grad f - rot-grad g, exactly.
struct HodgeTriple {
  Field f;
  Field g;
  Field h;
  double solver_residual = 0.0;
};

HodgeTriple hodge_decompose(const Field& chi, const Disc& d);

/// Max over components of |compact Laplacian| on nodes at least `guard_cells`
/// cells inside the circle of d, where the stencil algebra is uniform. The
/// cut layer is excluded: one-sided stencils there make the compact Laplacian
/// meaningless for solver remainders.
double harmonic_residual(const Field& h, const Disc& d, int guard_cells = 4);

struct HarmonicDecayReport {
  double p = 2.0;
  std::vector<double> ratios;
  std::vector<double> measured_c;
  double bound = 4.0;
  bool violation = false;
  double residual = 0.0;  // harmonic residual of the input
};

/// Measures C(r/rho) = int_{B_r}|h|^p / ((r/rho)^2 int_{B_rho}|h|^p) on
/// concentric discs. Rejects fields that are not harmonic to tolerance.
HarmonicDecayReport harmonic_decay_check(const Field& h, const Disc& d,
                                         double p,
                                         const std::vector<double>& ratios,
                                         double bound = 4.0,
                                         double harmonic_tol = 1e-6);

}  // namespace disclab
