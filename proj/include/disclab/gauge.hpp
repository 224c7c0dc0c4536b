#pragma once

#include <vector>

#include "disclab/domain.hpp"
#include "disclab/field.hpp"

namespace disclab {

/// Nodewise matrix exponential of a skew field (m,m,1); closed forms for
/// m = 2 (planar rotation) and m = 3 (Rodrigues), scaling-and-squaring with a
/// 13-term series above that. The result is a rotation field.
Field exp_skew(const Field& U);

/// T(U, lambda) = div(e^{-U} grad e^{U} + e^{-U} (rot-grad zeta + lambda) e^{U}),
/// evaluated with the public discrete operators and skew-projected.
Field t_apply(const Field& U, const Field& lambda, const Field& zeta);

/// Linearization of T in U at (0,0): div(grad psi + [rot-grad zeta, psi]),
/// the commutator acting slotwise. Maps skew fields to skew fields.
Field linearized_apply(const Field& psi, const Field& zeta);

struct GaugeConfig {
  double eps_threshold = 0.5;   // smallness precondition on ||Omega||_L2
  double newton_tol_rel = 1e-10;  // Newton residual, relative to ||Omega||
  double newton_tol_floor = 1e-13;
  double newton_stall_accept = 0.02;  // accept a stagnated step below this
                                      // fraction of its starting residual
  double residual_tol_rel = 0.05;  // acceptance bound on the gauge residual
  double t_step = 0.1;
  double t_step_min = 1e-3;
  int newton_max = 30;
  int gmres_max = 60;
  int gmres_restart = 40;
  double gmres_tol = 1e-4;
  bool verbose = false;
};

struct ContinuationRecord {
  double t = 0.0;
  double step = 0.0;
  int newton_iters = 0;
  double newton_residual = 0.0;
};

struct GaugePair {
  Field P;   // rotation (m,m,1), identity off the working disc
  Field xi;  // skew (m,m,1), zero mean over the working disc
  Disc disc;
  double residual = 0.0;    // L2 defect of rot-grad xi = P^-1 grad P + P^-1 Omega P
  double omega_l2 = 0.0;
  std::vector<ContinuationRecord> history;
};

/// Continuation in t from (P,xi) = (I,0): each step conjugates the remaining
/// potential into the frame of the accumulated rotation, solves T = 0 by
/// Newton-Krylov, and advances. xi is recovered from the final one-form by a
/// least-squares inversion of the rotated gradient.
GaugePair decompose(const Field& omega, const Disc& d,
                    const GaugeConfig& cfg = {});

/// Newton solve for U skew, zero trace, with ||T(U,lambda)||_L2 <= tol, from
/// the frozen state (zeta, R).
Field solve_gauge_step(const Field& zeta, const Field& R, const Field& lambda,
                       double tol);

/// Least-squares potential: xi with rot-grad xi ~ w on B_r(a), zero mean.
/// Rejects inputs whose discrete divergence exceeds div_tol_rel * ||w||.
Field vector_potential(const Field& w, const Disc& d, double div_tol_rel = 0.05);

struct GaugeAudit {
  double ratio_w12 = 0.0;  // (||grad xi|| + ||grad P||) / ||Omega||_L2
  double ratio_w22 = 0.0;  // (||xi||_W22 + ||P-I||_W22) / ||Omega||_W12
  double omega_l2 = 0.0;
  double omega_w12 = 0.0;
  double residual = 0.0;
};

GaugeAudit audit_estimates(const GaugePair& gp, const Field& omega);

/// Manufactured m=3 case: P0 = exp(U0) for a polynomial U0 vanishing on the
/// rim and a polynomial xi0. Omega is assembled with the discrete operators,
/// so (P0, xi0) satisfies the gauge relation exactly at every node and the
/// solver's residual against Omega is a pure discretization/solver quantity.
struct ManufacturedGauge {
  Field omega;
  Field P0;
  Field xi0;
};
ManufacturedGauge manufactured_gauge(GridPtr g, double amplitude,
                                     double cubic_weight);

/// m=2 potential Omega = (rot-grad beta) . J from an analytic gradient.
Field abelian_omega(GridPtr g,
                    const std::function<void(double, double, double*)>& grad_beta);

}  // namespace disclab
