#pragma once

#include <functional>
#include <vector>

#include "disclab/domain.hpp"
#include "disclab/field.hpp"
#include "disclab/gauge.hpp"

namespace disclab {

/// -Laplace(u) - Omega . grad(u) = e on the unit disc, u = trace on the rim.
struct SystemProblem {
  Field omega;        // (m,m,2), skew
  Field e;            // (m,1,1)
  double s = 1.25;    // integrability tag of e, s > 1 (used by decay reports)
  BoundaryValue trace;
};

/// One sparse nonsymmetric solve; the system is linear in u for fixed Omega.
Field solve_linear_system(const SystemProblem& prob, SolveStats* stats = nullptr);

/// Curvature coefficient matrix of the H-surface system, built from the
/// discrete rotated gradients of u (m = 3). Satisfies
/// Omega . grad u = -2 H(u) d1u x d2u nodewise as an algebraic identity.
Field build_h_surface_omega(const Field& u,
                            const std::function<double(const double*)>& H);

struct HSurfaceProblem {
  std::function<double(const double*)> H;
  BoundaryValue trace;
  int max_iterations = 30;
  double damping = 0.5;
  double tol = 1e-8;  // W^{1,2} increment tolerance
  // Anderson depth over the damped Picard map; 0 runs the plain iteration.
  // Near borderline data (the hemisphere) the slowest Picard mode has rate
  // close to 1, which plain damping cannot fix within a sane budget.
  int anderson_depth = 4;
  int anderson_warmup = 2;  // plain steps before mixing starts
};

struct PicardLog {
  std::vector<double> increments;
  bool converged = false;
  int iterations = 0;
  double weak_residual = 0.0;
};

struct HSurfaceResult {
  Field u;
  PicardLog log;
};

/// Damped Picard iteration from the harmonic extension of the trace.
/// Non-convergence is reported in the log, not thrown.
HSurfaceResult solve_h_surface(GridPtr g, const HSurfaceProblem& prob);

/// Weak defect of -Laplace(u) = -2H(u) d1u x d2u against a fixed family of
/// smooth bump test fields; decays under refinement for Picard fixed points.
double h_surface_weak_residual(const Field& u,
                               const std::function<double(const double*)>& H);

/// L2 defect of div(P^-1 grad u) + rot-grad(xi) . P^-1 grad u + P^-1 e = 0
/// over the pair's working disc.
double gauged_divergence_residual(const Field& u, const GaugePair& gp,
                                  const Field& e);

/// Inverse stereographic parametrization of the unit sphere:
/// u(x) = (2x1, 2x2, |x|^2 - 1) / (1 + |x|^2).
Field stereographic_sphere(GridPtr g);

}  // namespace disclab
