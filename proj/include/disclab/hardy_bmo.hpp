#pragma once

#include <string>
#include <vector>

#include "disclab/field.hpp"

namespace disclab {

/// Scales and window for the discrete maximal function. One canonical bump
/// profile phi0(z) = c (1-|z|^2)^3 with max |grad phi0| = 1 replaces the sup
/// over all test functions (equivalent norm up to a fixed constant).
struct MaximalConfig {
  double margin = 1.0;       // window extends this far beyond [-1,1]^2
  double scale_max = 0.0;    // largest mollifier scale; 0 means = margin
  int scales_per_octave = 1; // geometric refinement of the scale set
  double bmo_max_radius = 0.5;
};

/// Sup over sampled discs (node centers, dyadic radii down from max_radius,
/// discs inside the unit disc) of the mean deviation from the disc average.
double bmo_seminorm(const Field& f, double max_radius);

/// L1 norm of the discrete maximal function of f extended by zero beyond the
/// unit disc. Scale set is geometric in [2h, scale_max].
double hardy_norm(const Field& f, const MaximalConfig& cfg);

struct RatioReport {
  double ratio = 0.0;
  double numerator = 0.0;
  double denom_a = 0.0;
  double denom_b = 0.0;
  bool degenerate = false;
  std::string note;
};

/// ||grad a . rot-grad b||_H / (||grad a||_L2 ||grad b||_L2); the product is
/// extended by zero, degenerate gradients report ratio 0.
RatioReport div_curl_hardy_check(const Field& a, const Field& b,
                                 const MaximalConfig& cfg);

/// |int f g| / ([f]_BMO ||g||_H); g is mean-corrected and zero-extended.
/// Near-zero denominators are reported as skipped-degenerate.
RatioReport duality_check(const Field& f, const Field& g,
                          const MaximalConfig& cfg);

struct WenteReport {
  double p = 2.0;
  double ratio = 0.0;
  double grad_u_lp = 0.0;
  double grad_a_l2 = 0.0;
  double grad_b_lp = 0.0;
};

/// Solves -Laplace(u) = grad a . rot-grad b with zero trace and reports
/// ||grad u||_Lp / (||grad a||_L2 ||grad b||_Lp).
WenteReport wente_check(const Field& a, const Field& b, double p);

}  // namespace disclab
