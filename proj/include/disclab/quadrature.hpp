#pragma once

#include <vector>

#include "disclab/field.hpp"
#include "disclab/grid.hpp"

namespace disclab {

/// Interior nodes with node-center inside B_r(a). Quadrature weights stay the
/// disc-clipped cell areas, so sums over these nodes approximate integrals
/// over B_r(a) ∩ D² to first order.
std::vector<int> nodes_in_disc(const DiscGrid& g, const Disc& d);

/// Weighted average of u over B_r(a) ∩ D², one entry per component.
/// Throws if the disc resolves fewer than 5 nodes.
std::vector<double> mean_value(const Field& u, const Disc& d);

/// (sum_i w_i |u(x_i)|^p)^(1/p) over B_r(a) ∩ D², |.| Euclidean over all
/// components. Requires p >= 1 and a resolved disc.
double lp_norm_on_disc(const Field& u, const Disc& d, double p);

/// L2 norm over the whole disc.
double l2_norm(const Field& u);

/// Integral of a scalar field over B_r(a) ∩ D² (no resolution check).
double integral_on_disc(const Field& u, const Disc& d);

/// Radial cutoff: 1 on B_r(a), quintic ramp on [r, 3r/2], 0 beyond, so that
/// |grad| <= 3.75/r. Requires B_{2r}(a) ⊂ D² up to grid tolerance.
Field cutoff(GridPtr g, const Disc& d);

}  // namespace disclab
