#pragma once

#include "disclab/field.hpp"

namespace disclab {

/// First-derivative operators. Values are produced on interior nodes
/// (centered differences, one-sided near the rim); other nodes hold zero.
Field gradient(const Field& u);          // (r,c,1) -> (r,c,2)
Field rotated_gradient(const Field& u);  // (r,c,1) -> (r,c,2), (-d_y, d_x)
Field divergence(const Field& w);        // (r,c,2) -> (r,c,1)
Field curl(const Field& w);              // (r,c,2) -> (r,c,1)

/// d/dx and d/dy of every component slot.
Field apply_dx(const Field& u);
Field apply_dy(const Field& u);

/// Compact 5-point Laplacian, evaluated where the full stencil lies in the
/// interior set (zero elsewhere).
Field laplacian_compact(const Field& u);

/// Matrix product contraction (m,m,2) . (m,1,2) -> (m,1,1), pairing spatial
/// slots: (W.G)_i = sum_j sum_s W(i,j,s) G(j,s).
Field contract_matrix_gradient(const Field& w, const Field& gu);

/// Sobolev norms over the unit disc built from the discrete operators.
double w12_norm(const Field& u);
double w22_norm(const Field& u);
double w12_norm_gradpart(const Field& u);  // ||grad u||_L2 only

}  // namespace disclab
