#include "disclab/operators.hpp"

#include <cmath>
#include <stdexcept>

#include "disclab/kernels.hpp"
#include "disclab/quadrature.hpp"

namespace disclab {

namespace {

enum class Axis { X, Y };

inline double apply_stencil(const Field& u, const DiscGrid& g, int id,
                            const DStencil& st, Axis ax, int r, int c, int s) {
  const int n = g.resolution();
  double acc = 0.0;
  for (int k = 0; k < st.cnt; ++k) {
    const int nid = ax == Axis::X ? id + st.off[k] : id + n * st.off[k];
    acc += st.coef[k] * u.at(nid, r, c, s);
  }
  return acc / g.spacing();
}

Field derivative(const Field& u, Axis ax) {
  const auto& g = *u.grid();
  Field out(u.grid(), u.arity());
  const auto& nodes = g.interior_nodes();
  const Arity a = u.arity();
  par::parallel_for(nodes.size(), [&](std::size_t k) {
    const int id = nodes[k];
    const DStencil& st = ax == Axis::X ? g.dx(id) : g.dy(id);
    for (int r = 0; r < a.rows; ++r)
      for (int c = 0; c < a.cols; ++c)
        for (int s = 0; s < a.comps; ++s)
          out.at(id, r, c, s) = apply_stencil(u, g, id, st, ax, r, c, s);
  });
  return out;
}

}  // namespace

Field apply_dx(const Field& u) { return derivative(u, Axis::X); }
Field apply_dy(const Field& u) { return derivative(u, Axis::Y); }

Field gradient(const Field& u) {
  if (u.arity().comps != 1) {
    throw std::invalid_argument("gradient requires a single spatial slot, got " +
                                u.arity().str());
  }
  const auto& g = *u.grid();
  Field out(u.grid(), {u.arity().rows, u.arity().cols, 2});
  const Field ux = apply_dx(u), uy = apply_dy(u);
  for (int id : g.interior_nodes()) {
    for (int r = 0; r < u.arity().rows; ++r)
      for (int c = 0; c < u.arity().cols; ++c) {
        out.at(id, r, c, 0) = ux.at(id, r, c);
        out.at(id, r, c, 1) = uy.at(id, r, c);
      }
  }
  return out;
}

Field rotated_gradient(const Field& u) {
  if (u.arity().comps != 1) {
    throw std::invalid_argument(
        "rotated gradient requires a single spatial slot, got " +
        u.arity().str());
  }
  const auto& g = *u.grid();
  Field out(u.grid(), {u.arity().rows, u.arity().cols, 2});
  const Field ux = apply_dx(u), uy = apply_dy(u);
  for (int id : g.interior_nodes()) {
    for (int r = 0; r < u.arity().rows; ++r)
      for (int c = 0; c < u.arity().cols; ++c) {
        out.at(id, r, c, 0) = -uy.at(id, r, c);
        out.at(id, r, c, 1) = ux.at(id, r, c);
      }
  }
  return out;
}

namespace {
Field first_order_combo(const Field& w, double cx0, double cy1, bool flip) {
  // divergence: d_x w0 + d_y w1 ; curl: d_x w1 - d_y w0
  if (w.arity().comps != 2) {
    throw std::invalid_argument("operator requires two spatial slots, got " +
                                w.arity().str());
  }
  (void)cx0;
  (void)cy1;
  const auto& g = *w.grid();
  const Arity a{w.arity().rows, w.arity().cols, 1};
  Field w0(w.grid(), a), w1(w.grid(), a);
  const int nn = g.node_count();
  for (int id = 0; id < nn; ++id) {
    for (int r = 0; r < a.rows; ++r)
      for (int c = 0; c < a.cols; ++c) {
        w0.at(id, r, c) = w.at(id, r, c, 0);
        w1.at(id, r, c) = w.at(id, r, c, 1);
      }
  }
  Field out(w.grid(), a);
  if (!flip) {
    const Field dx0 = apply_dx(w0), dy1 = apply_dy(w1);
    for (int id : g.interior_nodes())
      for (int r = 0; r < a.rows; ++r)
        for (int c = 0; c < a.cols; ++c)
          out.at(id, r, c) = dx0.at(id, r, c) + dy1.at(id, r, c);
  } else {
    const Field dx1 = apply_dx(w1), dy0 = apply_dy(w0);
    for (int id : g.interior_nodes())
      for (int r = 0; r < a.rows; ++r)
        for (int c = 0; c < a.cols; ++c)
          out.at(id, r, c) = dx1.at(id, r, c) - dy0.at(id, r, c);
  }
  return out;
}
}  // namespace

Field divergence(const Field& w) { return first_order_combo(w, 1, 1, false); }
Field curl(const Field& w) { return first_order_combo(w, 1, 1, true); }

Field laplacian_compact(const Field& u) {
  const auto& g = *u.grid();
  Field out(u.grid(), u.arity());
  const auto& nodes = g.laplacian_nodes();
  const int n = g.resolution();
  const double ih2 = 1.0 / (g.spacing() * g.spacing());
  const Arity a = u.arity();
  par::parallel_for(nodes.size(), [&](std::size_t k) {
    const int id = nodes[k];
    for (int r = 0; r < a.rows; ++r)
      for (int c = 0; c < a.cols; ++c)
        for (int s = 0; s < a.comps; ++s) {
          const double v = u.at(id + 1, r, c, s) + u.at(id - 1, r, c, s) +
                           u.at(id + n, r, c, s) + u.at(id - n, r, c, s) -
                           4.0 * u.at(id, r, c, s);
          out.at(id, r, c, s) = v * ih2;
        }
  });
  return out;
}

Field contract_matrix_gradient(const Field& w, const Field& gu) {
  const int m = w.arity().rows;
  if (w.arity().cols != m || w.arity().comps != 2 || gu.arity().rows != m ||
      gu.arity().cols != 1 || gu.arity().comps != 2) {
    throw std::invalid_argument("contract: need (m,m,2) . (m,1,2), got " +
                                w.arity().str() + " . " + gu.arity().str());
  }
  Field out(w.grid(), {m, 1, 1});
  const auto& g = *w.grid();
  for (int id : g.interior_nodes()) {
    for (int i = 0; i < m; ++i) {
      double acc = 0.0;
      for (int j = 0; j < m; ++j)
        for (int s = 0; s < 2; ++s)
          acc += w.at(id, i, j, s) * gu.at(id, j, 0, s);
      out.at(id, i) = acc;
    }
  }
  return out;
}

double w12_norm_gradpart(const Field& u) { return l2_norm(gradient(u)); }

double w12_norm(const Field& u) {
  const double a = l2_norm(u), b = w12_norm_gradpart(u);
  return std::sqrt(a * a + b * b);
}

double w22_norm(const Field& u) {
  const Field gu = gradient(u);
  const Field gxx = apply_dx(gu), gyy = apply_dy(gu);
  const double a = l2_norm(u), b = l2_norm(gu);
  const double c = l2_norm(gxx), d = l2_norm(gyy);
  return std::sqrt(a * a + b * b + c * c + d * d);
}

}  // namespace disclab
