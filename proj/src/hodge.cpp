#include "disclab/hodge.hpp"

#include <cmath>
#include <stdexcept>

#include "disclab/operators.hpp"
#include "disclab/quadrature.hpp"

namespace disclab {

HodgeTriple hodge_decompose(const Field& chi, const Disc& d) {
  const Arity a = chi.arity();
  if (a.cols != 1 || a.comps != 2) {
    throw std::invalid_argument("hodge_decompose needs arity (m,1,2), got " +
                                a.str());
  }
  const int m = a.rows;
  const auto& gp = chi.grid();
  const Field dv = divergence(chi);
  const Field cu = curl(chi);

  DiscDomain dom(gp, d);
  const int U = dom.unknown_count();
  HodgeTriple out;
  out.f = Field(gp, {m, 1, 1});
  out.g = Field(gp, {m, 1, 1});
  SolveStats stats;
  auto zero = [](double, double) { return 0.0; };
  for (int r = 0; r < m; ++r) {
    Eigen::VectorXd bf(U), bg(U);
    for (int u = 0; u < U; ++u) {
      const int id = dom.node_of(u);
      bf[u] = -dv.at(id, r);
      bg[u] = -cu.at(id, r);
    }
    Eigen::VectorXd xf = dom.solve_neg_laplace(bf, zero, &stats);
    out.solver_residual = std::max(out.solver_residual, stats.residual);
    Eigen::VectorXd xg = dom.solve_neg_laplace(bg, zero, &stats);
    out.solver_residual = std::max(out.solver_residual, stats.residual);
    for (int u = 0; u < U; ++u) {
      const int id = dom.node_of(u);
      out.f.at(id, r) = xf[u];
      out.g.at(id, r) = xg[u];
    }
  }
  out.h = chi - gradient(out.f) - rotated_gradient(out.g);
  return out;
}

double harmonic_residual(const Field& h, const Disc& d, int guard_cells) {
  const auto& g = *h.grid();
  const double guard = d.r - guard_cells * g.spacing();
  const Field lap = laplacian_compact(h);
  double worst = 0.0;
  for (int id : g.laplacian_nodes()) {
    const double rho = std::hypot(g.x(id) - d.cx, g.y(id) - d.cy);
    if (rho > guard) continue;
    const double* b = lap.block(id);
    for (int k = 0; k < lap.arity().block(); ++k)
      worst = std::max(worst, std::abs(b[k]));
  }
  return worst;
}

HarmonicDecayReport harmonic_decay_check(const Field& h, const Disc& d,
                                         double p,
                                         const std::vector<double>& ratios,
                                         double bound, double harmonic_tol) {
  HarmonicDecayReport rep;
  rep.p = p;
  rep.bound = bound;
  rep.residual = harmonic_residual(h, d);
  if (rep.residual > harmonic_tol) {
    throw std::runtime_error(
        "field is not harmonic on the disc: harmonic_residual = " +
        std::to_string(rep.residual) + " > " + std::to_string(harmonic_tol));
  }
  const double outer = std::pow(lp_norm_on_disc(h, d, p), p);
  for (double ratio : ratios) {
    const Disc inner{d.cx, d.cy, ratio * d.r};
    const double num = std::pow(lp_norm_on_disc(h, inner, p), p);
    const double c = num / (ratio * ratio * outer);
    rep.ratios.push_back(ratio);
    rep.measured_c.push_back(c);
    if (c > bound) rep.violation = true;
  }
  return rep;
}

}  // namespace disclab
