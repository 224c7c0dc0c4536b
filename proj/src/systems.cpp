#include "disclab/systems.hpp"

#include <Eigen/Cholesky>
#include <Eigen/IterativeLinearSolvers>
#include <cmath>
#include <stdexcept>

#include "disclab/kernels.hpp"
#include "disclab/operators.hpp"
#include "disclab/quadrature.hpp"

namespace disclab {

Field solve_linear_system(const SystemProblem& prob, SolveStats* stats) {
  const int m = prob.omega.arity().rows;
  if (prob.omega.arity().cols != m || prob.omega.arity().comps != 2 ||
      prob.e.arity().rows != m || prob.e.arity().cols != 1 ||
      prob.e.arity().comps != 1) {
    throw std::invalid_argument("solve_linear_system arity mismatch");
  }
  if (!(prob.s > 1.0)) {
    throw std::invalid_argument("integrability tag s must exceed 1");
  }
  const auto gp = prob.omega.grid();
  const auto& g = *gp;
  DiscDomain dom(gp, Disc::unit(), true);
  const int U = dom.unknown_count();
  const int n = g.resolution();
  const double h = g.spacing();
  const double ih2 = 1.0 / (h * h);

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(U) * m * (5 + 6 * m));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(U) * m);

  for (int u = 0; u < U; ++u) {
    const int id = dom.node_of(u);
    const auto& L = dom.legs(u);
    const double aW = L[0].alpha, aE = L[1].alpha, aS = L[2].alpha,
                 aN = L[3].alpha;
    const double diag = 2.0 * ih2 / (aE * aW) + 2.0 * ih2 / (aN * aS);
    const double cf[4] = {2.0 * ih2 / (aW * (aW + aE)),
                          2.0 * ih2 / (aE * (aW + aE)),
                          2.0 * ih2 / (aS * (aS + aN)),
                          2.0 * ih2 / (aN * (aS + aN))};
    for (int i = 0; i < m; ++i) {
      const Eigen::Index row = static_cast<Eigen::Index>(u) * m + i;
      trip.emplace_back(row, row, diag);
      for (int l = 0; l < 4; ++l) {
        if (L[l].nbr >= 0) {
          trip.emplace_back(row, static_cast<Eigen::Index>(L[l].nbr) * m + i,
                            -cf[l]);
        } else {
          rhs[row] += cf[l] * prob.trace(L[l].bx, L[l].by, i);
        }
      }
      rhs[row] += prob.e.at(id, i);
      // advection: -(Omega . grad u)_i = -sum_j sum_s Omega(i,j,s) d_s u_j
      for (int j = 0; j < m; ++j) {
        for (int s = 0; s < 2; ++s) {
          const double w = prob.omega.at(id, i, j, s);
          if (w == 0.0) continue;
          const DStencil& st = s == 0 ? dom.dx(id) : dom.dy(id);
          for (int p = 0; p < st.cnt; ++p) {
            const int nid = s == 0 ? id + st.off[p] : id + n * st.off[p];
            const int uu = dom.unknown_of(nid);
            trip.emplace_back(row, static_cast<Eigen::Index>(uu) * m + j,
                              -w * st.coef[p] / h);
          }
        }
      }
    }
  }

  Eigen::SparseMatrix<double> A(static_cast<Eigen::Index>(U) * m,
                                static_cast<Eigen::Index>(U) * m);
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.analyzePattern(A);
  lu.factorize(A);
  if (lu.info() != Eigen::Success) {
    throw std::runtime_error("linear-solver breakdown: factorization failed");
  }
  Eigen::VectorXd x = lu.solve(rhs);
  double res = (A * x - rhs).norm() / std::max(rhs.norm(), 1e-300);
  bool fallback = false;
  if (!(res <= 1e-9)) {
    Eigen::BiCGSTAB<Eigen::SparseMatrix<double>> it;
    it.setTolerance(1e-12);
    it.setMaxIterations(20000);
    it.compute(A);
    Eigen::VectorXd x2 = it.solveWithGuess(rhs, x);
    const double res2 = (A * x2 - rhs).norm() / std::max(rhs.norm(), 1e-300);
    if (res2 < res) {
      x = x2;
      res = res2;
      fallback = true;
    }
    if (!(res <= 1e-9)) {
      throw std::runtime_error("linear-solver breakdown: residual " +
                               std::to_string(res));
    }
  }
  if (stats) {
    stats->residual = res;
    stats->used_iterative_fallback = fallback;
  }

  Field out(gp, {m, 1, 1});
  for (int u = 0; u < U; ++u)
    for (int i = 0; i < m; ++i)
      out.at(dom.node_of(u), i) = x[static_cast<Eigen::Index>(u) * m + i];
  return out;
}

Field build_h_surface_omega(const Field& u,
                            const std::function<double(const double*)>& H) {
  if (u.arity().rows != 3 || u.arity().cols != 1 || u.arity().comps != 1) {
    throw std::invalid_argument(
        "build_h_surface_omega requires a 3-component field, got " +
        u.arity().str());
  }
  const auto gp = u.grid();
  Field rg = rotated_gradient(u);  // (3,1,2)
  Field omega(gp, {3, 3, 2}, FieldTag::Skew);
  for (int id : gp->interior_nodes()) {
    const double uv[3] = {u.at(id, 0), u.at(id, 1), u.at(id, 2)};
    const double hv = H(uv);
    for (int s = 0; s < 2; ++s) {
      const double r1 = rg.at(id, 0, 0, s), r2 = rg.at(id, 1, 0, s),
                   r3 = rg.at(id, 2, 0, s);
      omega.at(id, 0, 1, s) = hv * r3;
      omega.at(id, 1, 0, s) = -hv * r3;
      omega.at(id, 0, 2, s) = -hv * r2;
      omega.at(id, 2, 0, s) = hv * r2;
      omega.at(id, 1, 2, s) = hv * r1;
      omega.at(id, 2, 1, s) = -hv * r1;
    }
  }
  return omega;
}

HSurfaceResult solve_h_surface(GridPtr g, const HSurfaceProblem& prob) {
  HSurfaceResult out;
  Field zero_e(g, {3, 1, 1});
  SystemProblem base{Field(g, {3, 3, 2}, FieldTag::Skew), zero_e, 1.25,
                     prob.trace};
  out.u = solve_linear_system(base);  // harmonic extension of the trace

  // damped Picard map
  auto apply_g = [&](const Field& u) {
    SystemProblem step{build_h_surface_omega(u, prob.H), zero_e, 1.25,
                       prob.trace};
    Field next = solve_linear_system(step);
    next *= prob.damping;
    Field keep = u;
    keep *= (1.0 - prob.damping);
    next += keep;
    return next;
  };

  const int depth = std::max(0, prob.anderson_depth);
  std::vector<Field> hist_u, hist_gu;
  double prev_incr = -1.0;
  for (int it = 0; it < prob.max_iterations; ++it) {
    Field gu = apply_g(out.u);
    Field candidate = gu;
    if (depth > 0) {
      hist_u.push_back(out.u);
      hist_gu.push_back(gu);
      if (hist_u.size() > static_cast<std::size_t>(depth) + 1) {
        hist_u.erase(hist_u.begin());
        hist_gu.erase(hist_gu.begin());
      }
      const int q = static_cast<int>(hist_u.size());
      if (q >= 2 && it >= prob.anderson_warmup) {
        // affine combination of the history minimizing the residual norm:
        // residuals f_i = G(u_i) - u_i, coefficients via differences to f_last
        std::vector<std::vector<double>> f(q);
        for (int i = 0; i < q; ++i) {
          Field r = hist_gu[i] - hist_u[i];
          f[i] = r.raw();
        }
        const int qd = q - 1;
        Eigen::MatrixXd M(qd, qd);
        Eigen::VectorXd b(qd);
        const auto& flast = f[q - 1];
        for (int i = 0; i < qd; ++i) {
          b[i] = 0.0;
          for (std::size_t k = 0; k < flast.size(); ++k)
            b[i] += (flast[k] - f[i][k]) * flast[k];
          for (int j = 0; j <= i; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < flast.size(); ++k)
              acc += (flast[k] - f[i][k]) * (flast[k] - f[j][k]);
            M(i, j) = M(j, i) = acc;
          }
        }
        for (int i = 0; i < qd; ++i) M(i, i) += 1e-14 * (M(i, i) + 1.0);
        Eigen::VectorXd gamma = M.ldlt().solve(b);
        std::vector<double> alpha(q, 0.0);
        alpha[q - 1] = 1.0;
        for (int i = 0; i < qd; ++i) {
          alpha[i] += gamma[i];
          alpha[q - 1] -= gamma[i];
        }
        Field mix(g, {3, 1, 1});
        for (int i = 0; i < q; ++i) {
          Field term = hist_gu[i];
          term *= alpha[i];
          mix += term;
        }
        candidate = mix;
      }
    }
    Field diff = candidate - out.u;
    double incr = w12_norm(diff);
    // safeguard: fall back to the plain step if the accelerated one blows up
    if (prev_incr > 0 && incr > 5.0 * prev_incr) {
      candidate = gu;
      Field d2 = candidate - out.u;
      incr = w12_norm(d2);
    }
    out.log.increments.push_back(incr);
    out.u = candidate;
    out.log.iterations = it + 1;
    if (incr <= prob.tol) {
      out.log.converged = true;
      break;
    }
    prev_incr = incr;
  }
  out.log.weak_residual = h_surface_weak_residual(out.u, prob.H);
  return out;
}

double h_surface_weak_residual(const Field& u,
                               const std::function<double(const double*)>& H) {
  const auto gp = u.grid();
  const auto& g = *gp;
  const Field gu = gradient(u);
  double worst = 0.0;
  const Disc probes[3] = {
      {0.0, 0.0, 0.35}, {0.3, 0.2, 0.25}, {-0.25, -0.3, 0.2}};
  for (const Disc& d : probes) {
    Field phi = cutoff(gp, d);
    Field gphi = gradient(phi);
    for (int comp = 0; comp < 3; ++comp) {
      double acc = 0.0;
      for (int id : g.interior_nodes()) {
        const double w = g.weight(id);
        if (w <= 0.0) continue;
        acc += w * (gu.at(id, comp, 0, 0) * gphi.at(id, 0, 0, 0) +
                    gu.at(id, comp, 0, 1) * gphi.at(id, 0, 0, 1));
        const double uv[3] = {u.at(id, 0), u.at(id, 1), u.at(id, 2)};
        const int a = (comp + 1) % 3, b = (comp + 2) % 3;
        const double cross = gu.at(id, a, 0, 0) * gu.at(id, b, 0, 1) -
                             gu.at(id, b, 0, 0) * gu.at(id, a, 0, 1);
        acc += w * 2.0 * H(uv) * cross * phi.at(id);
      }
      worst = std::max(worst, std::abs(acc));
    }
  }
  return worst;
}

double gauged_divergence_residual(const Field& u, const GaugePair& gp,
                                  const Field& e) {
  const int m = u.arity().rows;
  const auto grid = u.grid();
  const Field gu = gradient(u);               // (m,1,2)
  const Field rxi = rotated_gradient(gp.xi);  // (m,m,2)

  // V = P^T grad u
  Field V(grid, {m, 1, 2});
  for (int id : grid->interior_nodes())
    for (int s = 0; s < 2; ++s)
      for (int i = 0; i < m; ++i) {
        double acc = 0.0;
        for (int k = 0; k < m; ++k)
          acc += gp.P.at(id, k, i) * gu.at(id, k, 0, s);
        V.at(id, i, 0, s) = acc;
      }
  Field divV = divergence(V);
  Field WV = contract_matrix_gradient(rxi, V);
  Field defect(grid, {m, 1, 1});
  for (int id : grid->interior_nodes())
    for (int i = 0; i < m; ++i) {
      double pte = 0.0;
      for (int k = 0; k < m; ++k) pte += gp.P.at(id, k, i) * e.at(id, k);
      defect.at(id, i) = divV.at(id, i) + WV.at(id, i) + pte;
    }
  return lp_norm_on_disc(defect, gp.disc, 2.0);
}

Field stereographic_sphere(GridPtr g) {
  return Field::sample_vector(g, 3, [](double x, double y, double* out) {
    const double r2 = x * x + y * y;
    const double d = 1.0 + r2;
    out[0] = 2.0 * x / d;
    out[1] = 2.0 * y / d;
    out[2] = (r2 - 1.0) / d;
  });
}

}  // namespace disclab
