#include "disclab/gauge.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "disclab/kernels.hpp"
#include "disclab/operators.hpp"
#include "disclab/quadrature.hpp"

namespace disclab {

namespace {

// ---------------------------------------------------------------------------
// small dense matrix helpers (row-major buffers, m <= 8)

constexpr int kMaxM = 8;

inline void gather_slot(const Field& f, int id, int s, int m, double* out) {
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) out[r * m + c] = f.at(id, r, c, s);
}

inline void scatter_slot(Field& f, int id, int s, int m, const double* in) {
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) f.at(id, r, c, s) = in[r * m + c];
}

inline void matmul(const double* A, const double* B, double* C, int m) {
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) {
      double acc = 0.0;
      for (int k = 0; k < m; ++k) acc += A[r * m + k] * B[k * m + c];
      C[r * m + c] = acc;
    }
}

inline void matmul_tn(const double* A, const double* B, double* C, int m) {
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) {
      double acc = 0.0;
      for (int k = 0; k < m; ++k) acc += A[k * m + r] * B[k * m + c];
      C[r * m + c] = acc;
    }
}

void exp_skew_node(const double* U, double* Q, int m) {
  if (m == 2) {
    const double th = U[2];  // U = [[0,-th],[th,0]]
    const double c = std::cos(th), s = std::sin(th);
    Q[0] = c;
    Q[1] = -s;
    Q[2] = s;
    Q[3] = c;
    return;
  }
  if (m == 3) {
    const double a = U[7], b = U[2], c = U[3];  // axis (a,b,c)
    const double th2 = a * a + b * b + c * c;
    const double th = std::sqrt(th2);
    double s1, s2;  // sin(th)/th, (1-cos th)/th^2
    if (th < 1e-4) {
      s1 = 1.0 - th2 / 6.0 + th2 * th2 / 120.0;
      s2 = 0.5 - th2 / 24.0 + th2 * th2 / 720.0;
    } else {
      s1 = std::sin(th) / th;
      s2 = (1.0 - std::cos(th)) / th2;
    }
    double U2[9];
    matmul(U, U, U2, 3);
    for (int k = 0; k < 9; ++k) Q[k] = s1 * U[k] + s2 * U2[k];
    Q[0] += 1.0;
    Q[4] += 1.0;
    Q[8] += 1.0;
    return;
  }
  // scaling and squaring with a 13-term series
  double norm = 0.0;
  for (int k = 0; k < m * m; ++k) norm = std::max(norm, std::abs(U[k]));
  int squarings = 0;
  double scale = 1.0;
  while (norm * scale > 0.5 && squarings < 40) {
    scale *= 0.5;
    ++squarings;
  }
  double A[kMaxM * kMaxM], term[kMaxM * kMaxM], acc[kMaxM * kMaxM],
      tmp[kMaxM * kMaxM];
  for (int k = 0; k < m * m; ++k) {
    A[k] = U[k] * scale;
    term[k] = 0.0;
    acc[k] = 0.0;
  }
  for (int r = 0; r < m; ++r) term[r * m + r] = acc[r * m + r] = 1.0;
  for (int j = 1; j <= 13; ++j) {
    matmul(term, A, tmp, m);
    for (int k = 0; k < m * m; ++k) {
      term[k] = tmp[k] / j;
      acc[k] += term[k];
    }
  }
  for (int sq = 0; sq < squarings; ++sq) {
    matmul(acc, acc, tmp, m);
    for (int k = 0; k < m * m; ++k) acc[k] = tmp[k];
  }
  for (int k = 0; k < m * m; ++k) Q[k] = acc[k];
}

// ---------------------------------------------------------------------------
// domain-restricted derivative machinery

Field dom_derivative(const DiscDomain& dom, const Field& u, int axis) {
  const auto& g = *u.grid();
  const int n = g.resolution();
  const double ih = 1.0 / g.spacing();
  Field out(u.grid(), u.arity());
  const Arity a = u.arity();
  const auto& nodes = dom.nodes();
  par::parallel_for(nodes.size(), [&](std::size_t k) {
    const int id = nodes[k];
    const DStencil& st = axis == 0 ? dom.dx(id) : dom.dy(id);
    for (int r = 0; r < a.rows; ++r)
      for (int c = 0; c < a.cols; ++c)
        for (int s = 0; s < a.comps; ++s) {
          double acc = 0.0;
          for (int p = 0; p < st.cnt; ++p) {
            const int nid = axis == 0 ? id + st.off[p] : id + n * st.off[p];
            acc += st.coef[p] * u.at(nid, r, c, s);
          }
          out.at(id, r, c, s) = acc * ih;
        }
  });
  return out;
}

Field slot_of(const DiscDomain& dom, const Field& w, int s) {
  const int m = w.arity().rows;
  Field out(w.grid(), {m, m, 1});
  for (int id : dom.nodes())
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c) out.at(id, r, c) = w.at(id, r, c, s);
  return out;
}

// div over the domain: (m,m,2) -> (m,m,1)
Field dom_div(const DiscDomain& dom, const Field& w) {
  const int m = w.arity().rows;
  Field d0 = dom_derivative(dom, slot_of(dom, w, 0), 0);
  Field d1 = dom_derivative(dom, slot_of(dom, w, 1), 1);
  Field out(w.grid(), {m, m, 1});
  for (int id : dom.nodes())
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c)
        out.at(id, r, c) = d0.at(id, r, c) + d1.at(id, r, c);
  return out;
}

// w = R^T (DR)_s + t R^T Omega_s R on domain nodes
Field build_w(const DiscDomain& dom, const Field& R, const Field& omega,
              double t) {
  const int m = R.arity().rows;
  Field dxR = dom_derivative(dom, R, 0);
  Field dyR = dom_derivative(dom, R, 1);
  Field w(R.grid(), {m, m, 2});
  const auto& nodes = dom.nodes();
  par::parallel_for(nodes.size(), [&](std::size_t k) {
    const int id = nodes[k];
    double Rb[kMaxM * kMaxM], Db[kMaxM * kMaxM], Ob[kMaxM * kMaxM],
        T1[kMaxM * kMaxM], T2[kMaxM * kMaxM];
    gather_slot(R, id, 0, m, Rb);
    for (int s = 0; s < 2; ++s) {
      gather_slot(s == 0 ? dxR : dyR, id, 0, m, Db);
      matmul_tn(Rb, Db, T1, m);  // R^T dR
      gather_slot(omega, id, s, m, Ob);
      matmul_tn(Rb, Ob, T2, m);
      matmul(T2, Rb, Ob, m);  // R^T Omega R
      for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c)
          w.at(id, r, c, s) = T1[r * m + c] + t * Ob[r * m + c];
    }
  });
  return w;
}

// gradient + slotwise commutator, then div: H_w(psi) = div(grad psi + [w, psi])
Field apply_hw(const DiscDomain& dom, const Field& w, const Field& psi) {
  const int m = psi.arity().rows;
  Field dx = dom_derivative(dom, psi, 0), dy = dom_derivative(dom, psi, 1);
  Field inner(psi.grid(), {m, m, 2});
  const auto& nodes = dom.nodes();
  par::parallel_for(nodes.size(), [&](std::size_t k) {
    const int id = nodes[k];
    double W[kMaxM * kMaxM], P[kMaxM * kMaxM], A[kMaxM * kMaxM],
        B[kMaxM * kMaxM];
    gather_slot(psi, id, 0, m, P);
    for (int s = 0; s < 2; ++s) {
      gather_slot(w, id, s, m, W);
      matmul(W, P, A, m);
      matmul(P, W, B, m);
      const Field& d = s == 0 ? dx : dy;
      for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c)
          inner.at(id, r, c, s) = d.at(id, r, c) + A[r * m + c] - B[r * m + c];
    }
  });
  return dom_div(dom, inner);
}

double dom_l2(const DiscDomain& dom, const Field& f) {
  const double s = par::reduce_sum(
      static_cast<std::size_t>(dom.unknown_count()), [&](std::size_t u) {
        const double v = f.norm_at(dom.node_of(static_cast<int>(u)));
        return dom.weight(static_cast<int>(u)) * v * v;
      });
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// skew packing: strict lower triangle, component-major layout

int skew_dim(int m) { return m * (m - 1) / 2; }

void pack_skew(const DiscDomain& dom, const Field& f, Eigen::VectorXd& v) {
  const int m = f.arity().rows;
  const int K = skew_dim(m), U = dom.unknown_count();
  v.resize(static_cast<Eigen::Index>(K) * U);
  int k = 0;
  for (int r = 1; r < m; ++r)
    for (int c = 0; c < r; ++c, ++k)
      for (int u = 0; u < U; ++u)
        v[static_cast<Eigen::Index>(k) * U + u] = f.at(dom.node_of(u), r, c);
}

void unpack_skew(const DiscDomain& dom, const Eigen::VectorXd& v, Field& f) {
  const int m = f.arity().rows;
  const int K = skew_dim(m), U = dom.unknown_count();
  int k = 0;
  for (int r = 1; r < m; ++r)
    for (int c = 0; c < r; ++c, ++k)
      for (int u = 0; u < U; ++u) {
        const double val = v[static_cast<Eigen::Index>(k) * U + u];
        f.at(dom.node_of(u), r, c) = val;
        f.at(dom.node_of(u), c, r) = -val;
      }
}

// ---------------------------------------------------------------------------
// matrix-free GMRES with left preconditioning

using Op = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

Eigen::VectorXd gmres(const Op& apply, const Op& precond,
                      const Eigen::VectorXd& b, int restart, int maxit,
                      double tol, int* used_iters = nullptr) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size());
  const double bnorm = std::max(precond(b).norm(), 1e-300);
  int iters = 0;
  while (iters < maxit) {
    Eigen::VectorXd r = precond(b - apply(x));
    const double beta = r.norm();
    if (beta / bnorm <= tol) break;
    const int mdim = std::min(restart, maxit - iters);
    std::vector<Eigen::VectorXd> V;
    V.reserve(mdim + 1);
    V.push_back(r / beta);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(mdim + 1, mdim);
    Eigen::VectorXd cs = Eigen::VectorXd::Zero(mdim);
    Eigen::VectorXd sn = Eigen::VectorXd::Zero(mdim);
    Eigen::VectorXd gvec = Eigen::VectorXd::Zero(mdim + 1);
    gvec[0] = beta;
    int j = 0;
    bool done = false;
    for (; j < mdim && !done; ++iters) {
      Eigen::VectorXd wv = precond(apply(V[j]));
      for (int i = 0; i <= j; ++i) {
        H(i, j) = wv.dot(V[i]);
        wv -= H(i, j) * V[i];
      }
      H(j + 1, j) = wv.norm();
      const bool breakdown = H(j + 1, j) <= 1e-300;
      if (!breakdown) V.push_back(wv / H(j + 1, j));
      for (int i = 0; i < j; ++i) {
        const double t = cs[i] * H(i, j) + sn[i] * H(i + 1, j);
        H(i + 1, j) = -sn[i] * H(i, j) + cs[i] * H(i + 1, j);
        H(i, j) = t;
      }
      const double dgt = std::hypot(H(j, j), H(j + 1, j));
      cs[j] = H(j, j) / dgt;
      sn[j] = H(j + 1, j) / dgt;
      H(j, j) = dgt;
      H(j + 1, j) = 0.0;
      gvec[j + 1] = -sn[j] * gvec[j];
      gvec[j] = cs[j] * gvec[j];
      ++j;
      if (std::abs(gvec[j]) / bnorm <= tol || breakdown) done = true;
    }
    if (j > 0) {
      Eigen::VectorXd y =
          H.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(
              gvec.head(j));
      for (int i = 0; i < j; ++i) x += y[i] * V[i];
    }
    if (done || j < mdim) break;
  }
  if (used_iters) *used_iters = iters;
  return x;
}

// ---------------------------------------------------------------------------
// least-squares potential recovery

struct LsRecovery {
  Eigen::SparseMatrix<double> B;  // 2U x U, rows = (-dy; dx) per node
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
};

std::unique_ptr<LsRecovery> build_ls(const DiscDomain& dom) {
  const auto& g = *dom.grid();
  const int n = g.resolution();
  const int U = dom.unknown_count();
  auto ls = std::make_unique<LsRecovery>();
  std::vector<Eigen::Triplet<double>> trip;
  const double ih = 1.0 / g.spacing();
  for (int u = 0; u < U; ++u) {
    const int id = dom.node_of(u);
    const DStencil& sy = dom.dy(id);
    for (int p = 0; p < sy.cnt; ++p) {
      const int uu = dom.unknown_of(id + n * sy.off[p]);
      trip.emplace_back(u, uu, -sy.coef[p] * ih);  // -d_y
    }
    const DStencil& sx = dom.dx(id);
    for (int p = 0; p < sx.cnt; ++p) {
      const int uu = dom.unknown_of(id + sx.off[p]);
      trip.emplace_back(U + u, uu, sx.coef[p] * ih);  // d_x
    }
  }
  ls->B.resize(2 * U, U);
  ls->B.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseMatrix<double> Bt = ls->B.transpose();
  Eigen::SparseMatrix<double> A = Bt * ls->B;
  A.coeffRef(0, 0) += 1.0;  // pin the constant mode
  A.makeCompressed();
  ls->lu.analyzePattern(A);
  ls->lu.factorize(A);
  if (ls->lu.info() != Eigen::Success) {
    throw std::runtime_error("solver failure: potential recovery factorization");
  }
  return ls;
}

// per skew component: xi = argmin |B xi - w|^2, then weighted mean-zero
Field ls_recover(const DiscDomain& dom, const LsRecovery& ls, const Field& w) {
  const int m = w.arity().rows;
  const int U = dom.unknown_count();
  Field xi(w.grid(), {m, m, 1}, FieldTag::Skew);
  double wsum = 0.0;
  for (int u = 0; u < U; ++u) wsum += dom.weight(u);
  for (int r = 1; r < m; ++r) {
    for (int c = 0; c < r; ++c) {
      Eigen::VectorXd rhs(2 * U);
      for (int u = 0; u < U; ++u) {
        rhs[u] = w.at(dom.node_of(u), r, c, 0);
        rhs[U + u] = w.at(dom.node_of(u), r, c, 1);
      }
      Eigen::VectorXd bt = ls.B.transpose() * rhs;
      Eigen::VectorXd x = ls.lu.solve(bt);
      double mean = 0.0;
      for (int u = 0; u < U; ++u) mean += dom.weight(u) * x[u];
      mean /= std::max(wsum, 1e-300);
      for (int u = 0; u < U; ++u) {
        xi.at(dom.node_of(u), r, c) = x[u] - mean;
        xi.at(dom.node_of(u), c, r) = -(x[u] - mean);
      }
    }
  }
  return xi;
}

// rot-grad of a skew field over the domain, (m,m,1) -> (m,m,2)
Field dom_rot_grad(const DiscDomain& dom, const Field& xi) {
  const int m = xi.arity().rows;
  Field dx = dom_derivative(dom, xi, 0), dy = dom_derivative(dom, xi, 1);
  Field out(xi.grid(), {m, m, 2});
  for (int id : dom.nodes())
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c) {
        out.at(id, r, c, 0) = -dy.at(id, r, c);
        out.at(id, r, c, 1) = dx.at(id, r, c);
      }
  return out;
}

Field identity_field(GridPtr g, int m) {
  Field R(g, {m, m, 1}, FieldTag::Rotation);
  const int nn = g->node_count();
  for (int id = 0; id < nn; ++id)
    for (int r = 0; r < m; ++r) R.at(id, r, r) = 1.0;
  return R;
}

void right_multiply_exp(const DiscDomain& dom, Field& R, const Field& delta) {
  const int m = R.arity().rows;
  const auto& nodes = dom.nodes();
  par::parallel_for(nodes.size(), [&](std::size_t k) {
    const int id = nodes[k];
    double D[kMaxM * kMaxM], Q[kMaxM * kMaxM], Rb[kMaxM * kMaxM],
        T[kMaxM * kMaxM];
    gather_slot(delta, id, 0, m, D);
    exp_skew_node(D, Q, m);
    gather_slot(R, id, 0, m, Rb);
    matmul(Rb, Q, T, m);
    scatter_slot(R, id, 0, m, T);
  });
}

struct NewtonOutcome {
  bool ok = false;
  int iters = 0;
  double residual = 0.0;
};

// Drives div(R^T dR + t R^T Omega R) down by rotating R on the right. The
// composed divergence has an O(h^2) consistency floor, so the loop accepts
// either the absolute tolerance or stagnation after a solid reduction.
NewtonOutcome newton_rotate(const DiscDomain& dom, Field& R, const Field& omega,
                            double t, double tol_abs, const GaugeConfig& cfg) {
  const int m = R.arity().rows;
  const int K = skew_dim(m), U = dom.unknown_count();
  NewtonOutcome out;
  double first = -1.0, prev = -1.0;
  for (int it = 0; it <= cfg.newton_max; ++it) {
    Field w = build_w(dom, R, omega, t);
    Field r = dom_div(dom, w);
    const double rnorm = dom_l2(dom, r);
    out.iters = it;
    out.residual = rnorm;
    if (cfg.verbose)
      std::fprintf(stderr, "    newton it=%d rnorm=%.3e tol=%.3e\n", it, rnorm,
                   tol_abs);
    if (rnorm <= tol_abs) {
      out.ok = true;
      return out;
    }
    if (first < 0) first = rnorm;
    // once inside the consistency floor, per-iteration gains collapse; stop
    // instead of letting the Krylov solver chase noise directions
    const bool plateau = prev > 0 && rnorm > 0.1 * prev &&
                         rnorm <= cfg.newton_stall_accept * first;
    const bool stagnated = prev > 0 && rnorm > 0.99 * prev;
    if (plateau || stagnated || it == cfg.newton_max) {
      out.ok = rnorm <= cfg.newton_stall_accept * first;
      return out;
    }
    if (rnorm > 50.0 * first) return out;
    prev = rnorm;

    Op apply = [&](const Eigen::VectorXd& v) {
      Field psi(R.grid(), {m, m, 1}, FieldTag::Skew);
      unpack_skew(dom, v, psi);
      Field h = apply_hw(dom, w, psi);
      Eigen::VectorXd outv;
      pack_skew(dom, h, outv);
      return outv;
    };
    Op precond = [&](const Eigen::VectorXd& v) {
      Eigen::VectorXd z(v.size());
      for (int k = 0; k < K; ++k) {
        Eigen::VectorXd comp = v.segment(static_cast<Eigen::Index>(k) * U, U);
        Eigen::VectorXd sol =
            dom.solve_neg_laplace(comp, [](double, double) { return 0.0; });
        z.segment(static_cast<Eigen::Index>(k) * U, U) = -sol;  // inv(+Lap)
      }
      return z;
    };
    Eigen::VectorXd rhs;
    pack_skew(dom, r, rhs);
    rhs = -rhs;
    int gmit = 0;
    Eigen::VectorXd dv = gmres(apply, precond, rhs, cfg.gmres_restart,
                               cfg.gmres_max, cfg.gmres_tol, &gmit);
    if (cfg.verbose) std::fprintf(stderr, "      gmres iters=%d\n", gmit);
    Field delta(R.grid(), {m, m, 1}, FieldTag::Skew);
    unpack_skew(dom, dv, delta);

    Field saved = R;
    double frac = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 4; ++bt) {
      Field step = delta;
      step *= frac;
      R = saved;
      right_multiply_exp(dom, R, step);
      Field wn = build_w(dom, R, omega, t);
      const double rn = dom_l2(dom, dom_div(dom, wn));
      if (rn < rnorm) {
        accepted = true;
        break;
      }
      frac *= 0.5;
    }
    if (!accepted) {
      R = saved;
      out.ok = rnorm <= cfg.newton_stall_accept * first;
      return out;
    }
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

Field exp_skew(const Field& U) {
  if (U.arity().rows != U.arity().cols || U.arity().comps != 1) {
    throw std::invalid_argument("exp_skew needs arity (m,m,1), got " +
                                U.arity().str());
  }
  if (U.arity().rows > kMaxM) {
    throw std::invalid_argument("exp_skew supports m <= 8");
  }
  const int m = U.arity().rows;
  Field Q(U.grid(), U.arity(), FieldTag::Rotation);
  const int nn = U.grid()->node_count();
  par::parallel_for(static_cast<std::size_t>(nn), [&](std::size_t id) {
    double Ub[kMaxM * kMaxM], Qb[kMaxM * kMaxM];
    gather_slot(U, static_cast<int>(id), 0, m, Ub);
    exp_skew_node(Ub, Qb, m);
    scatter_slot(Q, static_cast<int>(id), 0, m, Qb);
  });
  return Q;
}

Field t_apply(const Field& U, const Field& lambda, const Field& zeta) {
  const int m = U.arity().rows;
  if (U.arity().cols != m || U.arity().comps != 1 ||
      lambda.arity() != Arity{m, m, 2} || zeta.arity() != Arity{m, m, 1}) {
    throw std::invalid_argument("t_apply arity mismatch");
  }
  const auto& g = *U.grid();
  Field Q = exp_skew(U);
  Field dxQ = apply_dx(Q), dyQ = apply_dy(Q);
  Field rg = rotated_gradient(zeta);  // (m,m,2)
  Field inner(U.grid(), {m, m, 2});
  const auto& nodes = g.interior_nodes();
  par::parallel_for(nodes.size(), [&](std::size_t k) {
    const int id = nodes[k];
    double Qb[kMaxM * kMaxM], A[kMaxM * kMaxM], B[kMaxM * kMaxM],
        C[kMaxM * kMaxM];
    gather_slot(Q, id, 0, m, Qb);
    for (int s = 0; s < 2; ++s) {
      gather_slot(s == 0 ? dxQ : dyQ, id, 0, m, A);
      matmul_tn(Qb, A, B, m);  // e^{-U} d e^{U}
      for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c)
          A[r * m + c] = rg.at(id, r, c, s) + lambda.at(id, r, c, s);
      matmul_tn(Qb, A, C, m);
      matmul(C, Qb, A, m);  // e^{-U}(rot-grad zeta + lambda)e^{U}
      for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c)
          inner.at(id, r, c, s) = B[r * m + c] + A[r * m + c];
    }
  });
  Field out = divergence(inner);
  skew_project(out);
  return out;
}

Field linearized_apply(const Field& psi, const Field& zeta) {
  const int m = psi.arity().rows;
  if (psi.arity().cols != m || psi.arity().comps != 1 ||
      zeta.arity() != Arity{m, m, 1}) {
    throw std::invalid_argument("linearized_apply arity mismatch");
  }
  const auto& g = *psi.grid();
  Field rg = rotated_gradient(zeta);
  Field gp = gradient(psi);
  Field inner(psi.grid(), {m, m, 2});
  for (int id : g.interior_nodes()) {
    double W[kMaxM * kMaxM], P[kMaxM * kMaxM], A[kMaxM * kMaxM],
        B[kMaxM * kMaxM];
    gather_slot(psi, id, 0, m, P);
    for (int s = 0; s < 2; ++s) {
      gather_slot(rg, id, s, m, W);
      matmul(W, P, A, m);
      matmul(P, W, B, m);
      for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c)
          inner.at(id, r, c, s) =
              gp.at(id, r, c, s) + A[r * m + c] - B[r * m + c];
    }
  }
  Field out = divergence(inner);
  skew_project(out);
  return out;
}

Field solve_gauge_step(const Field& zeta, const Field& R, const Field& lambda,
                       double tol) {
  const int m = zeta.arity().rows;
  if (R.arity() != Arity{m, m, 1}) {
    throw std::invalid_argument("solve_gauge_step arity mismatch");
  }
  const auto gp = zeta.grid();
  DiscDomain dom(gp, Disc::unit(), false);
  const int K = skew_dim(m), U = dom.unknown_count();
  Field Ucur(gp, {m, m, 1}, FieldTag::Skew);
  double first = -1.0;
  for (int it = 0; it <= 30; ++it) {
    Field r = t_apply(Ucur, lambda, zeta);
    const double rnorm = l2_norm(r);
    if (rnorm <= tol) return Ucur;
    if (first < 0) first = rnorm;
    if (it == 30 || rnorm > 50.0 * first) {
      throw std::runtime_error("step failure: Newton residual " +
                               std::to_string(rnorm));
    }
    // directional finite-difference Jacobian at the current iterate
    Eigen::VectorXd ucur_v;
    pack_skew(dom, Ucur, ucur_v);
    const double uscale = 1.0 + ucur_v.norm();
    Op apply = [&](const Eigen::VectorXd& v) {
      const double vn = std::max(v.norm(), 1e-300);
      const double eps = 1e-7 * uscale / vn;
      Field pert(gp, {m, m, 1}, FieldTag::Skew);
      unpack_skew(dom, ucur_v + eps * v, pert);
      Field tp = t_apply(pert, lambda, zeta);
      tp -= r;
      tp *= 1.0 / eps;
      Eigen::VectorXd outv;
      pack_skew(dom, tp, outv);
      return outv;
    };
    Op precond = [&](const Eigen::VectorXd& v) {
      Eigen::VectorXd z(v.size());
      for (int k = 0; k < K; ++k) {
        Eigen::VectorXd comp = v.segment(static_cast<Eigen::Index>(k) * U, U);
        Eigen::VectorXd sol =
            dom.solve_neg_laplace(comp, [](double, double) { return 0.0; });
        z.segment(static_cast<Eigen::Index>(k) * U, U) = -sol;
      }
      return z;
    };
    Eigen::VectorXd rhs;
    pack_skew(dom, r, rhs);
    rhs = -rhs;
    Eigen::VectorXd dv = gmres(apply, precond, rhs, 40, 200, 1e-6);
    Field delta(gp, {m, m, 1}, FieldTag::Skew);
    unpack_skew(dom, dv, delta);
    Ucur += delta;
  }
  return Ucur;
}

Field vector_potential(const Field& w, const Disc& d, double div_tol_rel) {
  if (w.arity().rows != w.arity().cols || w.arity().comps != 2) {
    throw std::invalid_argument("vector_potential needs arity (m,m,2), got " +
                                w.arity().str());
  }
  DiscDomain dom(w.grid(), d, false);
  const double wnorm = dom_l2(dom, w);
  const double divnorm = dom_l2(dom, dom_div(dom, w));
  if (divnorm > div_tol_rel * std::max(wnorm, 1e-300) && divnorm > 1e-14) {
    throw std::runtime_error(
        "vector_potential: input is not divergence-free, |div w|_L2 = " +
        std::to_string(divnorm) + " against |w|_L2 = " + std::to_string(wnorm));
  }
  auto ls = build_ls(dom);
  return ls_recover(dom, *ls, w);
}

GaugePair decompose(const Field& omega, const Disc& d, const GaugeConfig& cfg) {
  const int m = omega.arity().rows;
  if (omega.arity().cols != m || omega.arity().comps != 2) {
    throw std::invalid_argument("decompose needs arity (m,m,2), got " +
                                omega.arity().str());
  }
  if (omega.skew_defect() > 1e-12) {
    throw std::invalid_argument("decompose: potential is not skew, defect " +
                                std::to_string(omega.skew_defect()));
  }
  const auto gp = omega.grid();

  // zero extension outside the closed unit disc
  Field om = omega;
  const int nn = gp->node_count();
  for (int id = 0; id < nn; ++id) {
    const double x = gp->x(id), y = gp->y(id);
    if (x * x + y * y > 1.0 + 1e-14) {
      double* b = om.block(id);
      for (int k = 0; k < om.arity().block(); ++k) b[k] = 0.0;
    }
  }

  GaugePair out;
  out.disc = d;
  out.omega_l2 = lp_norm_on_disc(om, d, 2.0);
  if (out.omega_l2 > cfg.eps_threshold) {
    throw std::runtime_error(
        "decompose: smallness precondition violated, |Omega|_L2 = " +
        std::to_string(out.omega_l2) + " > " +
        std::to_string(cfg.eps_threshold));
  }

  DiscDomain dom(gp, d, false);
  out.P = identity_field(gp, m);
  out.xi = Field(gp, {m, m, 1}, FieldTag::Skew);
  if (out.omega_l2 == 0.0) return out;

  const double tol_abs =
      std::max(cfg.newton_tol_floor, cfg.newton_tol_rel * out.omega_l2);
  double t = 0.0, step = cfg.t_step;
  while (t < 1.0 - 1e-12) {
    const double t_next = std::min(1.0, t + step);
    Field cand = out.P;
    NewtonOutcome res = newton_rotate(dom, cand, om, t_next, tol_abs, cfg);
    if (res.ok) {
      out.P = cand;
      t = t_next;
      out.history.push_back({t, step, res.iters, res.residual});
    } else {
      step *= 0.5;
      if (step < cfg.t_step_min) {
        throw std::runtime_error(
            "decomposition failed: continuation stalled at t = " +
            std::to_string(t));
      }
    }
  }

  Field w = build_w(dom, out.P, om, 1.0);
  auto ls = build_ls(dom);
  out.xi = ls_recover(dom, *ls, w);
  Field defect = dom_rot_grad(dom, out.xi);
  defect -= w;
  out.residual = dom_l2(dom, defect);
  if (out.residual > cfg.residual_tol_rel * out.omega_l2) {
    throw std::runtime_error(
        "decompose: gauge residual " + std::to_string(out.residual) +
        " exceeds tolerance " +
        std::to_string(cfg.residual_tol_rel * out.omega_l2));
  }
  return out;
}

ManufacturedGauge manufactured_gauge(GridPtr g, double amplitude,
                                     double cubic_weight) {
  const int m = 3;
  Field U0(g, {m, m, 1}, FieldTag::Skew);
  Field xi0(g, {m, m, 1}, FieldTag::Skew);
  const int nn = g->node_count();
  for (int id = 0; id < nn; ++id) {
    const double x = g->x(id), y = g->y(id);
    const double bump = 1.0 - x * x - y * y;
    const double a[3] = {amplitude * bump * (0.7 * x - 0.3 * y + 0.4),
                         amplitude * bump * (-0.5 * x + 0.6 * y - 0.2),
                         amplitude * bump * (0.3 * x + 0.8 * y + 0.1)};
    const double q[3] = {
        amplitude * (x * x - y * y + 0.5 * x +
                     cubic_weight * (x * x * x / 3.0 - x * y * y)),
        amplitude * (x * y - 0.4 * y +
                     cubic_weight * (y * y * y / 3.0 - x * x * y)),
        amplitude * (0.5 * x * x + 0.25 * y * y - 0.3 * x * y +
                     cubic_weight * x * x * y)};
    // so(3) generators: (L_k)_{ij} = -eps_{kij}
    U0.at(id, 2, 1) = a[0];
    U0.at(id, 1, 2) = -a[0];
    U0.at(id, 0, 2) = a[1];
    U0.at(id, 2, 0) = -a[1];
    U0.at(id, 1, 0) = a[2];
    U0.at(id, 0, 1) = -a[2];
    xi0.at(id, 2, 1) = q[0];
    xi0.at(id, 1, 2) = -q[0];
    xi0.at(id, 0, 2) = q[1];
    xi0.at(id, 2, 0) = -q[1];
    xi0.at(id, 1, 0) = q[2];
    xi0.at(id, 0, 1) = -q[2];
  }
  ManufacturedGauge out;
  out.P0 = exp_skew(U0);
  out.xi0 = xi0;
  Field rg = rotated_gradient(xi0);
  Field dxP = apply_dx(out.P0), dyP = apply_dy(out.P0);
  Field omega(g, {m, m, 2});
  for (int id : g->interior_nodes()) {
    double Pb[kMaxM * kMaxM], X[kMaxM * kMaxM], A[kMaxM * kMaxM],
        B[kMaxM * kMaxM];
    gather_slot(out.P0, id, 0, m, Pb);
    for (int s = 0; s < 2; ++s) {
      gather_slot(rg, id, s, m, X);
      matmul(Pb, X, A, m);  // P0 (rot-grad xi0)
      for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c) {
          double acc = 0.0;
          for (int k = 0; k < m; ++k) acc += A[r * m + k] * Pb[c * m + k];
          B[r * m + c] = acc;  // ... P0^T
        }
      gather_slot(s == 0 ? dxP : dyP, id, 0, m, X);
      for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c) {
          double acc = 0.0;
          for (int k = 0; k < m; ++k) acc += X[r * m + k] * Pb[c * m + k];
          omega.at(id, r, c, s) = B[r * m + c] - acc;  // - dP0 P0^T
        }
    }
  }
  skew_project(omega);
  out.omega = omega;
  return out;
}

Field abelian_omega(
    GridPtr g, const std::function<void(double, double, double*)>& grad_beta) {
  Field omega(g, {2, 2, 2}, FieldTag::Skew);
  const int nn = g->node_count();
  double gb[2];
  for (int id = 0; id < nn; ++id) {
    grad_beta(g->x(id), g->y(id), gb);
    const double perp[2] = {-gb[1], gb[0]};
    for (int s = 0; s < 2; ++s) {
      omega.at(id, 0, 1, s) = -perp[s];
      omega.at(id, 1, 0, s) = perp[s];
    }
  }
  return omega;
}

GaugeAudit audit_estimates(const GaugePair& gp, const Field& omega) {
  GaugeAudit a;
  a.residual = gp.residual;
  a.omega_l2 = lp_norm_on_disc(omega, gp.disc, 2.0);
  if (a.omega_l2 == 0.0) return a;

  const Field gxi = gradient(gp.xi);
  const Field gP = gradient(gp.P);
  a.ratio_w12 = (lp_norm_on_disc(gxi, gp.disc, 2.0) +
                 lp_norm_on_disc(gP, gp.disc, 2.0)) /
                a.omega_l2;

  Field pmi = gp.P;
  const int m = pmi.arity().rows;
  const int nn = pmi.grid()->node_count();
  for (int id = 0; id < nn; ++id)
    for (int r = 0; r < m; ++r) pmi.at(id, r, r) -= 1.0;
  const double om_w12 =
      std::sqrt(std::pow(a.omega_l2, 2) +
                std::pow(lp_norm_on_disc(apply_dx(omega), gp.disc, 2.0), 2) +
                std::pow(lp_norm_on_disc(apply_dy(omega), gp.disc, 2.0), 2));
  a.omega_w12 = om_w12;
  a.ratio_w22 = (w22_norm(gp.xi) + w22_norm(pmi)) / om_w12;
  return a;
}

}  // namespace disclab
