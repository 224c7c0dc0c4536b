#include "disclab/domain.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <cmath>
#include <stdexcept>

namespace disclab {

namespace {
constexpr double kMembershipTol = 1e-12;
constexpr double kMinLeg = 1e-6;

// Fraction t in (0,1] at which the segment p -> p + h*dir crosses the circle.
double circle_crossing(double px, double py, double dx, double dy, double h,
                       const Disc& d) {
  const double ex = px - d.cx, ey = py - d.cy;
  const double a = h * h * (dx * dx + dy * dy);
  const double b = 2.0 * h * (ex * dx + ey * dy);
  const double c = ex * ex + ey * ey - d.r * d.r;
  const double disc = b * b - 4.0 * a * c;
  if (disc <= 0.0) return 1.0;
  const double sq = std::sqrt(disc);
  double t = (-b + sq) / (2.0 * a);
  if (t <= 0.0) t = (-b - sq) / (2.0 * a);
  if (t <= 0.0 || t > 1.0 + 1e-9) t = 1.0;
  return std::min(std::max(t, kMinLeg), 1.0);
}
}  // namespace

DiscDomain::DiscDomain(GridPtr grid, Disc disc, bool clip_to_unit)
    : grid_(std::move(grid)), disc_(disc), clip_to_unit_(clip_to_unit) {
  const auto& g = *grid_;
  const int n = g.resolution();
  const int nn = g.node_count();
  unknown_of_.assign(nn, -1);
  std::vector<char> valid(nn, 0);
  const double rin = disc_.r * (1.0 - kMembershipTol);
  for (int id = 0; id < nn; ++id) {
    if (clip_to_unit_ && g.node_class(id) != NodeClass::Interior) continue;
    const double dx = g.x(id) - disc_.cx, dy = g.y(id) - disc_.cy;
    if (dx * dx + dy * dy < rin * rin) {
      unknown_of_[id] = static_cast<int>(nodes_.size());
      nodes_.push_back(id);
      valid[id] = 1;
    }
  }
  if (nodes_.size() < 5) {
    throw std::runtime_error("disc unresolved: only " +
                             std::to_string(nodes_.size()) + " nodes");
  }
  build_stencils(n, valid, sx_, sy_);

  const double h = g.spacing();
  const int U = unknown_count();
  legs_.resize(U);
  const int offs[4][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(U) * 5);
  for (int u = 0; u < U; ++u) {
    const int id = nodes_[u];
    const int i = g.ix(id), j = g.iy(id);
    const double px = g.x(id), py = g.y(id);
    for (int l = 0; l < 4; ++l) {
      Leg leg;
      const int ii = i + offs[l][0], jj = j + offs[l][1];
      const int nid = (ii >= 0 && ii < n && jj >= 0 && jj < n)
                          ? g.index(ii, jj)
                          : -1;
      if (nid >= 0 && unknown_of_[nid] >= 0) {
        leg.nbr = unknown_of_[nid];
        leg.alpha = 1.0;
      } else {
        const double t =
            circle_crossing(px, py, offs[l][0], offs[l][1], h, disc_);
        leg.nbr = -1;
        leg.alpha = t;
        leg.bx = px + t * h * offs[l][0];
        leg.by = py + t * h * offs[l][1];

        // If the inner circle is inside the unit rim, clipping to the unit
        // circle first is still the same point for clip_to_unit domains with
        // the disc extending past |x|=1.
        if (clip_to_unit_ && disc_.cx * disc_.cx + disc_.cy * disc_.cy < 1.0) {
          const double rr = leg.bx * leg.bx + leg.by * leg.by;
          if (rr > 1.0 + 1e-12) {
            const double tu =
                circle_crossing(px, py, offs[l][0], offs[l][1], h, Disc::unit());
            leg.alpha = tu;
            leg.bx = px + tu * h * offs[l][0];
            leg.by = py + tu * h * offs[l][1];
          }
        }
      }
      legs_[u][l] = leg;
    }
    const double aW = legs_[u][0].alpha, aE = legs_[u][1].alpha;
    const double aS = legs_[u][2].alpha, aN = legs_[u][3].alpha;
    const double ih2 = 1.0 / (h * h);
    double diag = 2.0 * ih2 / (aE * aW) + 2.0 * ih2 / (aN * aS);
    trip.emplace_back(u, u, diag);
    const double coefs[4] = {2.0 * ih2 / (aW * (aW + aE)),
                             2.0 * ih2 / (aE * (aW + aE)),
                             2.0 * ih2 / (aS * (aS + aN)),
                             2.0 * ih2 / (aN * (aS + aN))};
    for (int l = 0; l < 4; ++l) {
      if (legs_[u][l].nbr >= 0) trip.emplace_back(u, legs_[u][l].nbr, -coefs[l]);
    }
  }
  A_.resize(U, U);
  A_.setFromTriplets(trip.begin(), trip.end());
  A_.makeCompressed();
}

double DiscDomain::weight(int u) const { return grid_->weight(nodes_[u]); }

void DiscDomain::factorize() const {
  if (lu_) return;
  lu_ = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
  lu_->analyzePattern(A_);
  lu_->factorize(A_);
  if (lu_->info() != Eigen::Success) {
    lu_.reset();
    throw std::runtime_error("solver failure: sparse factorization failed");
  }
}

void DiscDomain::assemble_dirichlet_rhs(
    const std::function<double(double, double)>& bc, Eigen::VectorXd& rhs) const {
  const double h = grid_->spacing();
  const double ih2 = 1.0 / (h * h);
  for (int u = 0; u < unknown_count(); ++u) {
    const auto& L = legs_[u];
    const double aW = L[0].alpha, aE = L[1].alpha, aS = L[2].alpha,
                 aN = L[3].alpha;
    const double coefs[4] = {2.0 * ih2 / (aW * (aW + aE)),
                             2.0 * ih2 / (aE * (aW + aE)),
                             2.0 * ih2 / (aS * (aS + aN)),
                             2.0 * ih2 / (aN * (aS + aN))};
    for (int l = 0; l < 4; ++l) {
      if (L[l].nbr < 0) rhs[u] += coefs[l] * bc(L[l].bx, L[l].by);
    }
  }
}

Eigen::VectorXd DiscDomain::solve_neg_laplace(
    const Eigen::VectorXd& rhs, const std::function<double(double, double)>& bc,
    SolveStats* stats) const {
  factorize();
  Eigen::VectorXd b = rhs;
  assemble_dirichlet_rhs(bc, b);
  Eigen::VectorXd x = lu_->solve(b);
  double res = (A_ * x - b).norm() / std::max(b.norm(), 1e-300);
  bool fallback = false;
  if (!(res <= 1e-10)) {
    Eigen::BiCGSTAB<Eigen::SparseMatrix<double>> it;
    it.setTolerance(1e-13);
    it.setMaxIterations(20000);
    it.compute(A_);
    Eigen::VectorXd x2 = it.solveWithGuess(b, x);
    const double res2 = (A_ * x2 - b).norm() / std::max(b.norm(), 1e-300);
    if (res2 < res) {
      x = x2;
      res = res2;
      fallback = true;
    }
    if (!(res <= 1e-8)) {
      throw std::runtime_error("solver failure: residual " +
                               std::to_string(res));
    }
  }
  if (stats) {
    stats->residual = res;
    stats->used_iterative_fallback = fallback;
  }
  return x;
}

Field solve_poisson(const Field& rhs, const BoundaryValue& bc, const Disc& d,
                    SolveStats* stats) {
  DiscDomain dom(rhs.grid(), d, true);
  const int U = dom.unknown_count();
  Field out(rhs.grid(), rhs.arity());
  SolveStats local;
  for (int blk = 0; blk < rhs.arity().block(); ++blk) {
    Eigen::VectorXd b(U);
    for (int u = 0; u < U; ++u) b[u] = rhs.block(dom.node_of(u))[blk];
    Eigen::VectorXd x = dom.solve_neg_laplace(
        b, [&](double px, double py) { return bc(px, py, blk); }, &local);
    for (int u = 0; u < U; ++u) out.block(dom.node_of(u))[blk] = x[u];
    if (stats) {
      stats->residual = std::max(stats->residual, local.residual);
      stats->used_iterative_fallback |= local.used_iterative_fallback;
    }
  }
  return out;
}

Field harmonic_extension(GridPtr g, int m, const BoundaryValue& bc,
                         const Disc& d) {
  Field zero(g, {m, 1, 1});
  return solve_poisson(zero, bc, d);
}

}  // namespace disclab
