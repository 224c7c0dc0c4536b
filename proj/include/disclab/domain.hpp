#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <array>
#include <functional>
#include <memory>
#include <vector>

#include "disclab/field.hpp"
#include "disclab/grid.hpp"

namespace disclab {

/// Dirichlet data evaluated at points of the domain circle; `block` indexes
/// the field component in row-major (row, col, spatial) order.
using BoundaryValue = std::function<double(double x, double y, int block)>;

struct SolveStats {
  double residual = 0.0;
  bool used_iterative_fallback = false;
};

/// Solver domain: lattice nodes strictly inside B_r(a), with Shortley-Weller
/// legs to the circle. With clip_to_unit the unknowns are additionally
/// restricted to interior nodes of the unit disc (the usual case); without it
/// the domain may poke outside, with fields extended by zero there.
class DiscDomain {
 public:
  DiscDomain(GridPtr grid, Disc disc, bool clip_to_unit = true);

  const GridPtr& grid() const { return grid_; }
  const Disc& disc() const { return disc_; }
  int unknown_count() const { return static_cast<int>(nodes_.size()); }
  int node_of(int u) const { return nodes_[u]; }
  int unknown_of(int node) const { return unknown_of_[node]; }
  const std::vector<int>& nodes() const { return nodes_; }

  /// Per-unknown legs in the order -x,+x,-y,+y. nbr >= 0 is the neighbouring
  /// unknown; nbr < 0 means a circle point at (bx,by), distance alpha*h.
  struct Leg {
    int nbr = -1;
    double alpha = 1.0;
    double bx = 0.0, by = 0.0;
  };
  const std::array<Leg, 4>& legs(int u) const { return legs_[u]; }

  /// Derivative stencils over the unknown set (lattice offsets).
  const DStencil& dx(int node) const { return sx_[node]; }
  const DStencil& dy(int node) const { return sy_[node]; }

  /// Quadrature weight of an unknown (zero for nodes outside the unit disc).
  double weight(int u) const;

  /// Solves -Laplace(u) = rhs with the given circle data. rhs and the result
  /// are indexed by unknown.
  Eigen::VectorXd solve_neg_laplace(const Eigen::VectorXd& rhs,
                                    const std::function<double(double, double)>& bc,
                                    SolveStats* stats = nullptr) const;

  const Eigen::SparseMatrix<double>& neg_laplacian() const { return A_; }

  /// Contribution of Dirichlet legs to the right-hand side for unit data;
  /// callers assembling custom right-hand sides use legs() directly.
  void assemble_dirichlet_rhs(const std::function<double(double, double)>& bc,
                              Eigen::VectorXd& rhs) const;

 private:
  void factorize() const;

  GridPtr grid_;
  Disc disc_;
  bool clip_to_unit_;
  std::vector<int> nodes_;
  std::vector<int> unknown_of_;
  std::vector<std::array<Leg, 4>> legs_;
  std::vector<DStencil> sx_, sy_;
  Eigen::SparseMatrix<double> A_;
  mutable std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;
};

/// One Poisson solve on B_r(a): -Laplace(u) = rhs, u = bc on the circle.
/// Residuals above 1e-10 (relative, algebraic) trigger an iterative retry and
/// then an error.
Field solve_poisson(const Field& rhs, const BoundaryValue& bc, const Disc& d,
                    SolveStats* stats = nullptr);

/// Harmonic extension of m-component boundary data: -Laplace(u) = 0.
Field harmonic_extension(GridPtr g, int m, const BoundaryValue& bc,
                         const Disc& d);

}  // namespace disclab
