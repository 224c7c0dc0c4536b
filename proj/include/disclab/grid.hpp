#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

namespace disclab {

/// A disc B_r(a). Centers live in the closed unit disc; r > 0.
struct Disc {
  double cx = 0.0;
  double cy = 0.0;
  double r = 1.0;

  bool contains(double x, double y) const {
    const double dx = x - cx, dy = y - cy;
    return dx * dx + dy * dy < r * r;
  }
  static Disc unit() { return {0.0, 0.0, 1.0}; }
};

enum class NodeClass : std::uint8_t { Interior, Boundary, Exterior };

/// First-derivative stencil along one axis: d/dx f ~ (1/h) sum c_k f(node + off_k).
/// Centered in the interior, one-sided (3rd, 2nd, then 1st order) where the
/// neighbour set thins out near the rim.
struct DStencil {
  int cnt = 0;
  std::array<int, 4> off{};
  std::array<double, 4> coef{};
};

/// Uniform Cartesian lattice over [-1,1]^2 with the unit disc embedded.
/// Nodes are classified interior/boundary/exterior; quadrature weights are
/// disc-clipped cell areas (4x4 subsampling), aggregated onto interior nodes
/// so that integrals only ever read interior samples.
class DiscGrid {
 public:
  /// resolution must be odd and >= 17 so the origin is a node.
  static std::shared_ptr<const DiscGrid> build(int resolution);

  int resolution() const { return n_; }
  double spacing() const { return h_; }
  int node_count() const { return n_ * n_; }

  int index(int i, int j) const { return j * n_ + i; }
  int ix(int id) const { return id % n_; }
  int iy(int id) const { return id / n_; }
  double x(int id) const { return coord_[ix(id)]; }
  double y(int id) const { return coord_[iy(id)]; }
  double coord(int k) const { return coord_[k]; }

  NodeClass node_class(int id) const { return cls_[id]; }
  bool interior(int id) const { return cls_[id] == NodeClass::Interior; }
  double weight(int id) const { return weight_[id]; }
  double theta(int id) const { return theta_[id]; }

  const std::vector<int>& interior_nodes() const { return interior_; }
  const std::vector<int>& boundary_nodes() const { return boundary_; }

  /// Derivative stencils valid for fields defined on interior nodes.
  const DStencil& dx(int id) const { return sx_[id]; }
  const DStencil& dy(int id) const { return sy_[id]; }

  /// Nodes where the compact 5-point Laplacian stencil stays inside the
  /// interior set.
  const std::vector<int>& laplacian_nodes() const { return lap_nodes_; }

 private:
  DiscGrid() = default;

  int n_ = 0;
  double h_ = 0.0;
  std::vector<double> coord_;
  std::vector<NodeClass> cls_;
  std::vector<double> weight_;
  std::vector<double> theta_;
  std::vector<int> interior_;
  std::vector<int> boundary_;
  std::vector<DStencil> sx_, sy_;
  std::vector<int> lap_nodes_;
};

using GridPtr = std::shared_ptr<const DiscGrid>;

/// Builds the stencil tables for an arbitrary membership set over a lattice
/// row-major indexed (i + n*j fashion handled by caller-provided index math).
/// Used by DiscGrid and by per-disc solver domains.
void build_stencils(int n, const std::vector<char>& valid,
                    std::vector<DStencil>& sx, std::vector<DStencil>& sy);

}  // namespace disclab
