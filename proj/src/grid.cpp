#include "disclab/grid.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "disclab/kernels.hpp"

namespace disclab {

namespace {

constexpr double kPi = 3.14159265358979323846;

DStencil centered() {
  DStencil s;
  s.cnt = 2;
  s.off = {-1, 1, 0, 0};
  s.coef = {-0.5, 0.5, 0.0, 0.0};
  return s;
}

DStencil one_sided(int dir, int order) {
  DStencil s;
  if (order == 3) {
    s.cnt = 4;
    s.off = {0, dir, 2 * dir, 3 * dir};
    s.coef = {-11.0 / 6.0, 3.0, -1.5, 1.0 / 3.0};
  } else if (order == 2) {
    s.cnt = 3;
    s.off = {0, dir, 2 * dir, 0};
    s.coef = {-1.5, 2.0, -0.5, 0.0};
  } else {
    s.cnt = 2;
    s.off = {0, dir, 0, 0};
    s.coef = {-1.0, 1.0, 0.0, 0.0};
  }
  if (dir < 0) {
    for (auto& c : s.coef) c = -c;
  }
  return s;
}

}  // namespace

void build_stencils(int n, const std::vector<char>& valid,
                    std::vector<DStencil>& sx, std::vector<DStencil>& sy) {
  sx.assign(static_cast<std::size_t>(n) * n, DStencil{});
  sy.assign(static_cast<std::size_t>(n) * n, DStencil{});
  auto ok = [&](int i, int j) {
    return i >= 0 && i < n && j >= 0 && j < n && valid[j * n + i];
  };
  auto pick = [&](int i, int j, int axis) -> DStencil {
    auto cell = [&](int k) {
      return axis == 0 ? ok(i + k, j) : ok(i, j + k);
    };
    if (cell(-1) && cell(1)) return centered();
    for (int order = 3; order >= 1; --order) {
      if (cell(1) && (order < 2 || cell(2)) && (order < 3 || cell(3)))
        return one_sided(1, order);
      if (cell(-1) && (order < 2 || cell(-2)) && (order < 3 || cell(-3)))
        return one_sided(-1, order);
    }
    return DStencil{};
  };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int id = j * n + i;
      if (!valid[id]) continue;
      sx[id] = pick(i, j, 0);
      sy[id] = pick(i, j, 1);
    }
  }
}

std::shared_ptr<const DiscGrid> DiscGrid::build(int resolution) {
  if (resolution < 17 || resolution % 2 == 0) {
    throw std::invalid_argument("resolution must be odd >= 17, got " +
                                std::to_string(resolution));
  }
  auto g = std::shared_ptr<DiscGrid>(new DiscGrid());
  const int n = resolution;
  g->n_ = n;
  g->h_ = 2.0 / (n - 1);
  g->coord_.resize(n);
  for (int k = 0; k < n; ++k) g->coord_[k] = -1.0 + g->h_ * k;

  const int nn = n * n;
  g->cls_.assign(nn, NodeClass::Exterior);
  g->weight_.assign(nn, 0.0);
  g->theta_.assign(nn, std::numeric_limits<double>::quiet_NaN());

  const double h = g->h_;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int id = j * n + i;
      const double x = g->coord_[i], y = g->coord_[j];
      const double rr = std::sqrt(x * x + y * y);
      if (rr < 1.0 - 1e-14) {
        g->cls_[id] = NodeClass::Interior;
        g->interior_.push_back(id);
      } else if (rr <= 1.0 + h + 1e-14) {
        g->cls_[id] = NodeClass::Boundary;
        double th = std::atan2(y, x);
        if (th < 0) th += 2.0 * kPi;
        g->theta_[id] = th;
        g->boundary_.push_back(id);
      }
    }
  }

  // Cell areas clipped to the disc, 4x4 midpoint subsampling. Area owned by a
  // non-interior node is handed to its nearest interior neighbour so that
  // quadrature never reads samples outside the interior set.
  std::vector<double> cell(nn, 0.0);
  par::parallel_for(static_cast<std::size_t>(nn), [&](std::size_t sid) {
    const int id = static_cast<int>(sid);
    const double x0 = g->coord_[g->ix(id)] - 0.5 * h;
    const double y0 = g->coord_[g->iy(id)] - 0.5 * h;
    int cnt = 0;
    for (int a = 0; a < 4; ++a) {
      const double px = x0 + (a + 0.5) * h / 4.0;
      for (int b = 0; b < 4; ++b) {
        const double py = y0 + (b + 0.5) * h / 4.0;
        if (px * px + py * py < 1.0) ++cnt;
      }
    }
    cell[id] = h * h * cnt / 16.0;
  });
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int id = j * n + i;
      if (cell[id] <= 0.0) continue;
      if (g->cls_[id] == NodeClass::Interior) {
        g->weight_[id] += cell[id];
        continue;
      }
      int best = -1;
      double bestd = std::numeric_limits<double>::infinity();
      for (int dj = -2; dj <= 2; ++dj) {
        for (int di = -2; di <= 2; ++di) {
          const int ii = i + di, jj = j + dj;
          if (ii < 0 || ii >= n || jj < 0 || jj >= n) continue;
          const int nid = jj * n + ii;
          if (g->cls_[nid] != NodeClass::Interior) continue;
          const double d = di * di + dj * dj;
          if (d < bestd || (d == bestd && nid < best)) {
            bestd = d;
            best = nid;
          }
        }
      }
      if (best >= 0) g->weight_[best] += cell[id];
    }
  }

  std::vector<char> valid(nn, 0);
  for (int id : g->interior_) valid[id] = 1;
  build_stencils(n, valid, g->sx_, g->sy_);

  for (int id : g->interior_) {
    const int i = g->ix(id), j = g->iy(id);
    auto in = [&](int ii, int jj) {
      return ii >= 0 && ii < n && jj >= 0 && jj < n && valid[jj * n + ii];
    };
    if (in(i - 1, j) && in(i + 1, j) && in(i, j - 1) && in(i, j + 1))
      g->lap_nodes_.push_back(id);
  }
  return g;
}

}  // namespace disclab
