#include "disclab/quadrature.hpp"

#include <cmath>
#include <stdexcept>

#include "disclab/kernels.hpp"

namespace disclab {

std::vector<int> nodes_in_disc(const DiscGrid& g, const Disc& d) {
  std::vector<int> out;
  const double r2 = d.r * d.r;
  for (int id : g.interior_nodes()) {
    const double dx = g.x(id) - d.cx, dy = g.y(id) - d.cy;
    if (dx * dx + dy * dy <= r2) out.push_back(id);
  }
  return out;
}

std::vector<double> mean_value(const Field& u, const Disc& d) {
  const auto& g = *u.grid();
  const auto nodes = nodes_in_disc(g, d);
  if (nodes.size() < 5) {
    throw std::runtime_error("disc unresolved: only " +
                             std::to_string(nodes.size()) + " nodes");
  }
  const int blk = u.arity().block();
  std::vector<double> acc(blk, 0.0);
  double wsum = 0.0;
  for (int id : nodes) {
    const double w = g.weight(id);
    wsum += w;
    const double* b = u.block(id);
    for (int k = 0; k < blk; ++k) acc[k] += w * b[k];
  }
  for (auto& v : acc) v /= wsum;
  return acc;
}

double lp_norm_on_disc(const Field& u, const Disc& d, double p) {
  if (p < 1.0) throw std::invalid_argument("lp norm requires p >= 1");
  const auto& g = *u.grid();
  const auto nodes = nodes_in_disc(g, d);
  if (nodes.size() < 5) {
    throw std::runtime_error("disc unresolved: only " +
                             std::to_string(nodes.size()) + " nodes");
  }
  const double s = par::reduce_sum(nodes.size(), [&](std::size_t k) {
    const int id = nodes[k];
    const double v = u.norm_at(id);
    return g.weight(id) * std::pow(v, p);
  });
  return std::pow(s, 1.0 / p);
}

double l2_norm(const Field& u) { return lp_norm_on_disc(u, Disc::unit(), 2.0); }

double integral_on_disc(const Field& u, const Disc& d) {
  const auto& g = *u.grid();
  const auto nodes = nodes_in_disc(g, d);
  return par::reduce_sum(nodes.size(), [&](std::size_t k) {
    return g.weight(nodes[k]) * u.at(nodes[k]);
  });
}

Field cutoff(GridPtr g, const Disc& d) {
  const double cr = std::sqrt(d.cx * d.cx + d.cy * d.cy);
  if (cr + 2.0 * d.r > 1.0 + 0.5 * g->spacing()) {
    throw std::invalid_argument("cutoff support leaves the unit disc");
  }
  return Field::sample(g, [&](double x, double y) {
    const double rho = std::hypot(x - d.cx, y - d.cy);
    if (rho <= d.r) return 1.0;
    const double t = (rho - d.r) / (0.5 * d.r);
    if (t >= 1.0) return 0.0;
    const double s = t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
    return 1.0 - s;
  });
}

}  // namespace disclab
