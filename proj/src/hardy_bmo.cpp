#include "disclab/hardy_bmo.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <stdexcept>

#include "disclab/domain.hpp"
#include "disclab/kernels.hpp"
#include "disclab/operators.hpp"
#include "disclab/quadrature.hpp"

namespace disclab {

namespace {

// normalization of (1-|z|^2)^3 so that max |grad| = 1
const double kBumpScale = 25.0 * std::sqrt(5.0) / 96.0;

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftGrid {
  int n = 0;
  std::vector<double> real;
  std::vector<std::complex<double>> spec;

  explicit FftGrid(int npad)
      : n(npad),
        real(std::size_t(npad) * npad, 0.0),
        spec(std::size_t(npad) * (npad / 2 + 1)) {}

  void forward() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_plan p = fftw_plan_dft_r2c_2d(
        n, n, real.data(), reinterpret_cast<fftw_complex*>(spec.data()),
        FFTW_ESTIMATE);
    fftw_execute(p);
    fftw_destroy_plan(p);
  }
  void inverse() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_plan p = fftw_plan_dft_c2r_2d(
        n, n, reinterpret_cast<fftw_complex*>(spec.data()), real.data(),
        FFTW_ESTIMATE);
    fftw_execute(p);
    fftw_destroy_plan(p);
  }
};

}  // namespace

double bmo_seminorm(const Field& f, double max_radius) {
  const auto& g = *f.grid();
  const double h = g.spacing();
  if (max_radius <= h) {
    throw std::invalid_argument("bmo_seminorm: max_radius below grid spacing");
  }
  std::vector<double> radii;
  for (double r = max_radius; r >= 2.0 * h - 1e-12; r *= 0.5)
    radii.push_back(r);
  if (radii.empty()) return 0.0;

  const auto& centers = g.interior_nodes();
  const int n = g.resolution();
  const int blk = f.arity().block();
  return par::reduce_max(centers.size(), [&](std::size_t ci) {
    const int cid = centers[ci];
    const double cx = g.x(cid), cy = g.y(cid);
    const double crad = std::hypot(cx, cy);
    double best = 0.0;
    std::vector<double> mean(blk);
    for (double r : radii) {
      if (crad + r > 1.0 + 1e-12) continue;
      const int reach = static_cast<int>(r / h) + 1;
      const int i0 = std::max(0, g.ix(cid) - reach),
                i1 = std::min(n - 1, g.ix(cid) + reach);
      const int j0 = std::max(0, g.iy(cid) - reach),
                j1 = std::min(n - 1, g.iy(cid) + reach);
      double wsum = 0.0;
      std::fill(mean.begin(), mean.end(), 0.0);
      int cnt = 0;
      for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) {
          const int id = g.index(i, j);
          const double w = g.weight(id);
          if (w <= 0.0) continue;
          const double dx = g.x(id) - cx, dy = g.y(id) - cy;
          if (dx * dx + dy * dy > r * r) continue;
          wsum += w;
          ++cnt;
          const double* b = f.block(id);
          for (int k = 0; k < blk; ++k) mean[k] += w * b[k];
        }
      if (cnt < 5 || wsum <= 0.0) continue;
      for (int k = 0; k < blk; ++k) mean[k] /= wsum;
      double dev = 0.0;
      for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) {
          const int id = g.index(i, j);
          const double w = g.weight(id);
          if (w <= 0.0) continue;
          const double dx = g.x(id) - cx, dy = g.y(id) - cy;
          if (dx * dx + dy * dy > r * r) continue;
          const double* b = f.block(id);
          double s = 0.0;
          for (int k = 0; k < blk; ++k) {
            const double d = b[k] - mean[k];
            s += d * d;
          }
          dev += w * std::sqrt(s);
        }
      best = std::max(best, dev / wsum);
    }
    return best;
  });
}

double hardy_norm(const Field& f, const MaximalConfig& cfg) {
  if (f.arity().block() != 1) {
    throw std::invalid_argument("hardy_norm expects a scalar field");
  }
  const auto& g = *f.grid();
  const double h = g.spacing();
  const double tmax = cfg.scale_max > 0.0 ? cfg.scale_max : cfg.margin;
  std::vector<double> scales;
  const double factor = std::pow(2.0, 1.0 / std::max(1, cfg.scales_per_octave));
  for (double t = 2.0 * h; t <= tmax * (1.0 + 1e-12); t *= factor)
    scales.push_back(t);
  if (scales.empty()) {
    throw std::invalid_argument("hardy_norm: empty scale set");
  }

  const int n = g.resolution();
  const int mc = static_cast<int>(std::lround(cfg.margin / h));
  const int n_w = n + 2 * mc;
  const int reach_max = static_cast<int>(tmax / h) + 2;
  const int npad = n_w + reach_max;

  FftGrid field(npad);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int id = g.index(i, j);
      if (g.weight(id) <= 0.0) continue;  // zero extension outside the disc
      field.real[std::size_t(j + mc) * npad + (i + mc)] = f.at(id);
    }
  field.forward();
  const auto fhat = field.spec;

  std::vector<double> fstar(std::size_t(npad) * npad, 0.0);
  FftGrid work(npad);
  const double inv_n2 = 1.0 / (double(npad) * npad);
  for (double t : scales) {
    std::fill(work.real.begin(), work.real.end(), 0.0);
    const int reach = static_cast<int>(t / h);
    for (int dj = -reach; dj <= reach; ++dj)
      for (int di = -reach; di <= reach; ++di) {
        const double rho2 = (di * di + dj * dj) * h * h / (t * t);
        if (rho2 >= 1.0) continue;
        const double q = 1.0 - rho2;
        const double val = kBumpScale * q * q * q / (t * t) * h * h;
        const int ii = (di + npad) % npad, jj = (dj + npad) % npad;
        work.real[std::size_t(jj) * npad + ii] = val;
      }
    work.forward();
    for (std::size_t k = 0; k < work.spec.size(); ++k)
      work.spec[k] = work.spec[k] * fhat[k] * inv_n2;
    work.inverse();
    par::parallel_for(fstar.size(), [&](std::size_t k) {
      fstar[k] = std::max(fstar[k], std::abs(work.real[k]));
    });
  }
  const double total =
      par::reduce_sum(fstar.size(), [&](std::size_t k) { return fstar[k]; });
  return total * h * h;
}

RatioReport div_curl_hardy_check(const Field& a, const Field& b,
                                 const MaximalConfig& cfg) {
  RatioReport rep;
  const Field ga = gradient(a), gb = gradient(b);
  rep.denom_a = l2_norm(ga);
  rep.denom_b = l2_norm(gb);
  if (rep.denom_a < 1e-14 || rep.denom_b < 1e-14) {
    rep.degenerate = true;
    rep.note = "degenerate gradient; ratio 0 by convention";
    return rep;
  }
  Field prod(a.grid(), {1, 1, 1});
  for (int id : a.grid()->interior_nodes()) {
    // grad a . rot-grad b = a_x(-b_y) + a_y b_x
    prod.at(id) = -ga.at(id, 0, 0, 0) * gb.at(id, 0, 0, 1) +
                  ga.at(id, 0, 0, 1) * gb.at(id, 0, 0, 0);
  }
  rep.numerator = hardy_norm(prod, cfg);
  rep.ratio = rep.numerator / (rep.denom_a * rep.denom_b);
  return rep;
}

RatioReport duality_check(const Field& f, const Field& g,
                          const MaximalConfig& cfg) {
  RatioReport rep;
  rep.denom_a = bmo_seminorm(f, cfg.bmo_max_radius);
  rep.denom_b = hardy_norm(g, cfg);
  const auto& grid = *f.grid();
  double pairing = 0.0;
  for (int id : grid.interior_nodes())
    pairing += grid.weight(id) * f.at(id) * g.at(id);
  rep.numerator = std::abs(pairing);
  if (rep.denom_a < 1e-12 || rep.denom_b < 1e-12) {
    rep.degenerate = true;
    rep.note = "skipped-degenerate: vanishing BMO or Hardy factor";
    return rep;
  }
  rep.ratio = rep.numerator / (rep.denom_a * rep.denom_b);
  return rep;
}

WenteReport wente_check(const Field& a, const Field& b, double p) {
  if (!(p > 1.0)) {
    throw std::invalid_argument("wente_check requires p > 1");
  }
  WenteReport rep;
  rep.p = p;
  const Field ga = gradient(a), gb = gradient(b);
  Field rhs(a.grid(), {1, 1, 1});
  for (int id : a.grid()->interior_nodes()) {
    rhs.at(id) = -ga.at(id, 0, 0, 0) * gb.at(id, 0, 0, 1) +
                 ga.at(id, 0, 0, 1) * gb.at(id, 0, 0, 0);
  }
  Field u = solve_poisson(rhs, [](double, double, int) { return 0.0; },
                          Disc::unit());
  rep.grad_u_lp = lp_norm_on_disc(gradient(u), Disc::unit(), p);
  rep.grad_a_l2 = l2_norm(ga);
  rep.grad_b_lp = lp_norm_on_disc(gb, Disc::unit(), p);
  if (rep.grad_a_l2 < 1e-14 || rep.grad_b_lp < 1e-14) return rep;
  rep.ratio = rep.grad_u_lp / (rep.grad_a_l2 * rep.grad_b_lp);
  return rep;
}

}  // namespace disclab
