#include "disclab/random_fields.hpp"

#include <cmath>
#include <vector>

#include "disclab/quadrature.hpp"

namespace disclab {

namespace {
constexpr double kOmega = 1.5707963267948966;  // pi/2, period-4 box modes
}

Field random_band_limited(GridPtr g, std::mt19937_64& rng, int kmax,
                          double decay) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  struct Mode {
    double kx, ky, a, b;
  };
  std::vector<Mode> modes;
  for (int kx = 0; kx <= kmax; ++kx) {
    for (int ky = -kmax; ky <= kmax; ++ky) {
      if (kx == 0 && ky <= 0) continue;
      const double kn = std::sqrt(double(kx * kx + ky * ky));
      const double amp = std::pow(kn, -decay);
      modes.push_back({double(kx), double(ky), amp * unif(rng), amp * unif(rng)});
    }
  }
  return Field::sample(g, [modes](double x, double y) {
    double v = 0.0;
    for (const auto& m : modes) {
      const double ph = kOmega * (m.kx * x + m.ky * y);
      v += m.a * std::cos(ph) + m.b * std::sin(ph);
    }
    return v;
  });
}

Field random_poly(GridPtr g, std::mt19937_64& rng, int degree) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<std::array<double, 3>> terms;  // coef, px, py
  for (int d = 0; d <= degree; ++d)
    for (int px = 0; px <= d; ++px)
      terms.push_back({unif(rng), double(px), double(d - px)});
  return Field::sample(g, [terms](double x, double y) {
    double v = 0.0;
    for (const auto& t : terms)
      v += t[0] * std::pow(x, t[1]) * std::pow(y, t[2]);
    return v;
  });
}

Field random_cubic_vector2(GridPtr g, std::mt19937_64& rng, int m) {
  Field out(g, {m, 1, 2});
  for (int r = 0; r < m; ++r) {
    for (int s = 0; s < 2; ++s) {
      Field comp = random_poly(g, rng, 3);
      const int nn = g->node_count();
      for (int id = 0; id < nn; ++id) out.at(id, r, 0, s) = comp.at(id);
    }
  }
  return out;
}

Field random_skew_potential(GridPtr g, std::mt19937_64& rng, int m,
                            double target_l2, int kmax) {
  Field out(g, {m, m, 2}, FieldTag::Skew);
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < r; ++c) {
      for (int s = 0; s < 2; ++s) {
        Field comp = random_band_limited(g, rng, kmax);
        const int nn = g->node_count();
        for (int id = 0; id < nn; ++id) {
          out.at(id, r, c, s) = comp.at(id);
          out.at(id, c, r, s) = -comp.at(id);
        }
      }
    }
  }
  const double norm = l2_norm(out);
  if (norm > 0.0 && target_l2 > 0.0) out *= target_l2 / norm;
  if (target_l2 == 0.0) out *= 0.0;
  return out;
}

Field random_harmonic_poly(GridPtr g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::array<double, 9> c;
  for (auto& v : c) v = unif(rng);
  return Field::sample(g, [c](double x, double y) {
    // Re z^k and Im z^k for k = 1..4, plus a constant
    const double x2 = x * x, y2 = y * y;
    const double re2 = x2 - y2, im2 = 2 * x * y;
    const double re3 = x * re2 - y * im2, im3 = x * im2 + y * re2;
    const double re4 = x * re3 - y * im3, im4 = x * im3 + y * re3;
    return c[0] + c[1] * x + c[2] * y + c[3] * re2 + c[4] * im2 + c[5] * re3 +
           c[6] * im3 + c[7] * re4 + c[8] * im4;
  });
}

double FourierTrace::eval(double theta) const {
  double v = 0.0;
  for (const auto& m : modes)
    v += m.cos_coef * std::cos(m.k * theta) + m.sin_coef * std::sin(m.k * theta);
  return v;
}

double FourierTrace::eval_xy(double x, double y) const {
  return eval(std::atan2(y, x));
}

}  // namespace disclab
