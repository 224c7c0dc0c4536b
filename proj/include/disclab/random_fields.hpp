#pragma once

#include <cstdint>
#include <random>

#include "disclab/field.hpp"

namespace disclab {

/// Seeded generators for test inputs. All of them consume the engine in a
/// fixed order, so a seed pins the whole input deterministically.

/// Truncated Fourier series on a period-4 box with |k|^-decay coefficients.
Field random_band_limited(GridPtr g, std::mt19937_64& rng, int kmax = 3,
                          double decay = 2.0);

/// Random polynomial p(x,y) of total degree <= degree, coefficients in [-1,1].
Field random_poly(GridPtr g, std::mt19937_64& rng, int degree);

/// Vector field (m,1,2) with random cubic polynomial components.
Field random_cubic_vector2(GridPtr g, std::mt19937_64& rng, int m);

/// Skew matrix field (m,m,2) with band-limited entries, scaled so that its
/// L2 norm over the unit disc equals target (0 stays 0).
Field random_skew_potential(GridPtr g, std::mt19937_64& rng, int m,
                            double target_l2, int kmax = 2);

/// Random harmonic polynomial of degree <= 4 (span of Re/Im z^k, k=0..4).
Field random_harmonic_poly(GridPtr g, std::mt19937_64& rng);

/// Boundary trace from a truncated Fourier series in the boundary angle.
struct FourierTrace {
  struct Mode {
    int k;
    double cos_coef;
    double sin_coef;
  };
  std::vector<Mode> modes;
  double eval(double theta) const;
  double eval_xy(double x, double y) const;
};

}  // namespace disclab
