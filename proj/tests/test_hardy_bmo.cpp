#include <doctest.h>

#include <cmath>
#include <random>

#include "disclab/field.hpp"
#include "disclab/grid.hpp"
#include "disclab/hardy_bmo.hpp"
#include "disclab/operators.hpp"
#include "disclab/quadrature.hpp"
#include "disclab/random_fields.hpp"

using namespace disclab;

namespace {
constexpr double kPi = 3.14159265358979323846;

Field windowed(GridPtr g, const std::function<double(double, double)>& f) {
  // multiply by the plateau cutoff so the sample vanishes near the rim
  Field eta = cutoff(g, {0.0, 0.0, 0.45});
  Field out = Field::sample(g, f);
  for (int id = 0; id < g->node_count(); ++id) out.at(id) *= eta.at(id);
  return out;
}
}  // namespace

TEST_CASE("bmo seminorm basics") {
  auto g = DiscGrid::build(129);

  SUBCASE("constants have zero oscillation") {
    Field c = Field::sample(g, [](double, double) { return 3.0; });
    CHECK(bmo_seminorm(c, 0.5) == doctest::Approx(0.0).epsilon(1e-14));
  }

  SUBCASE("x^1 attains 4R/(3pi) at the largest disc") {
    Field x1 = Field::sample(g, [](double x, double) { return x; });
    const double R = 0.5;
    CHECK(bmo_seminorm(x1, R) ==
          doctest::Approx(4.0 * R / (3.0 * kPi)).epsilon(0.03));
  }

  SUBCASE("sign jump oscillates between 0.5 and 1") {
    Field s = Field::sample(g, [](double x, double) {
      return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0);
    });
    const double v = bmo_seminorm(s, 0.5);
    CHECK(v >= 0.5);
    CHECK(v <= 1.0);
  }

  SUBCASE("shift invariance is exact, scaling is homogeneous") {
    std::mt19937_64 rng(3);
    Field f = random_band_limited(g, rng, 2);
    const double v = bmo_seminorm(f, 0.4);
    Field shifted = f;
    for (int id = 0; id < g->node_count(); ++id) shifted.at(id) += 7.5;
    CHECK(bmo_seminorm(shifted, 0.4) == doctest::Approx(v).epsilon(1e-12));
    Field scaled = (-2.0) * f;
    CHECK(bmo_seminorm(scaled, 0.4) == doctest::Approx(2.0 * v).epsilon(1e-12));
  }
}

TEST_CASE("hardy norm basics") {
  auto g = DiscGrid::build(65);
  MaximalConfig cfg;

  SUBCASE("zero field, zero norm, and exact homogeneity") {
    Field z = Field::scalar(g);
    CHECK(hardy_norm(z, cfg) == 0.0);
    Field f = windowed(g, [](double x, double y) { return x - 0.3 * y; });
    const double v = hardy_norm(f, cfg);
    CHECK(v > 0.0);
    Field sf = (-3.0) * f;
    CHECK(hardy_norm(sf, cfg) == doctest::Approx(3.0 * v).epsilon(1e-12));
  }

  SUBCASE("empty scale set is rejected") {
    Field f = windowed(g, [](double x, double) { return x; });
    MaximalConfig bad;
    bad.scale_max = 1e-6;
    CHECK_THROWS_AS(hardy_norm(f, bad), std::invalid_argument);
  }

  SUBCASE("laplacian of a bump is stable under scale refinement") {
    // f = Laplace(phi) for phi = (1-(|x|/0.6)^2)^3 inside |x|<0.6: compactly
    // supported, zero mean; its maximal norm should be stable when the scale
    // set is refined.
    auto phi = [](double x, double y) {
      const double q = 1.0 - (x * x + y * y) / 0.36;
      return q > 0 ? q * q * q : 0.0;
    };
    Field phif = Field::sample(g, phi);
    Field lap = laplacian_compact(phif);
    Field f(g, {1, 1, 1});
    for (int id : g->laplacian_nodes()) f.at(id) = lap.at(id);
    MaximalConfig coarse = cfg;
    MaximalConfig fine = cfg;
    fine.scales_per_octave = 2;
    const double a = hardy_norm(f, coarse);
    const double b = hardy_norm(f, fine);
    CHECK(b >= a - 1e-12);  // sup over a superset of scales
    CHECK(std::abs(b - a) <= 0.10 * std::max(a, b));
  }

  SUBCASE("nonzero mean forces window growth") {
    Field f = Field::sample(g, [](double x, double y) {
      return x * x + y * y < 0.25 ? 1.0 : 0.0;
    });
    double prev = 0.0, prev_incr = 0.0;
    int step = 0;
    for (double margin : {0.5, 1.0, 2.0}) {
      MaximalConfig c;
      c.margin = margin;
      const double v = hardy_norm(f, c);
      if (step >= 1) {
        const double incr = v - prev;
        CHECK(incr > 0.0);
        if (step == 2) CHECK(incr >= 0.5 * prev_incr);  // log-type growth
        prev_incr = incr;
      }
      prev = v;
      ++step;
    }
  }
}

TEST_CASE("div-curl products in the hardy space") {
  auto g = DiscGrid::build(65);
  MaximalConfig cfg;

  SUBCASE("a = b gives a vanishing product") {
    Field a = windowed(g, [](double x, double y) { return x + 0.5 * y; });
    auto rep = div_curl_hardy_check(a, a, cfg);
    CHECK(rep.numerator == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(rep.ratio == doctest::Approx(0.0));
  }

  SUBCASE("degenerate gradients report ratio zero") {
    Field a = Field::sample(g, [](double, double) { return 1.0; });
    Field b = windowed(g, [](double x, double) { return x; });
    auto rep = div_curl_hardy_check(a, b, cfg);
    CHECK(rep.degenerate);
    CHECK(rep.ratio == 0.0);
  }

  SUBCASE("windowed coordinates give a stable finite ratio") {
    auto run = [&](int n) {
      auto gg = DiscGrid::build(n);
      Field a = windowed(gg, [](double x, double) { return x; });
      Field b = windowed(gg, [](double, double y) { return y; });
      return div_curl_hardy_check(a, b, cfg).ratio;
    };
    const double r65 = run(65), r129 = run(129);
    CHECK(r65 > 0.0);
    CHECK(std::abs(r129 - r65) <= 0.2 * std::max(r65, r129));
  }

  SUBCASE("random band-limited batch stays bounded") {
    std::mt19937_64 rng(11);
    double worst = 0.0;
    for (int i = 0; i < 8; ++i) {
      Field a0 = random_band_limited(g, rng, 2);
      Field b0 = random_band_limited(g, rng, 2);
      Field eta = cutoff(g, {0.0, 0.0, 0.45});
      for (int id = 0; id < g->node_count(); ++id) {
        a0.at(id) *= eta.at(id);
        b0.at(id) *= eta.at(id);
      }
      worst = std::max(worst, div_curl_hardy_check(a0, b0, cfg).ratio);
    }
    CHECK(worst > 0.0);
    CHECK(worst < 10.0);
  }
}

TEST_CASE("bmo-hardy duality pairing") {
  auto g = DiscGrid::build(65);
  MaximalConfig cfg;

  SUBCASE("constant f is skipped as degenerate") {
    Field f = Field::sample(g, [](double, double) { return 2.0; });
    Field gg = windowed(g, [](double x, double y) { return x * y; });
    auto rep = duality_check(f, gg, cfg);
    CHECK(rep.degenerate);
  }

  SUBCASE("x^1 against the laplacian of a bump is finite") {
    Field f = Field::sample(g, [](double x, double) { return x; });
    auto phi = [](double x, double y) {
      const double q = 1.0 - (x * x + y * y) / 0.36;
      return q > 0 ? q * q * q : 0.0;
    };
    Field phif = Field::sample(g, phi);
    Field lap = laplacian_compact(phif);
    Field gg(g, {1, 1, 1});
    for (int id : g->laplacian_nodes()) gg.at(id) = lap.at(id);
    auto rep = duality_check(f, gg, cfg);
    CHECK(!rep.degenerate);
    CHECK(rep.ratio > 0.0);
    CHECK(rep.ratio < 50.0);
  }

  SUBCASE("random batch stays bounded") {
    std::mt19937_64 rng(5);
    double worst = 0.0;
    for (int i = 0; i < 6; ++i) {
      Field f = random_band_limited(g, rng, 2);
      Field bump = random_band_limited(g, rng, 1);
      Field eta = cutoff(g, {0.0, 0.0, 0.4});
      for (int id = 0; id < g->node_count(); ++id)
        bump.at(id) *= eta.at(id) * eta.at(id);
      Field lap = laplacian_compact(bump);
      Field gg(g, {1, 1, 1});
      for (int id : g->laplacian_nodes()) gg.at(id) = lap.at(id);
      auto rep = duality_check(f, gg, cfg);
      if (!rep.degenerate) worst = std::max(worst, rep.ratio);
    }
    CHECK(worst > 0.0);
    CHECK(worst < 50.0);
  }
}

TEST_CASE("wente inequality measurements") {
  SUBCASE("a = b gives the zero solution") {
    auto g = DiscGrid::build(65);
    Field a = Field::sample(g, [](double x, double y) { return x + y; });
    auto rep = wente_check(a, a, 2.0);
    CHECK(rep.ratio == doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("closed form for coordinates at p = 2") {
    auto g = DiscGrid::build(129);
    Field a = Field::sample(g, [](double x, double) { return x; });
    Field b = Field::sample(g, [](double, double y) { return y; });
    auto rep = wente_check(a, b, 2.0);
    const double expected = std::sqrt(kPi / 8.0) / kPi;
    CHECK(rep.ratio == doctest::Approx(expected).epsilon(0.02));
  }

  SUBCASE("invariance under constant shifts and swapping at p = 2") {
    auto g = DiscGrid::build(65);
    std::mt19937_64 rng(7);
    Field a = random_band_limited(g, rng, 2);
    Field b = random_band_limited(g, rng, 2);
    auto base = wente_check(a, b, 2.0);
    Field ash = a;
    for (int id = 0; id < g->node_count(); ++id) ash.at(id) += 4.0;
    auto shifted = wente_check(ash, b, 2.0);
    CHECK(shifted.ratio == doctest::Approx(base.ratio).epsilon(1e-9));
    // swapping flips the sign of the right-hand side; |grad u| and the
    // symmetric denominator are unchanged
    auto swapped = wente_check(b, a, 2.0);
    CHECK(swapped.ratio == doctest::Approx(base.ratio).epsilon(1e-9));
    auto p15 = wente_check(a, b, 1.5);
    auto p3 = wente_check(a, b, 3.0);
    CHECK(p15.ratio > 0.0);
    CHECK(p3.ratio > 0.0);
  }

  SUBCASE("p must exceed one") {
    auto g = DiscGrid::build(65);
    Field a = Field::sample(g, [](double x, double) { return x; });
    CHECK_THROWS_AS(wente_check(a, a, 1.0), std::invalid_argument);
  }
}
