#include <doctest.h>

#include <cmath>
#include <random>

#include "gpq/errors.hpp"
#include "gpq/free_problem.hpp"
#include "support.hpp"

using namespace gpq;

namespace {

// Golden-section search in extended precision, independent of the closed form.
long double golden_argmin(double a_ratio, double q, long double lo, long double hi) {
  auto g = [&](long double s) { return s - static_cast<long double>(a_ratio) * std::pow(s, static_cast<long double>(q) / 2); };
  const long double phi = (std::sqrt(5.0L) - 1) / 2;
  long double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  long double f1 = g(x1), f2 = g(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-15L * hi; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = g(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = g(x2);
    }
  }
  return (lo + hi) / 2;
}

RadialProfile unit_gaussian(const RadialGrid& grid, double alpha, double q) {
  // ∫ exp(−2α r²) over R² is π/(2α)
  const double c = std::sqrt(2.0 * alpha / M_PI);
  RadialProfile p{grid, {}, {}, q, c};
  for (double r : grid.nodes()) {
    p.values.push_back(c * std::exp(-alpha * r * r));
    p.slopes.push_back(-2.0 * alpha * r * c * std::exp(-alpha * r * r));
  }
  return p;
}

double profile_kinetic(const RadialProfile& p) {
  std::vector<double> d2;
  for (double s : profile_slopes(p)) d2.push_back(s * s);
  return radial_integral(d2, p.grid);
}

double profile_mass(const RadialProfile& p) {
  std::vector<double> u2;
  for (double v : p.values) u2.push_back(v * v);
  return radial_integral(u2, p.grid);
}

}  // namespace

TEST_SUITE("free_problem") {
  TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(FreeProblemParams::make(1.0, 2.0, 11.7), ParameterError);
    CHECK_THROWS_AS(FreeProblemParams::make(1.0, 0.0, 1.0), ParameterError);
    CHECK_THROWS_AS(FreeProblemParams::make(0.0, 1.0, 1.0), ParameterError);
    CHECK_THROWS_AS(FreeProblemParams::make(1.0, 1.0, -1.0), ParameterError);
    CHECK(FreeProblemParams::from_ratio(1.3, 1.5, 2.0).a == doctest::Approx(2.6));
  }

  TEST_CASE("closed-form energy at simple couplings") {
    const double aq = test::ground(1.0).aq_star;
    CHECK(tilde_d_closed(FreeProblemParams::make(aq, 1.0, aq)) == doctest::Approx(-0.25).epsilon(1e-14));
    CHECK(tilde_d_closed(FreeProblemParams::make(2.0 * aq, 1.0, aq)) == doctest::Approx(-1.0).epsilon(1e-14));
  }

  TEST_CASE("closed-form energy diverges as q approaches 2") {
    double prev = 0.0;
    for (double q : {1.5, 1.8, 1.9, 1.95, 1.99}) {
      const double d = tilde_d_closed(FreeProblemParams::from_ratio(1.2, q, 5.0));
      CHECK(d < prev);
      CHECK(std::isfinite(d));
      prev = d;
    }
    CHECK(prev < -1e6);
  }

  TEST_CASE("g and its minimizer") {
    const double aq = test::ground(1.0).aq_star;
    const FreeProblemParams p = FreeProblemParams::make(2.0 * aq, 1.0, aq);
    CHECK(g_eval(0.0, p) == 0.0);
    CHECK(g_argmin(p) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(g_eval(1.0, p) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(g_eval(g_argmin(p), p) == doctest::Approx(tilde_d_closed(p)).epsilon(1e-14));
    CHECK_THROWS_AS(g_eval(-1.0, p), ParameterError);
  }

  TEST_CASE("golden-section search finds the same minimizer") {
    for (double q : {0.5, 1.0, 1.5, 1.8}) {
      for (double ratio : {1.1, 1.5, 3.0}) {
        const FreeProblemParams p = FreeProblemParams::from_ratio(ratio, q, 4.0);
        const double s = g_argmin(p);
        const double found = static_cast<double>(golden_argmin(ratio, q, 0.0L, 10.0L * s));
        CAPTURE(q);
        CAPTURE(ratio);
        CHECK(std::abs(found - s) / s < 1e-8);
      }
    }
  }

  TEST_CASE("g is decreasing up to its minimizer") {
    const FreeProblemParams p = FreeProblemParams::from_ratio(1.4, 1.7, 9.0);
    const double s = g_argmin(p);
    double prev = g_eval(0.0, p);
    for (int k = 1; k <= 100; ++k) {
      const double v = g_eval(s * k / 100.0, p);
      CHECK(v < prev);
      prev = v;
    }
  }

  TEST_CASE("scales") {
    for (double q : {0.5, 1.0, 1.9}) CHECK(eps_q(FreeProblemParams::from_ratio(1.0, q, 3.0)) == doctest::Approx(1.0));
    const double aq = test::ground(1.0).aq_star;
    const FreeProblemParams p = FreeProblemParams::make(2.0 * aq, 1.0, aq);
    CHECK(eps_q(p) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(tau_q(p) == doctest::Approx(1.0).epsilon(1e-14));
    double prev = INFINITY;
    for (double q : {1.5, 1.6, 1.7, 1.8, 1.9}) {
      const double e = eps_q(FreeProblemParams::from_ratio(1.2, q, 3.0));
      CHECK(e < prev);
      prev = e;
    }
    CHECK(prev < 0.2);
    const ScalingRecord sc = scaling(p);
    CHECK(sc.tau_q == tau_q(p));
    CHECK(sc.eps_q == eps_q(p));
    CHECK(sc.tilde_d == tilde_d_closed(p));
  }

  TEST_CASE("randomized closed-form identities") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> qd(0.05, 1.98), rd(0.2, 4.0), ad(0.5, 20.0);
    for (int t = 0; t < 500; ++t) {
      const FreeProblemParams p = FreeProblemParams::from_ratio(rd(rng), qd(rng), ad(rng));
      CAPTURE(p.q);
      CAPTURE(p.ratio());
      CHECK(g_eval(g_argmin(p), p) == doctest::Approx(tilde_d_closed(p)).epsilon(1e-12));
      CHECK(tau_q(p) * eps_q(p) == doctest::Approx(std::pow(p.q / 2.0, 1.0 / (2.0 - p.q))).epsilon(1e-13));
      CHECK(tau_q(p) * tau_q(p) == doctest::Approx(g_argmin(p)).epsilon(1e-13));
      if (p.ratio() > 1.0) CHECK(tilde_d_closed(p) < 0.0);
    }
  }

  TEST_CASE("unit-scale profile is the normalized ground state") {
    const GroundStateRecord& rec = test::ground(1.0);
    const FreeProblemParams p = FreeProblemParams::make(2.0 * rec.aq_star, 1.0, rec.aq_star);
    const RadialProfile prof = tilde_minimizer_profile(rec, p);
    const double norm = std::sqrt(rec.mass);
    for (std::size_t i = 0; i < prof.values.size(); i += 97)
      CHECK(prof.values[i] == doctest::Approx(rec.profile.values[i] / norm).epsilon(1e-13));
  }

  TEST_CASE("rescaled profile has unit mass and kinetic energy tau squared") {
    for (double q : {1.0, 1.5, 1.9}) {
      for (double ratio : {1.1, 1.5}) {
        const GroundStateRecord& rec = test::ground(q);
        const FreeProblemParams p = FreeProblemParams::from_ratio(ratio, q, rec.aq_star);
        const RadialProfile prof = tilde_minimizer_profile(rec, p);
        CHECK(std::abs(profile_mass(prof) - 1.0) < 1e-6);
        if (q == 1.5 && ratio == 1.5)
          CHECK(profile_kinetic(prof) == doctest::Approx(tau_q(p) * tau_q(p)).epsilon(1e-5));
      }
    }
  }

  TEST_CASE("mismatched exponent") {
    const FreeProblemParams p = FreeProblemParams::from_ratio(1.2, 1.5, test::ground(1.0).aq_star);
    CHECK_THROWS_AS(tilde_minimizer_profile(test::ground(1.0), p), ParameterError);
  }

  TEST_CASE("quadrature of the rescaled profile reproduces the closed form") {
    for (double q : {1.0, 1.5, 1.9}) {
      for (double ratio : {1.1, 1.5}) {
        const GroundStateRecord& rec = test::ground(q);
        const FreeProblemParams p = FreeProblemParams::from_ratio(ratio, q, rec.aq_star);
        const double quad = tilde_energy_quadrature(tilde_minimizer_profile(rec, p), p);
        CAPTURE(q);
        CAPTURE(ratio);
        CHECK(std::abs(quad - tilde_d_closed(p)) / std::abs(tilde_d_closed(p)) < 1e-5);
      }
    }
  }

  TEST_CASE("one refinement tightens the cross-check below 1e-6") {
    const GroundStateRecord rec = find_ground_state(1.9, RadialGrid::standard().refined());
    const FreeProblemParams p = FreeProblemParams::from_ratio(1.5, 1.9, rec.aq_star);
    const double quad = tilde_energy_quadrature(tilde_minimizer_profile(rec, p), p);
    CHECK(std::abs(quad - tilde_d_closed(p)) / std::abs(tilde_d_closed(p)) < 1e-6);
  }

  TEST_CASE("Gaussians lie above the minimum") {
    const GroundStateRecord& rec = test::ground(1.5);
    const FreeProblemParams p = FreeProblemParams::from_ratio(1.3, 1.5, rec.aq_star);
    for (double alpha : {0.1, 0.5, 1.0, 3.0})
      CHECK(tilde_energy_quadrature(unit_gaussian(RadialGrid::standard(), alpha, 1.5), p) >= tilde_d_closed(p));
  }

  TEST_CASE("weak coupling reduces to the kinetic energy") {
    const RadialProfile g = unit_gaussian(RadialGrid::standard(), 0.8, 1.5);
    const double kin = profile_kinetic(g);
    double prev_gap = INFINITY;
    for (double a : {1e-1, 1e-3, 1e-6}) {
      const double gap = std::abs(tilde_energy_quadrature(g, FreeProblemParams::make(a, 1.5, 5.0)) - kin);
      CHECK(gap < prev_gap);
      prev_gap = gap;
    }
    CHECK(prev_gap < 1e-6);
  }

  TEST_CASE("non-normalized profile is rejected") {
    RadialProfile g = unit_gaussian(RadialGrid::standard(), 0.8, 1.5);
    for (double& v : g.values) v *= 2.0;
    CHECK_THROWS_AS(tilde_energy_quadrature(g, FreeProblemParams::make(1.0, 1.5, 5.0)), ParameterError);
  }

  TEST_CASE("randomized unit-mass profiles respect the lower bound") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> c(0.1, 2.0), al(0.2, 4.0), rs(1.05, 2.0);
    const double qs[] = {1.0, 1.5, 1.9};
    for (int t = 0; t < 200; ++t) {
      const double q = qs[t % 3];
      const GroundStateRecord& rec = test::ground(q);
      const RadialGrid grid = RadialGrid::standard();
      RadialProfile p{grid, std::vector<double>(grid.n, 0.0), std::vector<double>(grid.n, 0.0), q, 0.0};
      for (int k = 0; k < 1 + t % 3; ++k) {
        const double ck = c(rng), ak = al(rng);
        for (std::size_t i = 0; i < grid.n; ++i) {
          const double r = grid.node(i), e = ck * std::exp(-ak * r * r);
          p.values[i] += e;
          p.slopes[i] -= 2.0 * ak * r * e;
        }
      }
      const double scale = 1.0 / std::sqrt(profile_mass(p));
      for (double& v : p.values) v *= scale;
      for (double& v : p.slopes) v *= scale;
      const FreeProblemParams fp = FreeProblemParams::from_ratio(rs(rng), q, rec.aq_star);
      CHECK(tilde_energy_quadrature(p, fp) >= tilde_d_closed(fp) - 1e-8);
    }
  }
}
