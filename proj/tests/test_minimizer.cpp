#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include <Eigen/Dense>

#include "gpq/asymptotics.hpp"
#include "gpq/errors.hpp"
#include "gpq/minimizer.hpp"
#include "support.hpp"

using namespace gpq;

namespace {

// Lowest eigenvalue of −d²/dx² + x² discretized exactly like the spectral
// scheme on one axis (dense matrix, interior nodes).  The 2D problem with
// V = x² + y² separates, so its ground energy is twice this value.
double dense_harmonic_ground(const Grid2D& g) {
  const int N = static_cast<int>(g.interior());
  Eigen::MatrixXd S(N, N);
  for (int j = 0; j < N; ++j)
    for (int k = 0; k < N; ++k) S(j, k) = std::sin((j + 1.0) * (k + 1.0) * M_PI / (N + 1.0));
  Eigen::VectorXd lam(N);
  for (int k = 0; k < N; ++k) lam[k] = std::pow((k + 1.0) * M_PI / (2.0 * g.L), 2);
  Eigen::MatrixXd H = (2.0 / (N + 1.0)) * S * lam.asDiagonal() * S;
  for (int j = 0; j < N; ++j) H(j, j) += std::pow(g.coord(j + 1), 2);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  return es.eigenvalues().minCoeff();
}

FlowConfig quick_flow() {
  FlowConfig c;
  c.max_iter = 20000;
  return c;
}

}  // namespace

TEST_SUITE("minimizer") {
  TEST_CASE("linear harmonic problem matches a dense eigensolver") {
    const Grid2D g = Grid2D::make(8.0, 64);
    const Field2D seed = make_seed(GaussianSeed{{0.5, 0.3}, 1.5}, g);
    const MinimizationResult r = normalized_gradient_flow(seed, PotentialSpec::harmonic(), 0.0, 1.5, quick_flow());
    REQUIRE(r.converged);
    const double oracle = 2.0 * dense_harmonic_ground(g);
    CHECK(r.energy == doctest::Approx(oracle).epsilon(1e-8));
    CHECK(r.energy == doctest::Approx(2.0).epsilon(0.02));
    CHECK(r.mu == doctest::Approx(r.energy).epsilon(1e-8));
    CHECK(lagrange_multiplier(r, PotentialSpec::harmonic(), 0.0, 1.5) == doctest::Approx(r.energy).epsilon(1e-8));
    CHECK(std::hypot(r.max_point[0], r.max_point[1]) < g.spacing() / 2);
    CHECK(r.local_maxima.size() == 1);
  }

  TEST_CASE("explicit flow reaches the same state") {
    const Grid2D g = Grid2D::make(8.0, 64);
    const Field2D seed = make_seed(GaussianSeed{{0.5, 0.3}, 1.5}, g);
    FlowConfig c = quick_flow();
    c.method = FlowMethod::Explicit;
    const MinimizationResult r = normalized_gradient_flow(seed, PotentialSpec::harmonic(), 0.0, 1.5, c);
    REQUIRE(r.converged);
    CHECK(r.energy == doctest::Approx(2.0 * dense_harmonic_ground(g)).epsilon(1e-8));
  }

  TEST_CASE("trapped attractive minimizer") {
    const Grid2D g = Grid2D::make(8.0, 129);
    const double q = 1.8;
    const GroundStateRecord& rec = test::ground(q);
    const FreeProblemParams p = FreeProblemParams::from_ratio(1.2, q, rec.aq_star);
    const PotentialSpec V = PotentialSpec::harmonic();
    const FlowConfig cfg = quick_flow();
    const MinimizationResult r = normalized_gradient_flow(make_seed(free_minimizer_seed(rec, p, {0, 0}), g), V, p.a, q, cfg);
    REQUIRE(r.converged);
    const double td = tilde_d_closed(p);
    CHECK(r.energy >= td);
    CHECK(r.energy - td > 0.0);
    CHECK(r.energy - td < 1.0);
    CHECK(mass(r.field) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(r.min_value >= -cfg.clip_tolerance * r.max_value);
    const DirichletOperator op(g, cfg.scheme);
    CHECK(stationarity_residual(r.field, V.sample(g), p.a, q, op) <= cfg.tol_residual);
    const double mu = lagrange_multiplier(r, V, p.a, q);
    CHECK(mu == doctest::Approx(r.energy - q * p.a / (q + 2) * r.breakdown.interaction).epsilon(1e-8));
    CHECK(mu == doctest::Approx(r.mu).epsilon(1e-6));
    const double eps = eps_q(p);
    CHECK(eps * eps * r.breakdown.kinetic >= 0.1);
    CHECK(eps * eps * r.breakdown.kinetic <= 10.0);
    if (r.energy < 0.0) CHECK(r.breakdown.kinetic < 2 * p.a / (q + 2) * r.breakdown.interaction);

    SUBCASE("a Gaussian and a warm start land on the same energy") {
      const MinimizationResult rg = normalized_gradient_flow(make_seed(GaussianSeed{{0.2, -0.1}, 0.6}, g), V, p.a, q, cfg);
      const auto prev = std::make_shared<const Field2D>(r.field);
      const MinimizationResult rw = normalized_gradient_flow(make_seed(WarmStartSeed{prev, r.max_point, 1.3}, g), V, p.a, q, cfg);
      REQUIRE(rg.converged);
      REQUIRE(rw.converged);
      CHECK(std::abs(rg.energy - rw.energy) < 10 * cfg.tol_residual);
      CHECK(std::abs(rg.energy - r.energy) < 10 * cfg.tol_residual);
    }
  }

  TEST_CASE("energy never increases along the flow and mass stays one") {
    const Grid2D g = Grid2D::make(8.0, 64);
    const PotentialSpec V({Well{{-1, 0}, 2}, Well{{1, 0}, 2}});
    const Field2D seed = make_seed(GaussianSeed{{0.4, 0.2}, 1.0}, g);
    double prev = INFINITY;
    for (std::size_t k = 1; k <= 25; ++k) {
      FlowConfig c;
      c.max_iter = k;
      c.tol_residual = 1e-14;
      const MinimizationResult r = normalized_gradient_flow(seed, V, 3.0, 1.5, c);
      CHECK(r.energy <= prev);
      CHECK(mass(r.field) == doctest::Approx(1.0).epsilon(1e-10));
      CHECK_FALSE(r.converged);
      CHECK(r.iterations == k);
      prev = r.energy;
    }
  }

  TEST_CASE("locating the maximum") {
    const Grid2D g = Grid2D::make(8.0, 257);
    const RadialProfile& Q = test::ground(2.0).profile;
    const MaxPoint on = locate_max(embed_radial(Q, g, 0.5, 0.0));
    CHECK(std::hypot(on.point[0] - 0.5, on.point[1]) < g.spacing() / 2);
    CHECK(on.local_maxima.size() == 1);
    const MaxPoint off = locate_max(embed_radial(Q, g, 0.53, -0.21));
    CHECK(std::hypot(off.point[0] - 0.53, off.point[1] + 0.21) < g.spacing() / 2);
    const Field2D ramp = Field2D::sample(g, [&](double x, double) { return x + 8.0; });
    CHECK_THROWS_AS(locate_max(ramp), DomainError);
    Field2D two = embed_radial(Q, g, -2.0, 0.0);
    const Field2D other = embed_radial(Q, g, 2.0, 0.0);
    for (std::size_t k = 0; k < two.values.size(); ++k) two.values[k] += 0.9 * other.values[k];
    CHECK(locate_max(two).local_maxima.size() == 2);
  }

  TEST_CASE("dedupe keeps one result per minimizer") {
    const Grid2D g = Grid2D::make(8.0, 64);
    const std::vector<NamedSeed> seeds{{"a", GaussianSeed{{0.3, 0.0}, 1.0}}, {"b", GaussianSeed{{-0.3, 0.2}, 0.8}}};
    const auto res = multi_seed_minimize(seeds, g, PotentialSpec::harmonic(), 2.0, 1.5, quick_flow());
    CHECK(res.size() == 1);
    CHECK(res.front().converged);
  }

  TEST_CASE("mirrored seeds give mirrored minimizers") {
    const Grid2D g = Grid2D::make(8.0, 129);
    const double q = 1.8;
    const GroundStateRecord& rec = test::ground(q);
    const FreeProblemParams p = FreeProblemParams::from_ratio(1.2, q, rec.aq_star);
    const PotentialSpec V({Well{{-1, 0}, 2}, Well{{1, 0}, 2}});
    const std::vector<NamedSeed> seeds{{"left", free_minimizer_seed(rec, p, {-1, 0})},
                                       {"right", free_minimizer_seed(rec, p, {1, 0})}};
    const auto one = multi_seed_minimize(seeds, g, V, p.a, q, quick_flow(), 1);
    const auto two = multi_seed_minimize(seeds, g, V, p.a, q, quick_flow(), 2);
    REQUIRE(one.size() == 2);
    REQUIRE(two.size() == 2);
    for (std::size_t k = 0; k < 2; ++k) {
      CHECK(one[k].field.values == two[k].field.values);
      CHECK(one[k].seed_name == two[k].seed_name);
    }
    CHECK(std::abs(one[0].energy - one[1].energy) < 10 * quick_flow().tol_residual);
    CHECK(one[0].max_point[0] * one[1].max_point[0] < 0.0);
    const Field2D mirrored = transform_field(one[0].field, Symmetry::reflection(0.0));
    CHECK(l2_distance(mirrored, one[1].field) < 1e-6);
  }

  TEST_CASE("non-convergence is reported, not thrown") {
    const Grid2D g = Grid2D::make(8.0, 64);
    FlowConfig c;
    c.max_iter = 3;
    const MinimizationResult r = normalized_gradient_flow(make_seed(GaussianSeed{}, g), PotentialSpec::harmonic(), 1.0, 1.5, c);
    CHECK_FALSE(r.converged);
    CHECK(r.iterations == 3);
  }

  TEST_CASE("flow configuration and inputs are validated") {
    const Grid2D g = Grid2D::make(8.0, 64);
    const Field2D seed = make_seed(GaussianSeed{}, g);
    FlowConfig c;
    c.dt = -1.0;
    CHECK_THROWS_AS(c.validate(), ParameterError);
    c = FlowConfig{};
    c.tol_residual = 0.0;
    CHECK_THROWS_AS(c.validate(), ParameterError);
    c = FlowConfig{};
    c.max_iter = 0;
    CHECK_THROWS_AS(c.validate(), ParameterError);
    CHECK_THROWS_AS(normalized_gradient_flow(seed, PotentialSpec::harmonic(), 1.0, 2.0, FlowConfig{}), ParameterError);
    CHECK_THROWS_AS(normalized_gradient_flow(seed, PotentialSpec::harmonic(), -1.0, 1.5, FlowConfig{}), ParameterError);
    CHECK(FlowConfig{}.initial_dt(g) == 0.02);
    FlowConfig e;
    e.method = FlowMethod::Explicit;
    CHECK(e.initial_dt(g) == doctest::Approx(0.1 * g.spacing() * g.spacing()));
    CHECK(flow_method_from_string("explicit") == FlowMethod::Explicit);
    CHECK_THROWS(flow_method_from_string("newton"));
  }

  TEST_CASE("seeds are normalized, non-negative and vanish on the boundary") {
    const Grid2D g = Grid2D::make(8.0, 64);
    const GroundStateRecord& rec = test::ground(1.5);
    const FreeProblemParams p = FreeProblemParams::from_ratio(1.2, 1.5, rec.aq_star);
    const Field2D base = make_seed(GaussianSeed{{1, 1}, 2.0}, g);
    const std::vector<SeedRecipe> recipes{GaussianSeed{{1, 1}, 2.0}, free_minimizer_seed(rec, p, {-1, 0}),
                                          WarmStartSeed{std::make_shared<const Field2D>(base), {1, 1}, 1.5}};
    for (const auto& s : recipes) {
      const Field2D f = make_seed(s, g);
      CHECK(mass(f) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(*std::min_element(f.values.begin(), f.values.end()) >= 0.0);
      for (std::size_t k = 0; k < g.n; ++k) {
        CHECK(f.at(0, k) == 0.0);
        CHECK(f.at(k, g.n - 1) == 0.0);
      }
    }
  }

  TEST_CASE("domain guard") {
    const Grid2D g = Grid2D::make(8.0, 257);
    CHECK_THROWS_AS(check_domain(0.1, g), DomainError);
    CHECK_THROWS_AS(check_domain(2.0, g), DomainError);
    CHECK_NOTHROW(check_domain(0.5, g));
    std::string why;
    CHECK_FALSE(domain_ok(0.1, g, &why));
    CHECK(why.find("refine") != std::string::npos);
  }

  TEST_CASE("thread count from the environment") {
    ::setenv("GPQ_THREADS", "3", 1);
    CHECK(configured_threads() == 3);
    ::setenv("GPQ_THREADS", "zero", 1);
    CHECK_THROWS_AS(configured_threads(), ParameterError);
    ::unsetenv("GPQ_THREADS");
    CHECK(configured_threads() == 1);
  }

  TEST_CASE("result serialization") {
    const Grid2D g = Grid2D::make(8.0, 64);
    const MinimizationResult r = normalized_gradient_flow(make_seed(GaussianSeed{}, g), PotentialSpec::harmonic(), 1.0, 1.5, quick_flow());
    const nlohmann::json j = to_json(r);
    for (const char* key : {"energy", "mu", "residual", "iterations", "converged", "max_point", "max_value", "kinetic", "potential", "interaction"})
      CHECK(j.contains(key));
  }
}
