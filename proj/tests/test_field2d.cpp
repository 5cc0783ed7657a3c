#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "gpq/errors.hpp"
#include "gpq/field2d.hpp"
#include "gpq/free_problem.hpp"
#include "gpq/potentials.hpp"
#include "gpq/sine_transform.hpp"
#include "support.hpp"

using namespace gpq;

namespace {

Field2D unit_gaussian(const Grid2D& g, double cx = 0.0, double cy = 0.0) {
  // c exp(−|x−c|²/2) with c = 1/√π has unit mass, ∫|∇u|² = 1 and ∫|x−c|²u² = 1
  return Field2D::sample(g, [&](double x, double y) {
    return std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) / 2.0) / std::sqrt(M_PI);
  });
}

Field2D zero_ring(Field2D f) {
  const std::size_t n = f.grid.n;
  for (std::size_t k = 0; k < n; ++k) f.at(0, k) = f.at(n - 1, k) = f.at(k, 0) = f.at(k, n - 1) = 0.0;
  return f;
}

Field2D sine_mode(const Grid2D& g, int k, int l) {
  return Field2D::sample(g, [&](double x, double y) {
    return std::sin(k * M_PI * (x + g.L) / (2 * g.L)) * std::sin(l * M_PI * (y + g.L) / (2 * g.L));
  });
}

}  // namespace

TEST_SUITE("field2d") {
  TEST_CASE("grid validation") {
    CHECK_THROWS_AS(Grid2D::make(8.0, 15), ParameterError);
    CHECK_THROWS_AS(Grid2D::make(0.0, 64), ParameterError);
    const Grid2D g = Grid2D::make(8.0, 257);
    CHECK(g.spacing() == doctest::Approx(1.0 / 16.0));
    CHECK(g.coord(0) == -8.0);
    CHECK(g.coord(256) == doctest::Approx(8.0));
    CHECK(g.coord(128) == doctest::Approx(0.0));
    CHECK_THROWS(Field2D(g, std::vector<double>(10)));
  }

  TEST_CASE("laplacian of a constant vanishes inside and is negative on the ring") {
    const Grid2D g = Grid2D::make(1.0, 16);
    const Field2D L = laplacian(Field2D(g, 1.0));
    for (std::size_t i = 0; i < g.n; ++i)
      for (std::size_t j = 0; j < g.n; ++j) {
        const bool ring = i == 0 || j == 0 || i == g.n - 1 || j == g.n - 1;
        if (ring) CHECK(L.at(i, j) < 0.0);
        else CHECK(L.at(i, j) == doctest::Approx(0.0));
      }
  }

  TEST_CASE("laplacian is exact on quadratics") {
    const Grid2D g = Grid2D::make(2.0, 33);
    const Field2D L = laplacian(Field2D::sample(g, [](double x, double y) { return x * x + y * y; }));
    for (std::size_t i = 1; i + 1 < g.n; ++i)
      for (std::size_t j = 1; j + 1 < g.n; ++j) CHECK(L.at(i, j) == doctest::Approx(4.0).epsilon(1e-10));
  }

  TEST_CASE("laplacian matches a dense matrix") {
    const Grid2D g = Grid2D::make(1.5, 16);
    const std::size_t n = g.n, N = n * n;
    const double h2 = g.spacing() * g.spacing();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(N, N);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const std::size_t r = i * n + j;
        A(r, r) = -4.0 / h2;
        if (i > 0) A(r, r - n) = 1.0 / h2;
        if (i + 1 < n) A(r, r + n) = 1.0 / h2;
        if (j > 0) A(r, r - 1) = 1.0 / h2;
        if (j + 1 < n) A(r, r + 1) = 1.0 / h2;
      }
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd;
    Field2D f(g);
    for (double& v : f.values) v = nd(rng);
    const Eigen::VectorXd ref = A * Eigen::Map<const Eigen::VectorXd>(f.values.data(), N);
    const Field2D L = laplacian(f);
    for (std::size_t r = 0; r < N; ++r) CHECK(L.values[r] == doctest::Approx(ref[r]).epsilon(1e-12));
  }

  TEST_CASE("quadrature") {
    const Grid2D g = Grid2D::make(8.0, 257);
    const Field2D u = unit_gaussian(g);
    CHECK(mass(u) == doctest::Approx(1.0).epsilon(1e-8));
    const Field2D z(g);
    CHECK(integrate(z) == 0.0);
    CHECK(mass(z) == 0.0);
    CHECK(p_norm_power(z, 3.7) == 0.0);
    // ∫u^4 = 1/(2π) for this Gaussian
    CHECK(p_norm_power(u, 4.0) == doctest::Approx(1.0 / (2.0 * M_PI)).epsilon(1e-8));
    CHECK(l2_distance(u, u) == 0.0);
    CHECK(l2_distance(u, z) == doctest::Approx(1.0).epsilon(1e-8));
  }

  TEST_CASE("embedded radial ground state keeps its mass") {
    const Grid2D g = Grid2D::make(8.0, 257);
    for (double q : {1.0, 2.0}) {
      const GroundStateRecord& rec = test::ground(q);
      CHECK(mass(embed_radial(rec.profile, g)) == doctest::Approx(rec.mass).epsilon(1e-4));
    }
    const Field2D off = embed_radial(test::ground(2.0).profile, g, 0.5, -0.25);
    const std::size_t i = 136, j = 124;  // (0.5, −0.25)
    CHECK(off.at(i, j) == doctest::Approx(test::ground(2.0).profile.shoot_param).epsilon(1e-12));
  }

  TEST_CASE("energy of a field without potential or interaction is its kinetic energy") {
    const Grid2D g = Grid2D::make(8.0, 129);
    const Field2D u = unit_gaussian(g);
    const Field2D V0(g);
    for (auto scheme : {KineticScheme::FiniteDifference, KineticScheme::Spectral}) {
      const EnergyBreakdown e = energy(u, V0, 0.0, 1.5, scheme);
      CHECK(e.total == e.kinetic);
      CHECK(e.potential == 0.0);
      CHECK(e.kinetic == doctest::Approx(1.0).epsilon(2e-3));
    }
  }

  TEST_CASE("breakdown components add up") {
    const Grid2D g = Grid2D::make(8.0, 129);
    const Field2D u = unit_gaussian(g, 0.3, 0.1);
    const Field2D V = PotentialSpec::harmonic().sample(g);
    const EnergyBreakdown e = energy(u, V, 3.0, 1.7);
    CHECK(e.total == e.kinetic + e.potential - 2.0 * 3.0 / 3.7 * e.interaction);
  }

  TEST_CASE("embedded free minimizer energy matches the closed form") {
    const Grid2D g = Grid2D::make(8.0, 257);
    const GroundStateRecord& rec = test::ground(1.5);
    const FreeProblemParams p = FreeProblemParams::from_ratio(1.5, 1.5, rec.aq_star);
    Field2D u = embed_radial(tilde_minimizer_profile(rec, p), g);
    normalize(u);
    for (auto scheme : {KineticScheme::Spectral, KineticScheme::FiniteDifference}) {
      const EnergyBreakdown e = energy(u, Field2D(g), p.a, p.q, scheme);
      CAPTURE(to_string(scheme));
      const double tol = scheme == KineticScheme::Spectral ? 1e-4 : 1e-2;
      CHECK(std::abs(e.total - tilde_d_closed(p)) / std::abs(tilde_d_closed(p)) < tol);
    }
  }

  TEST_CASE("a non-negative potential only raises the energy") {
    const Grid2D g = Grid2D::make(8.0, 129);
    const Field2D u = unit_gaussian(g, 1.0, 0.0);
    const Field2D V = PotentialSpec::harmonic().sample(g);
    CHECK(energy(u, V, 5.0, 1.5).total >= energy(u, Field2D(g), 5.0, 1.5).total);
  }

  TEST_CASE("energy rejects invalid input") {
    const Grid2D g = Grid2D::make(8.0, 129);
    Field2D u = unit_gaussian(g);
    const Field2D V(g);
    CHECK_THROWS_AS(energy(u, Field2D(Grid2D::make(8.0, 65)), 1.0, 1.5), ParameterError);
    CHECK_THROWS_AS(energy(u, V, -1.0, 1.5), ParameterError);
    CHECK_THROWS_AS(energy(u, V, 1.0, 2.5), ParameterError);
    for (double& v : u.values) v *= 1.1;
    CHECK_THROWS_AS(energy(u, V, 1.0, 1.5), ParameterError);
    Field2D z(g);
    CHECK_THROWS(normalize(z));
  }

  TEST_CASE("summation by parts") {
    const Grid2D g = Grid2D::make(8.0, 129);
    const Field2D u = zero_ring(unit_gaussian(g, 0.4, -0.7));
    const Field2D L = laplacian(u);
    double s = 0.0;
    for (std::size_t k = 0; k < u.values.size(); ++k) s -= u.values[k] * L.values[k];
    s *= g.spacing() * g.spacing();
    CHECK(kinetic_energy(u, KineticScheme::FiniteDifference) == doctest::Approx(s).epsilon(1e-10));
  }

  TEST_CASE("finite-difference kinetic energy is second-order accurate") {
    double err[3];
    const std::size_t ns[] = {65, 129, 257};
    for (int k = 0; k < 3; ++k) err[k] = std::abs(kinetic_energy(unit_gaussian(Grid2D::make(8.0, ns[k])), KineticScheme::FiniteDifference) - 1.0);
    CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.1));
    CHECK(err[1] / err[2] == doctest::Approx(4.0).epsilon(0.1));
  }

  TEST_CASE("energy is invariant under a joint translation by one node") {
    const Grid2D g = Grid2D::make(8.0, 129);
    const double h = g.spacing();
    const PotentialSpec V({Well{{-1.0, 0.0}, 2.0}, Well{{1.0, 0.5}, 3.0}});
    const Field2D u0 = unit_gaussian(g, 0.2, 0.1);
    Field2D u1 = unit_gaussian(g, 0.2 + h, 0.1);
    const EnergyBreakdown e0 = energy(u0, V.sample(g), 4.0, 1.6);
    const EnergyBreakdown e1 = energy(u1, V.translated(h, 0.0).sample(g), 4.0, 1.6);
    CHECK(e1.total == doctest::Approx(e0.total).epsilon(1e-10));
  }

  TEST_CASE("Dirichlet operator diagonalizes sine modes") {
    const Grid2D g = Grid2D::make(3.0, 33);
    for (auto scheme : {KineticScheme::FiniteDifference, KineticScheme::Spectral}) {
      const DirichletOperator op(g, scheme);
      const Field2D m = sine_mode(g, 3, 5);
      const Field2D Am = op.apply(m);
      const double lam = op.eigenvalue(3, 5);
      for (std::size_t k = 0; k < m.values.size(); ++k) CHECK(Am.values[k] == doctest::Approx(lam * m.values[k]).epsilon(1e-9));
      const double kx = 3 * M_PI / 6.0, ky = 5 * M_PI / 6.0;
      if (scheme == KineticScheme::Spectral) CHECK(lam == doctest::Approx(kx * kx + ky * ky));
      else CHECK(lam < kx * kx + ky * ky);
    }
  }

  TEST_CASE("finite-difference operator agrees with the stencil inside") {
    const Grid2D g = Grid2D::make(3.0, 33);
    const DirichletOperator op(g, KineticScheme::FiniteDifference);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> ud;
    Field2D f(g);
    for (double& v : f.values) v = ud(rng);
    f = zero_ring(f);
    const Field2D A = op.apply(f);
    const Field2D L = laplacian(f);
    for (std::size_t i = 1; i + 1 < g.n; ++i)
      for (std::size_t j = 1; j + 1 < g.n; ++j) CHECK(A.at(i, j) == doctest::Approx(-L.at(i, j)).epsilon(1e-10));
  }

  TEST_CASE("resolvent inverts 1 + s(−Δ)") {
    const Grid2D g = Grid2D::make(4.0, 49);
    const DirichletOperator op(g, KineticScheme::Spectral);
    const Field2D f = zero_ring(unit_gaussian(g, 0.5, 0.5));
    Field2D r = f;
    op.resolvent(r, 0.3);
    const Field2D Ar = op.apply(r);
    for (std::size_t k = 0; k < f.values.size(); ++k) CHECK(r.values[k] + 0.3 * Ar.values[k] == doctest::Approx(f.values[k]).epsilon(1e-10));
  }

  TEST_CASE("sine transform applied twice scales by (2(N+1))²") {
    const std::size_t N = 10;
    SineTransform t(N);
    std::vector<double> d(N * N);
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = std::sin(0.3 * k) + 0.1 * k;
    const std::vector<double> orig = d;
    t.apply(d);
    t.apply(d);
    for (std::size_t k = 0; k < d.size(); ++k) CHECK(d[k] * t.normalization() == doctest::Approx(orig[k]).epsilon(1e-12));
  }

  TEST_CASE("sine interpolation reproduces node values and smooth functions") {
    const Grid2D g = Grid2D::make(6.0, 97);
    const Field2D f = unit_gaussian(g, 0.3, -0.2);
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < g.n; ++i) xs.push_back(g.coord(i));
    const std::vector<double> at_nodes = sine_interpolate(f, xs, xs);
    // the series vanishes on the boundary ring, so compare interior nodes
    for (std::size_t i = 1; i + 1 < g.n; i += 3)
      for (std::size_t j = 1; j + 1 < g.n; j += 5) CHECK(std::abs(at_nodes[i * g.n + j] - f.at(i, j)) < 1e-12);

    const std::vector<double> px{-1.234, 0.0071, 2.5}, py{0.333, -0.9};
    const std::vector<double> v = sine_interpolate(f, px, py);
    for (std::size_t a = 0; a < px.size(); ++a)
      for (std::size_t b = 0; b < py.size(); ++b) {
        const double exact = std::exp(-((px[a] - 0.3) * (px[a] - 0.3) + (py[b] + 0.2) * (py[b] + 0.2)) / 2) / std::sqrt(M_PI);
        CHECK(v[a * py.size() + b] == doctest::Approx(exact).epsilon(1e-8));
      }
    const std::vector<double> out{-7.0, 7.0};
    for (double x : sine_interpolate(f, out, px)) CHECK(x == 0.0);
  }

  TEST_CASE("bilinear sampling") {
    const Grid2D g = Grid2D::make(2.0, 21);
    const Field2D f = Field2D::sample(g, [](double x, double y) { return 2 * x - y + 1; });
    CHECK(bilinear(f, 0.33, -0.41) == doctest::Approx(2 * 0.33 + 0.41 + 1));
    CHECK(bilinear(f, 3.0, 0.0) == 0.0);
  }

  TEST_CASE("binary field round trip") {
    const Grid2D g = Grid2D::make(5.0, 33);
    const Field2D f = unit_gaussian(g, 0.1, 0.2);
    const std::string stem = test::scratch("field_roundtrip") + "/u";
    std::filesystem::create_directories(std::filesystem::path(stem).parent_path());
    write_field(f, stem);
    const Field2D back = read_field(stem);
    CHECK(back.grid == g);
    CHECK(back.values == f.values);
    CHECK(std::filesystem::file_size(stem + ".bin") == g.size() * 8);
    CHECK_THROWS(read_field(stem + "_missing"));
  }

  TEST_CASE("scheme names") {
    CHECK(kinetic_scheme_from_string("spectral") == KineticScheme::Spectral);
    CHECK(kinetic_scheme_from_string("fd") == KineticScheme::FiniteDifference);
    CHECK(kinetic_scheme_from_string(to_string(KineticScheme::FiniteDifference)) == KineticScheme::FiniteDifference);
    CHECK_THROWS(kinetic_scheme_from_string("chebyshev"));
  }
}
