#include <cmath>
#include <random>

#include "chemolab/model.hpp"
#include "chemolab/radial.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace chemolab;
using testing::error_kind;

namespace {

// Composite Simpson on [a,b] with m (even) panels; independent of the
// library's product rule.
double simpson(const std::function<double(double)>& f, double a, double b, int m = 2000) {
  const double h = (b - a) / m;
  double acc = f(a) + f(b);
  for (int i = 1; i < m; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return acc * h / 3.0;
}

// Smooth positive profile with a few random modes.
std::function<double(double)> random_smooth(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> a(0.05, 0.3), k(0.5, 4.0), ph(0.0, 6.28);
  const double a1 = a(rng), a2 = a(rng), k1 = k(rng), k2 = k(rng), p1 = ph(rng), p2 = ph(rng);
  return [=](double r) { return 1.0 + a1 * std::cos(k1 * r + p1) + a2 * std::sin(k2 * r + p2); };
}

}  // namespace

TEST_CASE("grids and sampling") {
  const auto r = uniform_radial_grid(2.0, 5);
  REQUIRE(r.size() == 5);
  CHECK(r.front() == 0.0);
  CHECK(r.back() == 2.0);
  const auto s = mass_grid(r, 3);
  CHECK(s.back() == 8.0);
  CHECK(s[1] == doctest::Approx(0.125));
  CHECK(error_kind([] { uniform_radial_grid(1.0, 1); }) == ErrorKind::Structural);
  CHECK(error_kind([] { uniform_radial_grid(-1.0, 8); }) == ErrorKind::Domain);
}

TEST_CASE("to_mass_profile of a constant is c s / n") {
  for (int n : {2, 3, 5}) {
    const RadialProfile u = sample_radial([](double) { return 2.5; }, 1.3, 256);
    const MassProfile U = to_mass_profile(u, n);
    CHECK(U.values.front() == 0.0);
    CHECK(U.mu == doctest::Approx(2.5).epsilon(1e-13));
    for (std::size_t j = 1; j < U.size(); ++j) {
      CHECK(testing::rel(U.values[j], 2.5 * U.s[j] / n) <= 1e-12);
    }
    CHECK(U.values.back() == dirichlet_value(U.mu, U.s.back(), n));
  }
}

TEST_CASE("to_mass_profile of u = r in n = 3 is s^{4/3}/4") {
  const RadialProfile u = sample_radial([](double r) { return r; }, 1.0, 300);
  const MassProfile U = to_mass_profile(u, 3);
  for (std::size_t j = 1; j < U.size(); ++j) {
    CHECK(testing::rel(U.values[j], std::pow(U.s[j], 4.0 / 3.0) / 4.0) <= 1e-12);
  }
}

TEST_CASE("to_mass_profile converges at second order") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 5; ++trial) {
    const auto u = random_smooth(rng);
    // 512, 1024 and 2048 cells so that coarse nodes are shared.
    const MassProfile c = to_mass_profile(sample_radial(u, 1.0, 513), 3);
    const MassProfile m = to_mass_profile(sample_radial(u, 1.0, 1025), 3);
    const MassProfile f = to_mass_profile(sample_radial(u, 1.0, 2049), 3);
    double d1 = 0.0, d2 = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) {
      d1 = std::max(d1, std::abs(c.values[j] - m.values[2 * j]));
      d2 = std::max(d2, std::abs(m.values[2 * j] - f.values[4 * j]));
    }
    const double order = std::log2(d1 / d2);
    CHECK(order >= 1.8);
    CHECK(order <= 2.2);
  }
}

TEST_CASE("mean density agrees with direct quadrature of the raw profile") {
  std::mt19937_64 rng(9);
  for (int n : {2, 3, 4}) {
    const auto u = random_smooth(rng);
    const double R = 1.7;
    const MassProfile U = to_mass_profile(sample_radial(u, R, 1024), n);
    const double direct =
        n / std::pow(R, n) * simpson([&](double r) { return std::pow(r, n - 1) * u(r); }, 0, R);
    CHECK(testing::rel(U.mu, direct) <= 1e-6);
  }
}

TEST_CASE("non-monotone grids are rejected") {
  RadialProfile u;
  u.r = {0.0, 0.5, 0.4, 1.0};
  u.values = {1, 1, 1, 1};
  CHECK(error_kind([&] { to_mass_profile(u, 3); }) == ErrorKind::Structural);
  u.r = {0.1, 0.5, 0.7, 1.0};
  CHECK(error_kind([&] { to_mass_profile(u, 3); }) == ErrorKind::Structural);
  u.r = {0.0, 0.5, 1.0};
  u.values = {1, 1};
  CHECK(error_kind([&] { to_mass_profile(u, 3); }) == ErrorKind::Structural);
  CHECK(error_kind([] {
          to_mass_profile(sample_radial([](double) { return 1.0; }, 1, 8), 1);
        }) == ErrorKind::InvalidDimension);
}

TEST_CASE("from_mass_profile inverts linear mass profiles exactly") {
  const RadialProfile grid = sample_radial([](double) { return 0.0; }, 1.0, 200);
  const int n = 3;
  const double c = 4.2;
  std::vector<double> vals(grid.size());
  const auto s = mass_grid(grid.r, n);
  for (std::size_t j = 0; j < vals.size(); ++j) vals[j] = c * s[j] / n;
  const MassProfile U = mass_profile_from_values(grid.r, vals, n);
  const RadialProfile u = from_mass_profile(U, n);
  for (double v : u.values) CHECK(v == doctest::Approx(c).epsilon(1e-10));
}

TEST_CASE("from_mass_profile needs three nodes") {
  const MassProfile U = mass_profile_from_values({0.0, 1.0}, {0.0, 1.0}, 3);
  CHECK(error_kind([&] { from_mass_profile(U, 3); }) == ErrorKind::Structural);
}

TEST_CASE("round trip on smooth data at 1024 nodes") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 5; ++trial) {
    const auto f = random_smooth(rng);
    const RadialProfile u = sample_radial(f, 1.0, 1024);
    const RadialProfile back = from_mass_profile(to_mass_profile(u, 3), 3);
    double err = 0.0, scale = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
      err = std::max(err, std::abs(back.values[j] - u.values[j]));
      scale = std::max(scale, std::abs(u.values[j]));
    }
    CHECK(err / scale <= 1e-3);
  }
}

TEST_CASE("from_mass_profile keeps nondecreasing profiles nonnegative") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> inc(0.0, 1.0), coin(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto r = uniform_radial_grid(1.0, 128);
    std::vector<double> v(r.size(), 0.0);
    for (std::size_t j = 1; j < v.size(); ++j) {
      // smooth part plus occasional flat stretches
      const double ds = std::pow(r[j], 3) - std::pow(r[j - 1], 3);
      v[j] = v[j - 1] + (coin(rng) < 0.2 ? 0.0 : ds * (0.5 + inc(rng)));
    }
    const MassProfile U = mass_profile_from_values(r, v, 3);
    const RadialProfile u = from_mass_profile(U, 3);
    double scale = 0.0;
    for (double x : u.values) scale = std::max(scale, std::abs(x));
    // interior stencil is a positive combination of forward differences
    for (std::size_t j = 1; j + 1 < u.size(); ++j) CHECK(u.values[j] >= -1e-12 * scale);
  }
}

TEST_CASE("radial gradient") {
  const int n = 3;
  const double mu = 2.0;
  SUBCASE("constant species gives zero gradient") {
    const MassProfile W = to_mass_profile(sample_radial([=](double) { return mu; }, 1, 128), n);
    for (double g : radial_gradient(W, n).values) CHECK(std::abs(g) <= 1e-13);
  }
  SUBCASE("W = mu s^2/(n R^n) vanishes at r = R") {
    const double R = 1.5;
    const auto r = uniform_radial_grid(R, 100);
    const auto s = mass_grid(r, n);
    std::vector<double> v(r.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = mu * s[j] * s[j] / (n * std::pow(R, n));
    const MassProfile W = mass_profile_from_values(r, v, n);
    CHECK(W.mu == doctest::Approx(mu).epsilon(1e-14));
    const RadialProfile g = radial_gradient(W, n);
    CHECK(g.values.front() == 0.0);
    CHECK(std::abs(g.values.back()) <= 1e-14);
    for (std::size_t j = 1; j < g.size(); ++j) {
      const double expect = -(mu / n) * r[j] * (std::pow(r[j] / R, n) - 1.0);
      CHECK(g.values[j] == doctest::Approx(expect).epsilon(1e-12));
    }
  }
  SUBCASE("agrees with direct quadrature of the elliptic solution") {
    const auto w = [](double r) { return 1.0 + 0.5 * std::cos(2.0 * r) + 0.3 * r * r; };
    const double R = 1.0;
    const MassProfile W = to_mass_profile(sample_radial(w, R, 1024), n);
    const RadialProfile g = radial_gradient(W, n);
    const double mu_ref =
        n / std::pow(R, n) * simpson([&](double r) { return r * r * w(r); }, 0, R, 20000);
    double worst = 0.0;
    for (std::size_t j = 8; j < g.size(); j += 8) {
      const double r = g.r[j];
      const double oracle =
          std::pow(r, 1 - n) *
          simpson([&](double rho) { return rho * rho * (mu_ref - w(rho)); }, 0, r, 4000);
      worst = std::max(worst, std::abs(g.values[j] - oracle));
    }
    CHECK(worst <= 1e-6);
  }
}

TEST_CASE("drift factor is s^{1-1/n} h(s^{1/n-1} excess)") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> us(1e-6, 1.0), up(-3.0, 0.99), ux(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const int n = 2 + i % 4;
    const double s = us(rng), p = up(rng);
    const double x = 3.0 * ux(rng);
    const double W = x * s / n + s * ux(rng);  // nonnegative excess
    const double excess = W - x * s / n;
    const double g = std::pow(s, 1.0 / n - 1.0) * excess;
    const double via_h = std::pow(s, 1.0 - 1.0 / n) * h(g, p);
    CHECK(drift_factor(W, s, x, p, n) == doctest::Approx(via_h).epsilon(1e-12));
  }
}

TEST_CASE("drift factor is nonincreasing in the mean for p < 1") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> us(1e-6, 1.0), up(-3.0, 0.99), ux(-5.0, 5.0);
  for (int i = 0; i < 5000; ++i) {
    const int n = 2 + i % 4;
    const double s = us(rng), p = up(rng), W = ux(rng);
    double x1 = ux(rng), x2 = ux(rng);
    if (x1 > x2) std::swap(x1, x2);
    CHECK(drift_factor(W, s, x1, p, n) >= drift_factor(W, s, x2, p, n));
  }
}

TEST_CASE("operator residual examples") {
  const int n = 3;
  const auto r = uniform_radial_grid(1.0, 200);
  const auto s = mass_grid(r, n);
  std::vector<double> zeros(r.size(), 0.0);
  const MassProfile psi =
      to_mass_profile(sample_radial([](double x) { return 1 + x * x; }, 1.0, 200), n);
  SUBCASE("phi = 0") {
    const MassProfile phi = mass_profile_from_values(r, zeros, n);
    const OperatorResidual P = eval_P(phi, psi, zeros, 2.0, 0.4, n);
    CHECK(P.values.size() == r.size() - 2);
    for (double v : P.values) CHECK(v == 0.0);
  }
  SUBCASE("linear phi with psi at its mean") {
    const double mu_ref = 1.7, c = 0.9;
    std::vector<double> a(r.size()), b(r.size());
    for (std::size_t j = 0; j < r.size(); ++j) {
      a[j] = c * s[j];
      b[j] = mu_ref * s[j] / n;
    }
    const MassProfile phi = mass_profile_from_values(r, a, n);
    const MassProfile lin = mass_profile_from_values(r, b, n);
    const OperatorResidual P = eval_P(phi, lin, zeros, mu_ref, -0.5, n);
    for (std::size_t k = 0; k < P.values.size(); ++k) {
      CHECK(std::abs(P.values[k]) <= 1e-9 * std::max(1.0, P.scale[k]));
    }
    const OperatorResidual Q = eval_Q(lin, phi, zeros, mu_ref, 0.3, n);
    for (std::size_t k = 0; k < Q.values.size(); ++k) {
      CHECK(std::abs(Q.values[k]) <= 1e-9 * std::max(1.0, Q.scale[k]));
    }
  }
  SUBCASE("mismatched grids") {
    const MassProfile other =
        to_mass_profile(sample_radial([](double) { return 1.0; }, 1.0, 100), n);
    CHECK(error_kind([&] { eval_P(psi, other, zeros, 1.0, 0.0, n); }) ==
          ErrorKind::Structural);
  }
}

TEST_CASE("profile csv round trip") {
  const RadialProfile u = sample_radial([](double r) { return 1.0 / 3.0 + r; }, 1.25, 17);
  const MassProfile U = to_mass_profile(u, 3);
  const CsvProfile cu = parse_profile_csv(to_csv(u, "u", 3, U.mu));
  CHECK(cu.kind == "u");
  CHECK(cu.n == 3);
  CHECK(cu.R == 1.25);
  CHECK(cu.mu == U.mu);
  CHECK(cu.grid == u.r);
  CHECK(cu.values == u.values);
  const CsvProfile cU = parse_profile_csv(to_csv(U, "U", 3));
  CHECK(cU.grid == U.s);
  CHECK(cU.values == U.values);
  CHECK(error_kind([] { parse_profile_csv("nonsense"); }) == ErrorKind::Parse);
  CHECK(error_kind([] { parse_profile_csv("# kind,n,R,mu\n# u,3,1,1\ngrid,value\n0,x\n"); }) ==
        ErrorKind::Parse);
}
