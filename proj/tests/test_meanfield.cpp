#include <doctest.h>

#include <cmath>
#include <random>

#include "ipsim/meanfield.hpp"
#include "ipsim/random_stream.hpp"

using namespace ipsim;
using namespace ipsim::ode;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

// Uniform point in the open sub-simplex of dimension n.
Vector simplex_point(RandomStream& rng, std::size_t n, bool full) {
  std::vector<double> e(n + 1);
  double s = 0.0;
  for (auto& x : e) s += (x = rng.exponential(1.0));
  Vector u(static_cast<Eigen::Index>(n));
  if (full) {
    double t = 0.0;
    for (std::size_t i = 0; i < n; ++i) t += e[i];
    for (std::size_t i = 0; i < n; ++i) u[i] = e[i] / t;
  } else {
    for (std::size_t i = 0; i < n; ++i) u[i] = e[i] / s;
  }
  return u;
}

double max_abs_diff(const Vector& a, const Vector& b) { return (a - b).lpNorm<Eigen::Infinity>(); }

}  // namespace

TEST_CASE("rhs matches independent transcriptions") {
  RandomStream rng(101, 0);
  auto r = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform(); };
  for (int trial = 0; trial < 1000; ++trial) {
    const double b1 = r(0.5, 6), b2 = r(0.5, 6), b3 = r(0.5, 6), d1 = r(0.2, 2), d2 = r(0.2, 2),
                 d3 = r(0.2, 2), g1 = r(0, 3), g2 = r(0, 3), g3 = r(0, 3);

    const Vector u2 = simplex_point(rng, 2, false);
    const double x = u2[0], y = u2[1];
    {
      const OdeSystem s(CompetingContact{b1, b2, d1, d2});
      const Vector want = vec({b1 * x * (1 - x - y) - d1 * x, b2 * y * (1 - x - y) - d2 * y});
      REQUIRE(max_abs_diff(rhs(s, u2), want) <= 1e-12);
    }
    {
      const OdeSystem s(GrassBushesTrees{b1, b2, d1, d2});
      const Vector want = vec({b1 * x * (1 - x - y) - d1 * x - b2 * y * x, b2 * y * (1 - y) - d2 * y});
      REQUIRE(max_abs_diff(rhs(s, u2), want) <= 1e-12);
    }
    {
      const double p = r(0.05, 0.6), q = r(0.1, 1.5), rr = r(0.1, 4);
      const OdeSystem s(Catalyst{p, q, rr});
      const double v = 1 - x - y;
      const Vector want = vec({p * v - rr * x * y, q * v * v - rr * x * y});
      REQUIRE(max_abs_diff(rhs(s, u2), want) <= 1e-12);
    }
    {
      const OdeSystem s(Colicin{b1, b2, d1, d2, g1});
      const double v = 1 - x - y;
      const Vector want = vec({b1 * x * v - d1 * x, b2 * y * v - d2 * y - g1 * x * y});
      REQUIRE(max_abs_diff(rhs(s, u2), want) <= 1e-12);
    }
    {
      const double a = r(-1, 1), b = r(-1, 1), c = r(-1, 1), d = r(-1, 1), k = r(0.05, 1);
      const OdeSystem s(HawkDove{a, b, c, d, k});
      const double hu = 3 * x, hv = 3 * y;
      const double n = hu + hv;
      const Vector want = vec({a * hu * hu / n + b * hu * hv / n - k * hu * n,
                               c * hv * hu / n + d * hv * hv / n - k * hv * n});
      REQUIRE(max_abs_diff(rhs(s, vec({hu, hv})), want) <= 1e-12);
    }

    const Vector u3 = simplex_point(rng, 3, false);
    {
      const OdeSystem s(Colicin3{b1, b2, b3, d1, d2, d3, g1, g2});
      const double v = 1 - u3.sum();
      const Vector want = vec({b1 * u3[0] * v - d1 * u3[0], b2 * u3[1] * v - d2 * u3[1],
                               b3 * u3[2] * v - d3 * u3[2] - g1 * u3[0] * u3[2] - g2 * u3[1] * u3[2]});
      REQUIRE(max_abs_diff(rhs(s, u3), want) <= 1e-12);
    }

    const Vector w = simplex_point(rng, 3, true);
    {
      const double a = r(0.5, 5);
      const OdeSystem s(HostPathogen{a, g1, g2, g3});
      const double u1 = w[0], v2 = w[1], v3 = w[2];
      const Vector want = vec({g2 * u1 * v2 + g2 * v2 * v2 + g3 * u1 * v3 + g3 * v2 * v3 - a * u1 * v2 - g1 * u1 * v3,
                               a * u1 * v2 - g2 * v2,
                               g1 * u1 * v3 + g2 * v2 * v3 - g3 * u1 * v3 - g3 * v2 * v3});
      REQUIRE(max_abs_diff(rhs(s, w), want) <= 1e-12);
    }
    {
      const OdeSystem s(Voter{InvasionMatrix::cyclic(b1, b2, b3)});
      // 1 eats 3 at b1, 2 eats 1 at b2, 3 eats 2 at b3.
      const Vector want = vec({w[0] * (b1 * w[2] - b2 * w[1]), w[1] * (b2 * w[0] - b3 * w[2]),
                               w[2] * (b3 * w[1] - b1 * w[0])});
      REQUIRE(max_abs_diff(rhs(s, w), want) <= 1e-12);
    }
    {
      const double beta = r(3, 6), z = rng.uniform();
      const OdeSystem s(Sexual{beta});
      REQUIRE(std::abs(rhs(s, vec({z}))[0] - (-z + beta * z * z - beta * z * z * z)) <= 1e-12);
    }
  }
}

TEST_CASE("rhs examples and errors") {
  CHECK(rhs(OdeSystem(CompetingContact{4, 2, 1, 1}), vec({0.75, 0})).norm() == 0.0);
  CHECK(std::abs(rhs(OdeSystem(Sexual{4}), vec({0.5}))[0]) <= 1e-15);
  const OdeSystem sym(Voter{InvasionMatrix(3, {0, 1, 2, 1, 0, 3, 2, 3, 0})});
  CHECK(rhs(sym, vec({0.2, 0.5, 0.3})).norm() == 0.0);
  CHECK(rhs(OdeSystem(HawkDove{-0.6, 0.9, -0.9, 0.7, 0.1}), vec({0, 0})).norm() == 0.0);
  CHECK_THROWS_AS(rhs(OdeSystem(Sexual{4}), vec({NAN})), ModelError);
  CHECK_THROWS_AS(rhs(OdeSystem(Sexual{4}), vec({0.1, 0.2})), ModelError);
  CHECK_THROWS_AS(make_system("eq3", {}), ModelError);
  CHECK(make_system("eq8", {{"p", "0.4"}}).dimension() == 2);
}

TEST_CASE("jacobian agrees with analytic forms") {
  const double b1 = 4, b2 = 2, d1 = 1, d2 = 1;
  const OdeSystem s(CompetingContact{b1, b2, d1, d2});
  RandomStream rng(5, 0);
  for (int k = 0; k < 100; ++k) {
    const Vector u = simplex_point(rng, 2, false);
    const double v = 1 - u[0] - u[1];
    Matrix want(2, 2);
    want << b1 * v - b1 * u[0] - d1, -b1 * u[0], -b2 * u[1], b2 * v - b2 * u[1] - d2;
    CHECK((jacobian(s, u) - want).lpNorm<Eigen::Infinity>() <= 1e-6);
  }
  const OdeSystem sx(Sexual{4.5});
  for (double z : {0.0, 0.2, 1.0 / 3, 0.5, 0.9}) {
    CHECK(std::abs(jacobian(sx, vec({z}))(0, 0) - (-1 + 9 * z - 13.5 * z * z)) <= 1e-6);
  }
}

TEST_CASE("integrator") {
  const OdeSystem s(CompetingContact{4, 2, 1, 1});
  const auto traj = integrate(s, vec({0.1, 0.1}), 200.0, 1e-10);
  REQUIRE(traj.times.size() == 2);
  CHECK(max_abs_diff(traj.states.back(), vec({0.75, 0.0})) <= 1e-4);

  const auto zero = integrate(s, vec({0.1, 0.1}), 0.0, 1e-10);
  CHECK(zero.times.size() == 1);
  CHECK(zero.states[0] == vec({0.1, 0.1}));

  const std::vector<double> times{0.5, 1.0, 2.5, 10.0};
  const auto sampled = integrate(s, vec({0.1, 0.1}), 10.0, 1e-10, times);
  REQUIRE(sampled.times.size() == 5);
  for (std::size_t k = 0; k < times.size(); ++k) CHECK(sampled.times[k + 1] == times[k]);

  // Exact solution of du/dt = -u.
  const auto decay = integrate([](const Vector& u) -> Vector { return -u; }, vec({1.0}), 5.0, 1e-12);
  CHECK(std::abs(decay.states.back()[0] - std::exp(-5.0)) <= 1e-10);

  CHECK_THROWS_AS(integrate(s, vec({0.1, 0.1}), 1.0, 0.0), ModelError);
  // Blow-up in finite time (u' = u^2 from 1 reaches infinity at t = 1).
  CHECK_THROWS_AS(integrate([](const Vector& u) -> Vector { return u.array().square(); }, vec({1.0}),
                            2.0, 1e-8),
                  StiffnessError);
}

TEST_CASE("integrator error falls with tolerance") {
  const OdeSystem s(Sexual{5.0});
  const Vector u0 = vec({0.9});
  const double ref = integrate(s, u0, 10.0, 1e-14).states.back()[0];
  double previous = INFINITY;
  for (double tol : {1e-5, 1e-7, 1e-9}) {
    const auto traj = integrate(s, u0, 10.0, tol);
    const double err = std::abs(traj.states.back()[0] - ref);
    CAPTURE(tol);
    CHECK(err <= 10.0 * tol);
    if (std::isfinite(previous)) CHECK(err < previous / 10.0);
    previous = std::max(err, 1e-16);
  }
}

TEST_CASE("trajectories stay in the simplex") {
  RandomStream rng(9, 0);
  const std::vector<OdeSystem> systems = {
      OdeSystem(CompetingContact{3.9, 3.5, 2, 1}), OdeSystem(GrassBushesTrees{5, 2, 1, 1}),
      OdeSystem(Colicin{3, 4, 1, 1, 2.5}), OdeSystem(Colicin3{3, 3.2, 4, 1, 1, 1, 3, 0.5})};
  for (const auto& s : systems) {
    for (int k = 0; k < 10; ++k) {
      const Vector u0 = simplex_point(rng, s.dimension(), false);
      std::vector<double> times;
      for (int t = 1; t <= 50; ++t) times.push_back(t);
      const auto traj = integrate(s, u0, 50.0, 1e-10, times);
      for (const auto& u : traj.states) {
        CHECK(u.minCoeff() >= -1e-9);
        CHECK(u.sum() <= 1.0 + 1e-9);
      }
    }
  }
}

TEST_CASE("scaling voter rates rescales time") {
  const auto lambda = InvasionMatrix::cyclic(0.3, 0.7, 1.0);
  const double c = 2.5;
  const OdeSystem slow(Voter{lambda});
  const OdeSystem fast(Voter{lambda.scaled(c)});
  const Vector u0 = vec({0.6, 0.3, 0.1});
  std::vector<double> t_slow;
  std::vector<double> t_fast;
  for (int k = 1; k <= 20; ++k) {
    t_slow.push_back(k * 2.0);
    t_fast.push_back(k * 2.0 / c);
  }
  const auto a = integrate(slow, u0, 40.0, 1e-11, t_slow);
  const auto b = integrate(fast, u0, 40.0 / c, 1e-11, t_fast);
  REQUIRE(a.states.size() == b.states.size());
  for (std::size_t k = 0; k < a.states.size(); ++k) CHECK(max_abs_diff(a.states[k], b.states[k]) <= 1e-8);
}

TEST_CASE("fixed points of the cubic") {
  const auto search = find_fixed_points(OdeSystem(Sexual{4.5}));
  std::vector<double> roots;
  for (const auto& r : search.roots) roots.push_back(r.point[0]);
  std::sort(roots.begin(), roots.end());
  REQUIRE(roots.size() == 3);
  CHECK(std::abs(roots[0]) <= 1e-10);
  CHECK(std::abs(roots[1] - 1.0 / 3) <= 1e-10);
  CHECK(std::abs(roots[2] - 2.0 / 3) <= 1e-10);
  for (const auto& r : search.roots) {
    CHECK(r.residual <= 1e-10);
    const double x = r.point[0];
    CHECK(r.stability == (std::abs(x - 1.0 / 3) < 0.1 ? Stability::Unstable : Stability::Stable));
  }

  const auto double_root = find_fixed_points(OdeSystem(Sexual{4.0}));
  REQUIRE(double_root.roots.size() == 2);
  bool found = false;
  for (const auto& r : double_root.roots) {
    if (std::abs(r.point[0] - 0.5) <= 1e-5) {
      found = true;
      CHECK(r.degenerate);
    }
  }
  CHECK(found);
}

TEST_CASE("fixed points of the planar systems") {
  // Colicin interior point exists and is not stable.
  const auto col = find_fixed_points(OdeSystem(Colicin{3, 4, 1, 1, 2.5}));
  int interior = 0;
  for (const auto& r : col.roots) {
    if (r.point.minCoeff() > 1e-6) {
      ++interior;
      CHECK(r.stability == Stability::Saddle);
    }
  }
  CHECK(interior == 1);

  // Parallel nullclines: no interior root.
  const auto cc = find_fixed_points(OdeSystem(CompetingContact{4, 2, 1, 1}));
  for (const auto& r : cc.roots) CHECK(r.point.minCoeff() <= 1e-8);
  bool attractor = false;
  for (const auto& r : cc.roots) {
    if (max_abs_diff(r.point, vec({0.75, 0})) <= 1e-9) attractor = r.stability == Stability::Stable;
  }
  CHECK(attractor);

  // Catalyst: (1,0), (0,1) among the roots plus both interior points.
  const auto cat = find_fixed_points(OdeSystem(Catalyst{0.1, 0.5, 1.0}));
  const double disc = std::sqrt(0.16 - 4 * 0.5 * 0.01);
  const double alpha = (0.4 - disc) / 1.0, beta = (0.4 + disc) / 1.0;
  for (const auto& target : {vec({1, 0}), vec({alpha, beta}), vec({beta, alpha})}) {
    bool hit = false;
    for (const auto& r : cat.roots) hit = hit || max_abs_diff(r.point, target) <= 1e-8;
    CHECK(hit);
  }

  // Cyclic voter interior point is marginal.
  const auto cyc = find_fixed_points(OdeSystem(Voter{InvasionMatrix::cyclic(0.3, 0.7, 1.0)}));
  bool centre = false;
  for (const auto& r : cyc.roots) {
    if (max_abs_diff(r.point, vec({0.5, 0.15, 0.35})) <= 1e-9) centre = r.stability == Stability::Marginal;
  }
  CHECK(centre);
}

TEST_CASE("classification margin rule") {
  using C = std::complex<double>;
  const std::vector<C> stable{C(-1, 0), C(-0.5, 2)};
  const std::vector<C> unstable{C(1, 0), C(0.5, -2)};
  const std::vector<C> saddle{C(-1, 0), C(1, 0)};
  const std::vector<C> marginal{C(1e-10, 1), C(1e-10, -1)};
  const std::vector<C> mixed_marginal{C(-1, 0), C(0, 0)};
  CHECK(classify(stable, 1e-8) == Stability::Stable);
  CHECK(classify(unstable, 1e-8) == Stability::Unstable);
  CHECK(classify(saddle, 1e-8) == Stability::Saddle);
  CHECK(classify(marginal, 1e-8) == Stability::Marginal);
  CHECK(classify(mixed_marginal, 1e-8) == Stability::Marginal);
}

TEST_CASE("invasion conditions") {
  CHECK(gbt_invasion({5, 2, 1, 1}).invades);
  CHECK(gbt_invasion({5, 2, 1, 1}).margin == doctest::Approx(0.5));
  CHECK_FALSE(gbt_invasion({3.5, 2, 1, 1}).invades);
  CHECK(gbt_invasion({5, 0.8, 1, 1}).resident_extinct);

  const auto hp = host_pathogen_invasion({4, 0.5, 2, 1.2});
  CHECK(hp.invades);
  CHECK(hp.margin == doctest::Approx(0.05));
  CHECK(host_pathogen_invasion({1, 0.5, 2, 1.2}).resident_extinct);

  const auto col = colicin_interior({3, 4, 1, 1, 2.5});
  CHECK(col.invades);
  CHECK(col.margin == doctest::Approx(1.0 / 12));

  CHECK_THROWS_AS(invasion_check(InvasionKind::HostPathogen, OdeSystem(Sexual{4})), ModelError);
  CHECK(invasion_check(InvasionKind::GrassBushesTrees, OdeSystem(GrassBushesTrees{5, 2, 1, 1})).invades);

  // With the 2's at (beta2 - delta2) / beta2 the 1's settle where their growth balances.
  const OdeSystem gbt(GrassBushesTrees{5, 2, 1, 1});
  const double u2 = 0.5;
  const double u1 = (5.0 * (1 - u2) - 1.0 - 2.0 * u2) / 5.0;
  CHECK(rhs(gbt, vec({u1, u2})).lpNorm<Eigen::Infinity>() <= 1e-14);
}

TEST_CASE("cyclic equilibrium and invariant") {
  const auto eq = cyclic_equilibrium(0.3, 0.7, 1.0);
  CHECK(max_abs_diff(eq.rho, vec({0.5, 0.15, 0.35})) <= 1e-15);
  CHECK(max_abs_diff(cyclic_equilibrium(1, 1, 1).rho, vec({1.0 / 3, 1.0 / 3, 1.0 / 3})) <= 1e-15);
  CHECK_THROWS_AS(cyclic_equilibrium(0, 1, 1), ModelError);

  RandomStream rng(4, 0);
  for (int k = 0; k < 100; ++k) {
    const double b1 = 0.1 + rng.uniform(), b2 = 0.1 + rng.uniform(), b3 = 0.1 + rng.uniform();
    const auto e = cyclic_equilibrium(b1, b2, b3);
    CHECK(rhs(OdeSystem(Voter{InvasionMatrix::cyclic(b1, b2, b3)}), e.rho).lpNorm<Eigen::Infinity>() <= 1e-14);
  }

  const OdeSystem s(Voter{InvasionMatrix::cyclic(0.3, 0.7, 1.0)});
  const Vector u0 = vec({0.4, 0.3, 0.3});
  std::vector<double> times;
  for (int t = 1; t <= 100; ++t) times.push_back(t);
  const auto traj = integrate(s, u0, 100.0, 1e-10, times);
  double worst = 0.0;
  for (const auto& u : traj.states) worst = std::max(worst, std::abs(eq.conserved(u) - eq.conserved(u0)));
  CHECK(worst <= 1e-6);
}

TEST_CASE("lyapunov checker") {
  const OdeSystem cyc(Voter{InvasionMatrix::cyclic(0.3, 0.7, 1.0)});
  const auto eq = cyclic_equilibrium(0.3, 0.7, 1.0);
  const auto conserved = check_lyapunov([&](const Vector& u) { return -eq.conserved(u); }, cyc, 500);
  CHECK(conserved.samples == 500);
  CHECK(std::abs(conserved.max_derivative) <= 1e-9);
  CHECK(conserved.convexity_violations == 0);

  const auto flat = check_lyapunov([](const Vector&) { return 2.0; }, cyc, 100);
  CHECK(flat.max_derivative == 0.0);

  const OdeSystem cc(CompetingContact{4, 2, 1, 1});
  const auto drift = check_lyapunov([](const Vector& u) { return -u.array().log().sum(); }, cc, 500);
  CHECK(drift.max_derivative > 0.0);

  for (const auto& u : interior_samples(cc, 200, 0.02)) {
    CHECK(u.minCoeff() >= 0.02);
    CHECK(1.0 - u.sum() >= 0.02);
  }
}
