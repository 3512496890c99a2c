#include <doctest.h>

#include <algorithm>
#include <set>

#include "ipsim/errors.hpp"
#include "ipsim/lattice.hpp"
#include "ipsim/random_stream.hpp"

using namespace ipsim;

TEST_CASE("torus rejects degenerate sizes") {
  CHECK_THROWS_AS(TorusGeometry(1, 5), ConfigError);
  CHECK_THROWS_AS(TorusGeometry(5, 0), ConfigError);
  CHECK_NOTHROW(TorusGeometry(2, 2));
}

TEST_CASE("periodic wrap is a bijection for every offset") {
  const TorusGeometry g(7, 5);
  for (int dx = -9; dx <= 9; ++dx) {
    for (int dy = -6; dy <= 6; ++dy) {
      std::set<SiteIndex> image;
      for (SiteIndex s = 0; s < g.size(); ++s) {
        const auto t = g.shift(s, {dx, dy});
        REQUIRE(t < g.size());
        image.insert(t);
      }
      CHECK(image.size() == g.size());
    }
  }
  CHECK(g.site(-1, -1) == g.site(6, 4));
  CHECK(g.site(7, 5) == 0);
}

TEST_CASE("nearest neighbours and pairs") {
  const TorusGeometry g(4, 3);
  const auto nn = g.nearest(g.site(0, 0));
  CHECK(nn[0] == g.site(1, 0));
  CHECK(nn[1] == g.site(3, 0));
  CHECK(nn[2] == g.site(0, 1));
  CHECK(nn[3] == g.site(0, 2));
  CHECK(g.pair_count() == 24);
  std::set<std::pair<SiteIndex, SiteIndex>> seen;
  for (std::size_t k = 0; k < g.pair_count(); ++k) {
    auto [a, b] = g.pair(k);
    seen.insert({std::min(a, b), std::max(a, b)});
  }
  CHECK(seen.size() == 24);
}

TEST_CASE("box kernel enumerates the L-infinity box") {
  for (int L : {1, 2, 3}) {
    const auto k = box_kernel(L);
    const std::size_t expected = (2 * L + 1) * (2 * L + 1) - 1;
    CHECK(k.size() == expected);
    double total = 0.0;
    for (double p : k.probabilities()) {
      CHECK(p == doctest::Approx(1.0 / expected).epsilon(1e-15));
      total += p;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(k.reach() == L);
  }
  CHECK_THROWS_AS(box_kernel(0), ModelError);
}

TEST_CASE("box kernel is invariant under the square's symmetries") {
  const auto k = box_kernel(2);
  std::set<Offset> offsets(k.offsets().begin(), k.offsets().end());
  const auto maps = {
      +[](Offset o) { return Offset{o.dy, o.dx}; },   +[](Offset o) { return Offset{-o.dx, o.dy}; },
      +[](Offset o) { return Offset{o.dx, -o.dy}; },  +[](Offset o) { return Offset{-o.dy, o.dx}; },
      +[](Offset o) { return Offset{-o.dx, -o.dy}; }, +[](Offset o) { return Offset{o.dy, -o.dx}; },
      +[](Offset o) { return Offset{-o.dy, -o.dx}; },
  };
  for (auto m : maps) {
    std::set<Offset> image;
    for (const auto& o : offsets) image.insert(m(o));
    CHECK(image == offsets);
  }
}

TEST_CASE("kernel validation") {
  CHECK_THROWS_AS(DispersalKernel({{1, 0}, {0, 1}}, {0.5, 0.6}), ModelError);
  CHECK_THROWS_AS(DispersalKernel({{1, 0}, {1, 0}}, {0.5, 0.5}), ModelError);
  CHECK_THROWS_AS(DispersalKernel({{0, 0}, {1, 0}}, {0.5, 0.5}), ModelError);
  CHECK_THROWS_AS(DispersalKernel({{1, 0}}, {-1.0}), ModelError);
  CHECK_NOTHROW(DispersalKernel({{1, 0}, {0, 1}}, {0.25, 0.75}));
}

TEST_CASE("neighbor fractions") {
  const TorusGeometry g(5, 5);
  StateGrid grid(g, 3);
  const auto nn = nearest_neighbor_kernel();
  auto f = neighbor_fractions(grid, 12, nn);
  CHECK(f[0] == 1.0);
  CHECK(f[1] == 0.0);

  grid.set(g.site(3, 2), 1);
  grid.set(g.site(2, 3), 1);
  f = neighbor_fractions(grid, g.site(2, 2), nn);
  CHECK(f[1] == doctest::Approx(0.5));

  RandomStream rng(3, 0);
  for (SiteIndex s = 0; s < grid.size(); ++s) grid.set(s, static_cast<State>(rng.index(3)));
  for (const auto& kernel : {nn, box_kernel(1), box_kernel(2)}) {
    for (SiteIndex s = 0; s < grid.size(); ++s) {
      const auto fr = neighbor_fractions(grid, s, kernel);
      double sum = 0.0;
      for (double v : fr) {
        CHECK(v >= 0.0);
        sum += v;
      }
      CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("state grid keeps counts current") {
  StateGrid grid(TorusGeometry(3, 3), 4);
  CHECK(grid.count(0) == 9);
  grid.set(0, 3);
  grid.set(1, 2);
  grid.swap_sites(0, 4);
  CHECK(grid.count(0) == 7);
  CHECK(grid.count(3) == 1);
  CHECK(grid[4] == 3);
  CHECK_THROWS(grid.set(2, 4));
}

TEST_CASE("square fraction over the 5x5 square") {
  const TorusGeometry g(8, 8);
  CountGrid grid(g);
  const auto centre = g.site(4, 4);
  CHECK_FALSE(square_fraction(grid, centre).has_value());

  grid.set(centre, 10, 0);
  CHECK(*square_fraction(grid, centre) == 1.0);

  grid.set(centre, 0, 0);
  grid.set(g.site(2, 2), 2, 0);
  grid.set(g.site(6, 6), 1, 1);
  CHECK(*square_fraction(grid, centre) == doctest::Approx(0.75));
  // Just outside the square.
  grid.set(g.site(7, 4), 0, 5);
  CHECK(*square_fraction(grid, centre) == doctest::Approx(0.75));
  // Wraps around the torus edge.
  CHECK(square_fraction(grid, g.site(0, 0)).has_value());
}

TEST_CASE("count grid rejects negative counts and tracks totals") {
  CountGrid grid(TorusGeometry(3, 3));
  grid.set(0, 2, 1);
  grid.set(5, 0, 4);
  CHECK(grid.total_hawks() == 2);
  CHECK(grid.total_doves() == 5);
  CHECK(grid.max_population() == 4);
  grid.add_doves(5, -4);
  CHECK(grid.max_population() == 3);
  CHECK_THROWS(grid.add_hawks(1, -1));
}

TEST_CASE("random stream reproducibility") {
  RandomStream a(42, 3);
  RandomStream b(42, 3);
  bool same = true;
  for (int i = 0; i < 1'000'000; ++i) same = same && a.next_u64() == b.next_u64();
  CHECK(same);

  RandomStream c(42, 4);
  RandomStream d(43, 3);
  RandomStream e(42, 3);
  int equal_c = 0;
  int equal_d = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto x = e.next_u64();
    equal_c += x == c.next_u64();
    equal_d += x == d.next_u64();
  }
  CHECK(equal_c == 0);
  CHECK(equal_d == 0);
}

TEST_CASE("random stream draws") {
  RandomStream rng(1, 0);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / n - 0.5) < 3.0 * std::sqrt(1.0 / 12.0 / n) + 1e-9);

  std::array<int, 7> counts{};
  for (int i = 0; i < 70000; ++i) ++counts[rng.index(7)];
  for (int c : counts) CHECK(std::abs(c - 10000) < 500);

  double esum = 0.0;
  for (int i = 0; i < n; ++i) esum += rng.exponential(4.0);
  CHECK(std::abs(esum / n - 0.25) < 3.0 * 0.25 / std::sqrt(n));
}

TEST_CASE("random stream state round-trips") {
  RandomStream a(9, 1);
  for (int i = 0; i < 100; ++i) a.next_u64();
  RandomStream b(0, 0);
  b.restore(a.serialize());
  CHECK(a == b);
  CHECK(a.next_u64() == b.next_u64());
}
