#include <doctest.h>

#include <cmath>
#include <functional>

#include "ipsim/engine.hpp"
#include "ipsim/errors.hpp"
#include "ipsim/models.hpp"

using namespace ipsim;

namespace {

const TorusGeometry kGeo(5, 5);
const SiteIndex kCentre = kGeo.site(2, 2);

// Centre site in `centre`, its four neighbours (+x, -x, +y, -y) as given.
StateGrid around(std::size_t alphabet, State centre, std::array<State, 4> nb) {
  StateGrid grid(kGeo, alphabet);
  grid.set(kCentre, centre);
  const auto nn = kGeo.nearest(kCentre);
  for (int k = 0; k < 4; ++k) grid.set(nn[k], nb[k]);
  return grid;
}

double rate_to(const ProposalList& props, State to) {
  double r = 0.0;
  for (const auto& p : props) r += p.to == to ? p.rate : 0.0;
  return r;
}

double total(const ProposalList& props) {
  double r = 0.0;
  for (const auto& p : props) r += p.rate;
  return r;
}

ProposalList site_props(const SiteModel& model, const StateGrid& grid, SiteIndex site) {
  ProposalList out;
  model.proposals(grid, 0, site, out);
  return out;
}

}  // namespace

TEST_CASE("competing contact rates") {
  const CompetingContactModel m({{4.0, 3.9}, {2.0, 1.0}}, nearest_neighbor_kernel(),
                                nearest_neighbor_kernel());
  auto props = site_props(m, around(3, 1, {0, 0, 0, 0}), kCentre);
  CHECK(rate_to(props, 0) == 2.0);

  props = site_props(m, around(3, 0, {1, 0, 0, 0}), kCentre);
  CHECK(rate_to(props, 1) == doctest::Approx(1.0));
  CHECK(rate_to(props, 2) == 0.0);

  props = site_props(m, around(3, 0, {0, 0, 0, 0}), kCentre);
  CHECK(total(props) == 0.0);
}

TEST_CASE("grass-bushes-trees hierarchy") {
  const CompetingContactModel m({{2.0, 4.0}, {1.0, 1.0}}, nearest_neighbor_kernel(),
                                nearest_neighbor_kernel(), true);
  // 2 born onto a 1.
  auto props = site_props(m, around(3, 1, {2, 2, 0, 0}), kCentre);
  CHECK(rate_to(props, 2) == doctest::Approx(2.0));
  // 1 cannot be born onto a 2.
  props = site_props(m, around(3, 2, {1, 1, 1, 1}), kCentre);
  CHECK(rate_to(props, 1) == 0.0);
  CHECK(rate_to(props, 0) == 1.0);
  // 1 born onto a 0.
  props = site_props(m, around(3, 0, {1, 0, 0, 0}), kCentre);
  CHECK(rate_to(props, 1) == doctest::Approx(0.5));
}

TEST_CASE("host-pathogen rates") {
  const HostPathogenModel m({1.0, 1.0, 2.0, 1.4}, nearest_neighbor_kernel());
  // Codes 0, 1, 2 are types 1, 2, 3.
  auto props = site_props(m, around(3, 1, {0, 0, 1, 2}), kCentre);
  CHECK(rate_to(props, 0) == doctest::Approx(1.5));
  CHECK(rate_to(props, 2) == doctest::Approx(0.5));

  props = site_props(m, around(3, 0, {0, 0, 0, 2}), kCentre);
  CHECK(rate_to(props, 1) == 0.0);

  props = site_props(m, around(3, 2, {0, 1, 0, 1}), kCentre);
  CHECK(rate_to(props, 0) == doctest::Approx(1.4));
}

TEST_CASE("sexual reproduction rates") {
  const SexualReproductionModel m(4.5, nearest_neighbor_kernel());
  CHECK(rate_to(site_props(m, around(2, 0, {1, 1, 0, 0}), kCentre), 1) == doctest::Approx(0.75));
  CHECK(rate_to(site_props(m, around(2, 0, {1, 0, 0, 0}), kCentre), 1) == 0.0);
  CHECK(rate_to(site_props(m, around(2, 0, {1, 1, 1, 1}), kCentre), 1) == doctest::Approx(4.5));
  CHECK(rate_to(site_props(m, around(2, 1, {1, 1, 1, 1}), kCentre), 0) == 1.0);
}

TEST_CASE("catalyst rates") {
  const CatalystModel m({0.45, 1.1, 2.0});
  CHECK(rate_to(site_props(m, around(3, 0, {1, 1, 1, 1}), kCentre), 1) == doctest::Approx(0.45));

  StateGrid grid = around(3, 1, {2, 1, 1, 1});
  const auto& g = grid.geometry();
  for (std::size_t k = 0; k < g.pair_count(); ++k) {
    const auto [a, b] = g.pair(k);
    ProposalList out;
    m.pair_rates(grid, k, out);
    const bool co_o = (grid[a] == 1 && grid[b] == 2) || (grid[a] == 2 && grid[b] == 1);
    if (co_o) {
      REQUIRE(out.size() == 1);
      CHECK(out[0].rate == doctest::Approx(0.5));
    }
  }

  // Isolated vacant centre: no O2 pair involves it.
  grid = around(3, 0, {1, 1, 1, 1});
  for (std::size_t k = 0; k < g.pair_count(); ++k) {
    const auto [a, b] = g.pair(k);
    if (a != kCentre && b != kCentre) continue;
    ProposalList out;
    m.pair_rates(grid, k, out);
    CHECK(out.empty());
  }
  CHECK(m.event_classes()[1].bound == doctest::Approx(1.1 / 4.0));
  CatalystParams ordered{0.45, 1.1, 2.0, true};
  CHECK(CatalystModel(ordered).event_classes()[1].bound == doctest::Approx(1.1 / 2.0));
}

TEST_CASE("colicin rates") {
  const ColicinModel m({3.0, 4.0, 1.0, 1.0, 2.5}, nearest_neighbor_kernel());
  CHECK(rate_to(site_props(m, around(3, 2, {1, 1, 0, 0}), kCentre), 0) == doctest::Approx(2.25));
  CHECK(rate_to(site_props(m, around(3, 2, {0, 2, 0, 0}), kCentre), 0) == doctest::Approx(1.0));
  CHECK(total(site_props(m, around(3, 0, {0, 0, 0, 0}), kCentre)) == 0.0);

  Colicin3Params p3;
  p3.beta = {3.0, 3.2, 4.0};
  p3.gamma1 = 3.0;
  p3.gamma2 = 0.5;
  const Colicin3Model m3(p3, nearest_neighbor_kernel());
  CHECK(rate_to(site_props(m3, around(4, 3, {1, 2, 0, 0}), kCentre), 0) == doctest::Approx(1.875));
  CHECK(rate_to(site_props(m3, around(4, 3, {0, 0, 3, 3}), kCentre), 0) == doctest::Approx(1.0));
  CHECK(rate_to(site_props(m3, around(4, 0, {3, 3, 0, 0}), kCentre), 3) == doctest::Approx(2.0));
}

TEST_CASE("multitype voter rates") {
  const MultitypeVoterModel cyc(InvasionMatrix::cyclic(0.3, 0.7, 1.0), nearest_neighbor_kernel());
  // Type 3 (code 2) with half its neighbours type 1 (code 0).
  CHECK(rate_to(site_props(cyc, around(3, 2, {0, 0, 2, 2}), kCentre), 0) == doctest::Approx(0.15));
  CHECK(total(site_props(cyc, around(3, 1, {1, 1, 1, 1}), kCentre)) == 0.0);

  // "i eats j": type 2 surrounded by type 1 flips at lambda_12.
  const MultitypeVoterModel silv(InvasionMatrix::silvertown(), nearest_neighbor_kernel());
  CHECK(rate_to(site_props(silv, around(5, 1, {0, 0, 0, 0}), kCentre), 0) == doctest::Approx(0.09));
  CHECK(InvasionMatrix::silvertown()(1, 0) == 0.08);

  CHECK_THROWS_AS(InvasionMatrix(2, {0.0, -1.0, 1.0, 0.0}), ModelError);
  CHECK_THROWS_AS(InvasionMatrix(2, {1.0, 1.0, 1.0, 0.0}), ModelError);
}

TEST_CASE("prisoner's dilemma rates") {
  const PrisonersDilemmaModel m(PrisonersDilemmaParams{});
  CHECK(m.hawk_game_rate(1.0) == doctest::Approx(-0.6));
  CHECK(m.dove_game_rate(0.0) == doctest::Approx(0.7));
  CHECK(m.hawk_game_rate(std::nullopt) == 0.0);

  const TorusGeometry g(8, 8);
  CountGrid grid(g);
  grid.set(g.site(4, 4), 3, 2);
  std::vector<CountProposal> out;
  m.site_rates(grid, g.site(4, 4), out);
  double hawk_death = 0.0;
  double hawk_birth = 0.0;
  for (const auto& p : out) {
    if (p.kind == CountEventKind::HawkDeath) hawk_death += p.rate;
    if (p.kind == CountEventKind::HawkBirth) hawk_birth += p.rate;
  }
  // Crowding 0.1 * 5 per individual; the game rate at p = 0.6 is -0.36 + 0.36 = 0.
  CHECK(hawk_death == doctest::Approx(0.5 * 3));
  CHECK(hawk_birth == doctest::Approx(0.0).epsilon(1e-12));

  CountGrid hawks(g);
  hawks.set(g.site(1, 1), 2, 0);
  out.clear();
  m.site_rates(hawks, g.site(1, 1), out);
  double death = 0.0;
  for (const auto& p : out) death += p.kind == CountEventKind::HawkDeath ? p.rate : 0.0;
  CHECK(death == doctest::Approx(2 * (0.1 * 2 + 0.6)));
}

TEST_CASE("rate-bound audit and null-event closure") {
  const std::vector<std::pair<std::string, ParamMap>> specs = {
      {"competing-contact", {{"beta1", "3.9"}, {"beta2", "2"}, {"delta1", "2"}, {"range", "1"}}},
      {"grass-bushes-trees", {{"beta1", "5"}, {"beta2", "2"}}},
      {"host-pathogen", {{"alpha", "3"}, {"gamma1", "1"}, {"gamma2", "2"}, {"gamma3", "1.4"}}},
      {"sexual", {{"beta", "4.5"}}},
      {"catalyst", {{"p", "0.45"}, {"r", "3"}}},
      {"catalyst", {{"p", "0.45"}}},
      {"colicin2", {{"beta1", "3"}, {"beta2", "4"}, {"gamma", "2.5"}}},
      {"colicin3",
       {{"beta1", "3"}, {"beta2", "3.2"}, {"beta3", "4"}, {"gamma1", "3"}, {"gamma2", "0.5"}}},
      {"voter", {{"matrix", "cyclic"}, {"beta1", "0.3"}, {"beta2", "0.7"}, {"beta3", "1"}}},
      {"voter", {{"matrix", "silvertown"}, {"range", "2"}}},
  };
  const TorusGeometry g(6, 6);
  RandomStream rng(17, 0);
  for (const auto& [name, params] : specs) {
    CAPTURE(name);
    const auto model = make_site_model(name, params);
    const auto classes = model->event_classes();
    StateGrid grid(g, model->alphabet());
    int violations = 0;
    for (int trial = 0; trial < 10000; ++trial) {
      for (SiteIndex s = 0; s < grid.size(); ++s) {
        grid.set(s, static_cast<State>(rng.index(model->alphabet())));
      }
      const std::size_t cls = rng.index(classes.size());
      const std::size_t slots = classes[cls].slots == SlotKind::Sites ? g.size() : g.pair_count();
      ProposalList props;
      model->proposals(grid, cls, rng.index(slots), props);
      double sum = 0.0;
      for (const auto& p : props) {
        REQUIRE(p.rate >= 0.0);
        sum += p.rate;
        StateGrid copy = grid;
        REQUIRE_NOTHROW(copy.set(p.site, p.to));
        if (p.partner != kNoSite) REQUIRE_NOTHROW(copy.set(p.partner, p.partner_to));
        model->after_event(copy, p, rng);
      }
      violations += sum > classes[cls].bound * (1.0 + 1e-12);
    }
    CHECK(violations == 0);
  }

  const PrisonersDilemmaModel pd(PrisonersDilemmaParams{});
  CountGrid counts(g);
  int violations = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    for (SiteIndex s = 0; s < counts.size(); ++s) {
      counts.set(s, static_cast<std::uint32_t>(rng.index(6)), static_cast<std::uint32_t>(rng.index(6)));
    }
    const SiteIndex site = rng.index(counts.size());
    std::vector<CountProposal> out;
    pd.site_rates(counts, site, out);
    double sum = 0.0;
    for (const auto& p : out) {
      REQUIRE(p.rate >= 0.0);
      sum += p.rate;
      CountGrid copy = counts;
      if (p.rate > 0.0) REQUIRE_NOTHROW(apply(copy, p));
    }
    const auto cap = counts.max_population();
    violations += sum > cap * pd.individual_bound(cap) * (1.0 + 1e-12);
  }
  CHECK(violations == 0);
}

TEST_CASE("registry") {
  for (auto name : model_names()) {
    CHECK(is_count_model(name) == (name == "prisoners-dilemma"));
  }
  CHECK_THROWS_AS(make_site_model("forest-fire", {}), ModelError);
  CHECK_THROWS_AS(make_site_model("sexual", {{"beta", "4"}, {"gamma", "1"}}), ModelError);
  CHECK_THROWS_AS(make_site_model("sexual", {}), ModelError);
  CHECK_THROWS_AS(make_site_model("sexual", {{"beta", "-1"}}), ModelError);
  CHECK_THROWS_AS(make_site_model("prisoners-dilemma", {}), ModelError);
  CHECK(make_count_model("prisoners-dilemma", {}).params().kappa == 0.1);
  CHECK(make_site_model("catalyst", {{"p", "0.4"}})->event_classes().size() == 2);
}

TEST_CASE("grass-bushes-trees 2's are a contact process") {
  const double b1 = 3.0, b2 = 2.5, d1 = 1.0, d2 = 1.0;
  const CompetingContactModel gbt({{b1, b2}, {d1, d2}}, nearest_neighbor_kernel(),
                                  nearest_neighbor_kernel(), true);
  CompetingContactModel single({{0.0, b2}, {d1, d2}}, nearest_neighbor_kernel(),
                               nearest_neighbor_kernel());
  single.raise_bound(0, gbt.event_classes()[0].bound);
  CHECK_THROWS_AS(single.raise_bound(0, 0.5), ModelError);

  const TorusGeometry g(20, 20);
  Engine e1(gbt, g);
  Engine e2(single, g);
  RandomStream init(21, 0);
  StateGrid a(g, 3);
  StateGrid b(g, 3);
  for (SiteIndex s = 0; s < a.size(); ++s) {
    const auto v = static_cast<State>(init.index(3));
    a.set(s, v);
    b.set(s, v == 2 ? 2 : 0);
  }
  RandomStream r1(22, 0);
  RandomStream r2(22, 0);
  SimClock c1;
  SimClock c2;
  bool identical = true;
  int steps = 0;
  for (; steps < 200000; ++steps) {
    const auto s1 = e1.step(a, c1, r1);
    const auto s2 = e2.step(b, c2, r2);
    if (s1.outcome == StepOutcome::Absorbed || s2.outcome == StepOutcome::Absorbed) break;
    if (c1.time != c2.time || a.count(2) != b.count(2)) {
      identical = false;
      break;
    }
  }
  for (SiteIndex s = 0; s < a.size(); ++s) identical = identical && ((a[s] == 2) == (b[s] == 2));
  CHECK(identical);
  CHECK(steps > 1000);
}

TEST_CASE("symmetric voter has no drift") {
  const MultitypeVoterModel m(InvasionMatrix(3, {0.0, 0.5, 1.0, 0.5, 0.0, 0.2, 1.0, 0.2, 0.0}),
                              nearest_neighbor_kernel());
  const TorusGeometry g(60, 60);
  Engine engine(m, g);
  StateGrid grid(g, 3);
  RandomStream rng(31, 0);
  for (SiteIndex s = 0; s < grid.size(); ++s) grid.set(s, static_cast<State>(rng.index(3)));
  SimClock clock;
  std::array<double, 3> sum{};
  std::array<double, 3> sum2{};
  std::size_t events = 0;
  while (events < 100000) {
    std::array<long, 3> before{};
    for (State k = 0; k < 3; ++k) before[k] = static_cast<long>(grid.count(k));
    const auto r = engine.step(grid, clock, rng);
    REQUIRE(r.outcome != StepOutcome::Absorbed);
    if (r.outcome != StepOutcome::Accepted) continue;
    ++events;
    for (State k = 0; k < 3; ++k) {
      const double dk = static_cast<double>(static_cast<long>(grid.count(k)) - before[k]);
      sum[k] += dk;
      sum2[k] += dk * dk;
    }
  }
  const double n = static_cast<double>(events);
  for (int k = 0; k < 3; ++k) {
    const double mean = sum[k] / n;
    const double se = std::sqrt((sum2[k] / n - mean * mean) / n);
    CHECK(std::abs(mean) < 3.0 * se);
  }
}
