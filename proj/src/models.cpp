#include "ipsim/models.hpp"

#include <algorithm>
#include <cmath>

#include "ipsim/errors.hpp"
#include "param_reader.hpp"

namespace ipsim {

namespace {

void require_rate(double value, const char* what) {
  if (!(value >= 0.0) || std::isinf(value)) {
    throw ModelError(std::string(what) + " must be a finite non-negative rate");
  }
}

// Sum over kernel offsets z of p(z) [grid(x - z) = type]: the chance that an
// offspring landing on x came from a parent of `type`.
double incoming_fraction(const StateGrid& grid, SiteIndex site, const DispersalKernel& kernel,
                         State type) {
  const auto& geo = grid.geometry();
  const auto offsets = kernel.offsets();
  const auto probs = kernel.probabilities();
  double total = 0.0;
  for (std::size_t k = 0; k < offsets.size(); ++k) {
    if (grid[geo.shift(site, {-offsets[k].dx, -offsets[k].dy})] == type) total += probs[k];
  }
  return total;
}

bool single_state(const StateGrid& grid, State s) { return grid.count(s) == grid.size(); }

}  // namespace

void SiteModel::raise_bound(std::size_t cls, double bound) {
  if (cls >= classes_.size()) throw ModelError("no such event class");
  if (bound < classes_[cls].bound) throw ModelError("rate bound may only be raised");
  classes_[cls].bound = bound;
}

// ---------------------------------------------------------------------------
// Competing contact / grass-bushes-trees

CompetingContactModel::CompetingContactModel(CompetingContactParams params,
                                             DispersalKernel kernel1, DispersalKernel kernel2,
                                             bool hierarchical)
    : params_(params), kernels_{std::move(kernel1), std::move(kernel2)},
      hierarchical_(hierarchical) {
  for (int i = 0; i < 2; ++i) {
    require_rate(params_.beta[i], "beta");
    require_rate(params_.delta[i], "delta");
  }
  const double max_beta = std::max(params_.beta[0], params_.beta[1]);
  double bound = std::max({max_beta, params_.delta[0], params_.delta[1]});
  if (hierarchical_) bound = std::max(bound, params_.delta[0] + params_.beta[1]);
  classes_.push_back({"site", SlotKind::Sites, bound});
}

double CompetingContactModel::birth_pressure(const StateGrid& grid, SiteIndex site,
                                             int type) const {
  return params_.beta[type - 1] *
         incoming_fraction(grid, site, kernels_[type - 1], static_cast<State>(type));
}

void CompetingContactModel::site_rates(const StateGrid& grid, SiteIndex site,
                                       ProposalList& out) const {
  const State s = grid[site];
  if (s == 0) {
    // Type-2 births come first under the hierarchy so that the 2's see the
    // same uniform draws as a single-type contact process.
    if (hierarchical_) {
      out.push_back({site, 2, kNoSite, 0, birth_pressure(grid, site, 2), 3});
      out.push_back({site, 1, kNoSite, 0, birth_pressure(grid, site, 1), 2});
    } else {
      out.push_back({site, 1, kNoSite, 0, birth_pressure(grid, site, 1), 2});
      out.push_back({site, 2, kNoSite, 0, birth_pressure(grid, site, 2), 3});
    }
    return;
  }
  if (s == 1 && hierarchical_) {
    out.push_back({site, 2, kNoSite, 0, birth_pressure(grid, site, 2), 3});
  }
  out.push_back({site, 0, kNoSite, 0, params_.delta[s - 1], 1});
}

void CompetingContactModel::proposals(const StateGrid& grid, std::size_t, std::size_t slot,
                                      ProposalList& out) const {
  site_rates(grid, slot, out);
}

bool CompetingContactModel::absorbed(const StateGrid& grid) const {
  return single_state(grid, 0);
}

// ---------------------------------------------------------------------------
// Host-pathogen

HostPathogenModel::HostPathogenModel(HostPathogenParams params, DispersalKernel kernel)
    : params_(params), kernel_(std::move(kernel)) {
  require_rate(params_.alpha, "alpha");
  require_rate(params_.gamma1, "gamma1");
  require_rate(params_.gamma2, "gamma2");
  require_rate(params_.gamma3, "gamma3");
  classes_.push_back({"site", SlotKind::Sites,
                      std::max({params_.alpha, params_.gamma1, params_.gamma2, params_.gamma3})});
}

void HostPathogenModel::site_rates(const StateGrid& grid, SiteIndex site,
                                   ProposalList& out) const {
  const Fractions f = neighbor_fractions(grid, site, kernel_);
  switch (grid[site]) {
    case 0:  // healthy host
      out.push_back({site, 1, kNoSite, 0, params_.alpha * f[1], 12});
      out.push_back({site, 2, kNoSite, 0, params_.gamma1 * f[2], 13});
      break;
    case 1:  // infected host
      out.push_back({site, 0, kNoSite, 0, params_.gamma2 * (f[0] + f[1]), 21});
      out.push_back({site, 2, kNoSite, 0, params_.gamma2 * f[2], 23});
      break;
    default:  // competitor
      out.push_back({site, 0, kNoSite, 0, params_.gamma3 * (f[0] + f[1]), 31});
      break;
  }
}

void HostPathogenModel::proposals(const StateGrid& grid, std::size_t, std::size_t slot,
                                  ProposalList& out) const {
  site_rates(grid, slot, out);
}

bool HostPathogenModel::absorbed(const StateGrid& grid) const {
  return single_state(grid, 0) || single_state(grid, 2);
}

// ---------------------------------------------------------------------------
// Sexual reproduction

SexualReproductionModel::SexualReproductionModel(double beta, DispersalKernel kernel)
    : beta_(beta), kernel_(std::move(kernel)) {
  require_rate(beta_, "beta");
  if (kernel_.size() < 2) throw ModelError("sexual reproduction needs at least two neighbours");
  classes_.push_back({"site", SlotKind::Sites, std::max(1.0, beta_)});
}

void SexualReproductionModel::site_rates(const StateGrid& grid, SiteIndex site,
                                         ProposalList& out) const {
  if (grid[site] == 1) {
    out.push_back({site, 0, kNoSite, 0, 1.0, 1});
    return;
  }
  const auto& geo = grid.geometry();
  int k = 0;
  for (const auto& y : kernel_.offsets()) k += grid[geo.shift(site, y)] == 1;
  const double n = static_cast<double>(kernel_.size());
  out.push_back({site, 1, kNoSite, 0, beta_ * k * (k - 1) / (n * (n - 1.0)), 2});
}

void SexualReproductionModel::proposals(const StateGrid& grid, std::size_t, std::size_t slot,
                                        ProposalList& out) const {
  site_rates(grid, slot, out);
}

bool SexualReproductionModel::absorbed(const StateGrid& grid) const {
  return single_state(grid, 0);
}

// ---------------------------------------------------------------------------
// Catalyst

CatalystModel::CatalystModel(CatalystParams params) : params_(params) {
  require_rate(params_.p, "p");
  require_rate(params_.q, "q");
  if (!(params_.r >= 0.0)) throw ModelError("r must be non-negative (or inf)");
  classes_.push_back({"deposit-co", SlotKind::Sites, params_.p});
  classes_.push_back(
      {"deposit-o2", SlotKind::Pairs, params_.q / 4.0 * (params_.ordered_pairs ? 2.0 : 1.0)});
  if (std::isfinite(params_.r)) classes_.push_back({"react", SlotKind::Pairs, params_.r / 4.0});
}

void CatalystModel::site_rates(const StateGrid& grid, SiteIndex site, ProposalList& out) const {
  if (grid[site] == 0) out.push_back({site, 1, kNoSite, 0, params_.p, kDepositCO});
}

void CatalystModel::pair_rates(const StateGrid& grid, std::size_t pair, ProposalList& out) const {
  const auto [a, b] = grid.geometry().pair(pair);
  const State sa = grid[a];
  const State sb = grid[b];
  if (sa == 0 && sb == 0) {
    out.push_back({a, 2, b, 2, classes_[1].bound, kDepositO2});
  } else if (std::isfinite(params_.r) && sa + sb == 3 && sa != 0 && sb != 0) {
    out.push_back({a, 0, b, 0, params_.r / 4.0, kReact});
  }
}

void CatalystModel::proposals(const StateGrid& grid, std::size_t cls, std::size_t slot,
                              ProposalList& out) const {
  if (cls == 0) {
    site_rates(grid, slot, out);
    return;
  }
  const auto [a, b] = grid.geometry().pair(slot);
  const State sa = grid[a];
  const State sb = grid[b];
  if (cls == 1 && sa == 0 && sb == 0) {
    out.push_back({a, 2, b, 2, classes_[1].bound, kDepositO2});
  } else if (cls == 2 && sa + sb == 3 && sa != 0 && sb != 0) {
    out.push_back({a, 0, b, 0, classes_[2].bound, kReact});
  }
}

bool CatalystModel::absorbed(const StateGrid& grid) const {
  if (grid.count(0) != 0) return false;
  if (!std::isfinite(params_.r)) return true;
  const auto& geo = grid.geometry();
  for (std::size_t k = 0; k < geo.pair_count(); ++k) {
    const auto [a, b] = geo.pair(k);
    if (grid[a] + grid[b] == 3 && grid[a] != 0 && grid[b] != 0) return false;
  }
  return true;
}

void CatalystModel::after_event(StateGrid& grid, const Proposal& event, RandomStream& rng) const {
  if (std::isfinite(params_.r)) return;
  if (event.code == kDepositCO) {
    instantaneous_reaction(grid, event.site, rng);
  } else if (event.code == kDepositO2) {
    instantaneous_reaction(grid, event.site, rng);
    instantaneous_reaction(grid, event.partner, rng);
  }
}

bool instantaneous_reaction(StateGrid& grid, SiteIndex site, RandomStream& rng) {
  const State s = grid[site];
  if (s == 0) return false;
  const State opposite = s == 1 ? 2 : 1;
  std::array<SiteIndex, 4> candidates{};
  std::size_t n = 0;
  for (SiteIndex nb : grid.geometry().nearest(site)) {
    if (grid[nb] == opposite) candidates[n++] = nb;
  }
  if (n == 0) return false;
  const SiteIndex partner = candidates[n == 1 ? 0 : rng.index(n)];
  grid.set(site, 0);
  grid.set(partner, 0);
  return true;
}

// ---------------------------------------------------------------------------
// Colicin

ColicinModel::ColicinModel(ColicinParams params, DispersalKernel kernel)
    : params_(params), kernel_(std::move(kernel)) {
  require_rate(params_.beta1, "beta1");
  require_rate(params_.beta2, "beta2");
  require_rate(params_.delta1, "delta1");
  require_rate(params_.delta2, "delta2");
  require_rate(params_.gamma, "gamma");
  classes_.push_back({"site", SlotKind::Sites,
                      std::max({params_.beta1, params_.beta2, params_.delta1,
                                params_.delta2 + params_.gamma})});
}

void ColicinModel::site_rates(const StateGrid& grid, SiteIndex site, ProposalList& out) const {
  const Fractions f = neighbor_fractions(grid, site, kernel_);
  switch (grid[site]) {
    case 0:
      out.push_back({site, 1, kNoSite, 0, params_.beta1 * f[1], 1});
      out.push_back({site, 2, kNoSite, 0, params_.beta2 * f[2], 2});
      break;
    case 1:
      out.push_back({site, 0, kNoSite, 0, params_.delta1, 3});
      break;
    default:
      out.push_back({site, 0, kNoSite, 0, params_.delta2 + params_.gamma * f[1], 4});
      break;
  }
}

void ColicinModel::proposals(const StateGrid& grid, std::size_t, std::size_t slot,
                             ProposalList& out) const {
  site_rates(grid, slot, out);
}

bool ColicinModel::absorbed(const StateGrid& grid) const { return single_state(grid, 0); }

Colicin3Model::Colicin3Model(Colicin3Params params, DispersalKernel kernel)
    : params_(params), kernel_(std::move(kernel)) {
  for (int i = 0; i < 3; ++i) {
    require_rate(params_.beta[i], "beta");
    require_rate(params_.delta[i], "delta");
  }
  require_rate(params_.gamma1, "gamma1");
  require_rate(params_.gamma2, "gamma2");
  const double max_beta = *std::max_element(params_.beta.begin(), params_.beta.end());
  classes_.push_back({"site", SlotKind::Sites,
                      std::max({max_beta, params_.delta[0], params_.delta[1],
                                params_.delta[2] + params_.gamma1 + params_.gamma2})});
}

void Colicin3Model::site_rates(const StateGrid& grid, SiteIndex site, ProposalList& out) const {
  const Fractions f = neighbor_fractions(grid, site, kernel_);
  const State s = grid[site];
  if (s == 0) {
    for (State i = 1; i <= 3; ++i) {
      out.push_back({site, i, kNoSite, 0, params_.beta[i - 1] * f[i], i});
    }
  } else if (s == 3) {
    out.push_back({site, 0, kNoSite, 0,
                   params_.delta[2] + params_.gamma1 * f[1] + params_.gamma2 * f[2], 6});
  } else {
    out.push_back({site, 0, kNoSite, 0, params_.delta[s - 1], 3 + s});
  }
}

void Colicin3Model::proposals(const StateGrid& grid, std::size_t, std::size_t slot,
                              ProposalList& out) const {
  site_rates(grid, slot, out);
}

bool Colicin3Model::absorbed(const StateGrid& grid) const { return single_state(grid, 0); }

// ---------------------------------------------------------------------------
// Multitype biased voter

InvasionMatrix::InvasionMatrix(std::size_t types, std::vector<double> entries)
    : types_(types), entries_(std::move(entries)) {
  if (types < 2 || types > kMaxStates) throw ModelError("voter model needs 2..8 types");
  if (entries_.size() != types * types) throw ModelError("invasion matrix must be k x k");
  for (std::size_t i = 0; i < types; ++i) {
    for (std::size_t j = 0; j < types; ++j) {
      const double v = entries_[i * types + j];
      if (!(v >= 0.0) || std::isinf(v)) throw ModelError("invasion rates must be non-negative");
      if (i == j && v != 0.0) throw ModelError("invasion matrix must have a zero diagonal");
    }
  }
}

InvasionMatrix InvasionMatrix::cyclic(double beta1, double beta2, double beta3) {
  // 1 eats 3 at beta1, 2 eats 1 at beta2, 3 eats 2 at beta3.
  return InvasionMatrix(3, {0.0, 0.0, beta1,  //
                            beta2, 0.0, 0.0,  //
                            0.0, beta3, 0.0});
}

InvasionMatrix InvasionMatrix::silvertown() {
  return InvasionMatrix(5, {0.00, 0.09, 0.32, 0.23, 0.37,  //
                            0.08, 0.00, 0.16, 0.06, 0.09,  //
                            0.06, 0.06, 0.00, 0.44, 0.11,  //
                            0.02, 0.06, 0.05, 0.00, 0.03,  //
                            0.02, 0.03, 0.05, 0.03, 0.00});
}

InvasionMatrix InvasionMatrix::scaled(double factor) const {
  auto e = entries_;
  for (auto& v : e) v *= factor;
  return InvasionMatrix(types_, std::move(e));
}

MultitypeVoterModel::MultitypeVoterModel(InvasionMatrix lambda, DispersalKernel kernel)
    : lambda_(std::move(lambda)), kernel_(std::move(kernel)) {
  double bound = 0.0;
  for (std::size_t j = 0; j < lambda_.types(); ++j) {
    double column = 0.0;
    for (std::size_t i = 0; i < lambda_.types(); ++i) column += lambda_(i, j);
    bound = std::max(bound, column);
  }
  classes_.push_back({"site", SlotKind::Sites, bound});
}

void MultitypeVoterModel::site_rates(const StateGrid& grid, SiteIndex site,
                                     ProposalList& out) const {
  const Fractions f = neighbor_fractions(grid, site, kernel_);
  const State j = grid[site];
  for (State i = 0; i < lambda_.types(); ++i) {
    if (i == j || f[i] == 0.0) continue;
    const double rate = f[i] * lambda_(i, j);
    if (rate > 0.0) out.push_back({site, i, kNoSite, 0, rate, static_cast<int>(i)});
  }
}

void MultitypeVoterModel::proposals(const StateGrid& grid, std::size_t, std::size_t slot,
                                    ProposalList& out) const {
  site_rates(grid, slot, out);
}

bool MultitypeVoterModel::absorbed(const StateGrid& grid) const {
  for (State s = 0; s < lambda_.types(); ++s) {
    if (single_state(grid, s)) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Spatial Prisoner's Dilemma

PrisonersDilemmaModel::PrisonersDilemmaModel(PrisonersDilemmaParams params) : params_(params) {
  require_rate(params_.nu, "nu");
  require_rate(params_.kappa, "kappa");
  for (double v : {params_.a, params_.b, params_.c, params_.d}) {
    if (!std::isfinite(v)) throw ModelError("game matrix entries must be finite");
  }
}

double PrisonersDilemmaModel::hawk_game_rate(std::optional<double> p) const {
  if (!p) return 0.0;
  return params_.a * *p + params_.b * (1.0 - *p);
}

double PrisonersDilemmaModel::dove_game_rate(std::optional<double> p) const {
  if (!p) return 0.0;
  return params_.c * *p + params_.d * (1.0 - *p);
}

double PrisonersDilemmaModel::individual_bound(std::uint32_t population) const {
  const double game = std::max({std::abs(params_.a), std::abs(params_.b), std::abs(params_.c),
                                std::abs(params_.d)});
  return params_.nu + params_.kappa * population + game;
}

void PrisonersDilemmaModel::site_rates(const CountGrid& grid, SiteIndex site,
                                       std::vector<CountProposal>& out) const {
  const double hawks = grid.hawks(site);
  const double doves = grid.doves(site);
  if (hawks + doves == 0.0) return;
  for (SiteIndex nb : grid.geometry().nearest(site)) {
    out.push_back({CountEventKind::HawkMigrate, site, nb, params_.nu * hawks / 4.0});
    out.push_back({CountEventKind::DoveMigrate, site, nb, params_.nu * doves / 4.0});
  }
  const double crowding = params_.kappa * (hawks + doves);
  out.push_back({CountEventKind::HawkDeath, site, kNoSite, crowding * hawks});
  out.push_back({CountEventKind::DoveDeath, site, kNoSite, crowding * doves});
  const auto p = square_fraction(grid, site);
  const double gh = hawk_game_rate(p);
  const double gd = dove_game_rate(p);
  out.push_back({gh >= 0.0 ? CountEventKind::HawkBirth : CountEventKind::HawkDeath, site,
                 kNoSite, std::abs(gh) * hawks});
  out.push_back({gd >= 0.0 ? CountEventKind::DoveBirth : CountEventKind::DoveDeath, site,
                 kNoSite, std::abs(gd) * doves});
}

// ---------------------------------------------------------------------------
// Registry

namespace {

constexpr std::string_view kNames[] = {"competing-contact", "grass-bushes-trees", "host-pathogen",
                                       "sexual",            "catalyst",           "colicin2",
                                       "colicin3",          "voter",              "prisoners-dilemma"};

}  // namespace

namespace detail {

InvasionMatrix read_invasion_matrix(ParamReader& in) {
  const std::string matrix = in.text("matrix", "cyclic");
  if (matrix == "cyclic") {
    return InvasionMatrix::cyclic(in.number("beta1"), in.number("beta2"), in.number("beta3"));
  }
  if (matrix == "silvertown") return InvasionMatrix::silvertown();
  if (matrix == "explicit") {
    return InvasionMatrix(static_cast<std::size_t>(in.number("types")), in.list("lambda"));
  }
  throw ModelError("voter matrix must be cyclic, silvertown or explicit");
}

}  // namespace detail

std::span<const std::string_view> model_names() { return kNames; }

bool is_count_model(std::string_view name) { return name == "prisoners-dilemma"; }

std::unique_ptr<SiteModel> make_site_model(std::string_view name, const ParamMap& params) {
  detail::ParamReader in(params);
  std::unique_ptr<SiteModel> model;
  if (name == "competing-contact" || name == "grass-bushes-trees") {
    CompetingContactParams p;
    p.beta = {in.number("beta1"), in.number("beta2")};
    p.delta = {in.number("delta1", 1.0), in.number("delta2", 1.0)};
    const int range = static_cast<int>(in.number("range", 0));
    auto k1 = in.kernel("range1", range);
    auto k2 = in.kernel("range2", range);
    model = std::make_unique<CompetingContactModel>(p, std::move(k1), std::move(k2),
                                                    name == "grass-bushes-trees");
  } else if (name == "host-pathogen") {
    HostPathogenParams p{in.number("alpha"), in.number("gamma1"), in.number("gamma2"),
                         in.number("gamma3")};
    model = std::make_unique<HostPathogenModel>(p, in.kernel("range", 0));
  } else if (name == "sexual") {
    const double beta = in.number("beta");
    model = std::make_unique<SexualReproductionModel>(beta, in.kernel("range", 0));
  } else if (name == "catalyst") {
    CatalystParams p;
    p.p = in.number("p");
    p.q = in.number("q", 2.0 * (1.0 - p.p));
    p.r = in.number("r", std::numeric_limits<double>::infinity());
    p.ordered_pairs = in.number("ordered_pairs", 0.0) != 0.0;
    model = std::make_unique<CatalystModel>(p);
  } else if (name == "colicin2") {
    ColicinParams p{in.number("beta1"), in.number("beta2"), in.number("delta1", 1.0),
                    in.number("delta2", 1.0), in.number("gamma")};
    model = std::make_unique<ColicinModel>(p, in.kernel("range", 0));
  } else if (name == "colicin3") {
    Colicin3Params p;
    p.beta = {in.number("beta1"), in.number("beta2"), in.number("beta3")};
    p.delta = {in.number("delta1", 1.0), in.number("delta2", 1.0), in.number("delta3", 1.0)};
    p.gamma1 = in.number("gamma1");
    p.gamma2 = in.number("gamma2");
    model = std::make_unique<Colicin3Model>(p, in.kernel("range", 0));
  } else if (name == "voter") {
    auto lambda = detail::read_invasion_matrix(in);
    model = std::make_unique<MultitypeVoterModel>(std::move(lambda), in.kernel("range", 0));
  } else if (name == "prisoners-dilemma") {
    throw ModelError("prisoners-dilemma is a count model");
  } else {
    throw ModelError("unknown model '" + std::string(name) + "'");
  }
  in.finish();
  return model;
}

PrisonersDilemmaModel make_count_model(std::string_view name, const ParamMap& params) {
  if (name != "prisoners-dilemma") throw ModelError("unknown count model '" + std::string(name) + "'");
  detail::ParamReader in(params);
  PrisonersDilemmaParams p;
  p.nu = in.number("nu", p.nu);
  p.kappa = in.number("kappa", p.kappa);
  p.a = in.number("a", p.a);
  p.b = in.number("b", p.b);
  p.c = in.number("c", p.c);
  p.d = in.number("d", p.d);
  in.finish();
  return PrisonersDilemmaModel(p);
}

}  // namespace ipsim
