#include "ipsim/engine.hpp"

#include <cmath>

#include "ipsim/errors.hpp"

namespace ipsim {

void validate(const StirringSpec& spec) {
  if (!(spec.epsilon > 0.0) || std::isinf(spec.epsilon)) {
    throw ModelError("stirring epsilon must be positive and finite");
  }
}

double stirring_total_rate(const StirringSpec& spec, const TorusGeometry& geometry) {
  validate(spec);
  return spec.pair_rate() * static_cast<double>(geometry.pair_count());
}

void apply_exchange(StateGrid& grid, std::size_t pair) {
  const auto [a, b] = grid.geometry().pair(pair);
  grid.swap_sites(a, b);
}

Engine::Engine(const SiteModel& model, const TorusGeometry& geometry,
               std::optional<StirringSpec> stirring)
    : model_(model), geometry_(geometry), stirring_(stirring) {
  for (const auto& cls : model.event_classes()) classes_.push_back(cls);
  if (stirring_) {
    validate(*stirring_);
    classes_.push_back({"stirring", SlotKind::Pairs, stirring_->pair_rate()});
  }
  for (const auto& cls : classes_) {
    const std::size_t n = cls.slots == SlotKind::Sites ? geometry_.size() : geometry_.pair_count();
    slots_.push_back(n);
    class_totals_.push_back(cls.bound * static_cast<double>(n));
    total_ += class_totals_.back();
  }
  scratch_.reserve(16);
}

StepResult Engine::step(StateGrid& grid, SimClock& clock, RandomStream& rng, double horizon) {
  StepResult result;
  if (total_ <= 0.0 || model_.absorbed(grid)) {
    result.outcome = StepOutcome::Absorbed;
    return result;
  }
  const double next = clock.time + rng.exponential(total_);
  if (next > horizon) {
    clock.time = horizon;
    result.outcome = StepOutcome::Horizon;
    return result;
  }
  clock.time = next;
  ++clock.proposals;

  std::size_t cls = 0;
  if (classes_.size() > 1) {
    double u = rng.uniform() * total_;
    while (cls + 1 < classes_.size() && u >= class_totals_[cls]) u -= class_totals_[cls++];
  }
  result.event_class = cls;
  const std::size_t slot = slots_[cls] == 1 ? 0 : rng.index(slots_[cls]);
  const double bound = classes_[cls].bound;

  if (stirring_ && cls + 1 == classes_.size()) {
    // Exchanges always fire.
    const auto [a, b] = geometry_.pair(slot);
    result.event = {a, grid[b], b, grid[a], bound, kExchangeCode};
    grid.swap_sites(a, b);
    ++clock.events;
    result.outcome = StepOutcome::Accepted;
    return result;
  }

  scratch_.clear();
  model_.proposals(grid, cls, slot, scratch_);
  double u = rng.uniform() * bound;
  for (const auto& p : scratch_) {
    if (u < p.rate) {
      grid.set(p.site, p.to);
      if (p.partner != kNoSite) grid.set(p.partner, p.partner_to);
      model_.after_event(grid, p, rng);
      ++clock.events;
      result.event = p;
      result.outcome = StepOutcome::Accepted;
      return result;
    }
    u -= p.rate;
  }
  result.outcome = StepOutcome::Rejected;
  return result;
}

double CountEngine::total_bound(const CountGrid& grid) const {
  const std::uint32_t n = grid.max_population();
  return static_cast<double>(grid.size()) * n * model_.individual_bound(n);
}

void apply(CountGrid& grid, const CountProposal& e) {
  switch (e.kind) {
    case CountEventKind::HawkMigrate:
      grid.add_hawks(e.site, -1);
      grid.add_hawks(e.destination, 1);
      break;
    case CountEventKind::DoveMigrate:
      grid.add_doves(e.site, -1);
      grid.add_doves(e.destination, 1);
      break;
    case CountEventKind::HawkDeath:
      grid.add_hawks(e.site, -1);
      break;
    case CountEventKind::DoveDeath:
      grid.add_doves(e.site, -1);
      break;
    case CountEventKind::HawkBirth:
      grid.add_hawks(e.site, 1);
      break;
    case CountEventKind::DoveBirth:
      grid.add_doves(e.site, 1);
      break;
  }
}

StepResult CountEngine::step(CountGrid& grid, SimClock& clock, RandomStream& rng,
                             double horizon) {
  StepResult result;
  const double total = total_bound(grid);
  if (total <= 0.0) {
    result.outcome = StepOutcome::Absorbed;
    return result;
  }
  const double next = clock.time + rng.exponential(total);
  if (next > horizon) {
    clock.time = horizon;
    result.outcome = StepOutcome::Horizon;
    return result;
  }
  clock.time = next;
  ++clock.proposals;
  const SiteIndex site = rng.index(grid.size());
  const std::uint32_t cap = grid.max_population();
  const double bound = cap * model_.individual_bound(cap);
  scratch_.clear();
  model_.site_rates(grid, site, scratch_);
  double u = rng.uniform() * bound;
  for (const auto& p : scratch_) {
    if (u < p.rate) {
      apply(grid, p);
      last_ = p;
      ++clock.events;
      result.outcome = StepOutcome::Accepted;
      return result;
    }
    u -= p.rate;
  }
  result.outcome = StepOutcome::Rejected;
  return result;
}

}  // namespace ipsim
