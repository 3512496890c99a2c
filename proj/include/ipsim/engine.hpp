#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "ipsim/lattice.hpp"
#include "ipsim/models.hpp"
#include "ipsim/random_stream.hpp"

namespace ipsim {

struct SimClock {
  double time = 0.0;
  std::uint64_t events = 0;     // accepted transitions
  std::uint64_t proposals = 0;  // accepted + rejected
};

// Nearest-neighbour exchanges at rate epsilon^-2 per unordered pair.
struct StirringSpec {
  double epsilon = 1.0;
  double pair_rate() const { return 1.0 / (epsilon * epsilon); }
};

void validate(const StirringSpec& spec);
double stirring_total_rate(const StirringSpec& spec, const TorusGeometry& geometry);
// Swaps the two site states of unordered pair `pair`.
void apply_exchange(StateGrid& grid, std::size_t pair);

inline constexpr int kExchangeCode = -1;

enum class StepOutcome { Accepted, Rejected, Absorbed, Horizon };

struct StepResult {
  StepOutcome outcome = StepOutcome::Rejected;
  std::size_t event_class = 0;
  Proposal event;
};

// Thinning sampler for site models. Every event class contributes
// (slot count) x (per-slot bound) to a constant total rate; a proposal picks
// a class, then a slot uniformly, then accepts one of the slot's transitions
// with probability actual / bound.
class Engine {
 public:
  Engine(const SiteModel& model, const TorusGeometry& geometry,
         std::optional<StirringSpec> stirring = std::nullopt);

  // Advances the clock by one holding time at the total bound rate. When the
  // next proposal would land after `horizon`, the clock stops at `horizon`
  // and nothing is applied.
  StepResult step(StateGrid& grid, SimClock& clock, RandomStream& rng,
                  double horizon = std::numeric_limits<double>::infinity());

  double total_bound() const { return total_; }
  // Total bound of each class, stirring last when present.
  std::span<const double> class_totals() const { return class_totals_; }
  std::size_t class_count() const { return class_totals_.size(); }
  bool has_stirring() const { return stirring_.has_value(); }
  const SiteModel& model() const { return model_; }

 private:
  const SiteModel& model_;
  TorusGeometry geometry_;
  std::optional<StirringSpec> stirring_;
  std::vector<EventClass> classes_;
  std::vector<std::size_t> slots_;
  std::vector<double> class_totals_;
  double total_ = 0.0;
  ProposalList scratch_;
};

// Thinning sampler for the hawk/dove count model. The per-site bound scales
// with the current largest site population, so the total is recomputed after
// every event.
class CountEngine {
 public:
  explicit CountEngine(const PrisonersDilemmaModel& model) : model_(model) {}

  StepResult step(CountGrid& grid, SimClock& clock, RandomStream& rng,
                  double horizon = std::numeric_limits<double>::infinity());

  double total_bound(const CountGrid& grid) const;
  const PrisonersDilemmaModel& model() const { return model_; }

  // Last proposal considered by step(); for tests.
  const CountProposal& last_event() const { return last_; }

 private:
  const PrisonersDilemmaModel& model_;
  std::vector<CountProposal> scratch_;
  CountProposal last_;
};

void apply(CountGrid& grid, const CountProposal& event);

struct RunSummary {
  bool absorbed = false;
  std::uint64_t events = 0;
  std::uint64_t proposals = 0;
};

// Steps until the clock reaches `horizon` or the model is absorbed. Each
// sample time in [clock.time, horizon] is reported to `observe(t, grid)`
// exactly once, in order, with the configuration in force at that time;
// `next_sample` tracks progress through `sample_times` across calls.
template <class EngineT, class GridT, class Observer>
RunSummary run_until(EngineT& engine, GridT& grid, SimClock& clock, double horizon,
                     std::span<const double> sample_times, std::size_t& next_sample,
                     Observer&& observe, RandomStream& rng) {
  RunSummary summary;
  const auto flush = [&](double upto) {
    while (next_sample < sample_times.size() && sample_times[next_sample] <= upto) {
      observe(sample_times[next_sample], static_cast<const GridT&>(grid));
      ++next_sample;
    }
  };
  const std::uint64_t events0 = clock.events;
  const std::uint64_t proposals0 = clock.proposals;
  flush(clock.time);
  while (clock.time < horizon) {
    double target = horizon;
    if (next_sample < sample_times.size()) target = std::min(target, sample_times[next_sample]);
    const StepResult r = engine.step(grid, clock, rng, target);
    if (r.outcome == StepOutcome::Absorbed) {
      summary.absorbed = true;
      flush(horizon);
      break;
    }
    flush(clock.time);
  }
  summary.events = clock.events - events0;
  summary.proposals = clock.proposals - proposals0;
  return summary;
}

}  // namespace ipsim
