#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ipsim/lattice.hpp"
#include "ipsim/random_stream.hpp"

namespace ipsim {

// One candidate transition with its actual rate. Pair transitions set
// `partner`; single-site transitions leave it at kNoSite.
struct Proposal {
  SiteIndex site = kNoSite;
  State to = 0;
  SiteIndex partner = kNoSite;
  State partner_to = 0;
  double rate = 0.0;
  int code = 0;
};

enum class SlotKind { Sites, Pairs };

// A family of events sharing a constant per-slot rate bound. Slots are
// either lattice sites or unordered nearest-neighbour pairs.
struct EventClass {
  std::string name;
  SlotKind slots = SlotKind::Sites;
  double bound = 0.0;
};

using ProposalList = std::vector<Proposal>;

// Models whose configuration is one small-integer state per site.
class SiteModel {
 public:
  virtual ~SiteModel() = default;

  virtual std::string_view name() const = 0;
  virtual std::size_t alphabet() const = 0;
  std::span<const EventClass> event_classes() const { return classes_; }

  // Appends every transition slot `slot` of class `cls` can make, with its
  // actual rate. Zero-rate entries may be present.
  virtual void proposals(const StateGrid& grid, std::size_t cls, std::size_t slot,
                         ProposalList& out) const = 0;

  // True when no transition can ever fire again from `grid`.
  virtual bool absorbed(const StateGrid& grid) const = 0;

  // Hook for r = infinity reactions, run after every accepted event.
  virtual void after_event(StateGrid& /*grid*/, const Proposal& /*event*/,
                           RandomStream& /*rng*/) const {}

  // Raises a class bound; a lower value than the declared bound is rejected.
  void raise_bound(std::size_t cls, double bound);

 protected:
  std::vector<EventClass> classes_;
};

struct CompetingContactParams {
  std::array<double, 2> beta{};
  std::array<double, 2> delta{};
};

// States 0 = vacant, 1, 2. Type i dies at delta_i; vacant x becomes i at
// beta_i * sum_y p_i(-y) [x+y = i]. Grass-bushes-trees additionally lets
// 2's be born onto 1's.
class CompetingContactModel : public SiteModel {
 public:
  CompetingContactModel(CompetingContactParams params, DispersalKernel kernel1,
                        DispersalKernel kernel2, bool hierarchical = false);

  std::string_view name() const override {
    return hierarchical_ ? "grass-bushes-trees" : "competing-contact";
  }
  std::size_t alphabet() const override { return 3; }
  void site_rates(const StateGrid& grid, SiteIndex site, ProposalList& out) const;
  void proposals(const StateGrid& grid, std::size_t cls, std::size_t slot,
                 ProposalList& out) const override;
  bool absorbed(const StateGrid& grid) const override;

  const CompetingContactParams& params() const { return params_; }

 private:
  double birth_pressure(const StateGrid& grid, SiteIndex site, int type) const;

  CompetingContactParams params_;
  std::array<DispersalKernel, 2> kernels_;
  bool hierarchical_;
};

struct HostPathogenParams {
  double alpha = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double gamma3 = 0.0;
};

// Codes 0, 1, 2 hold types 1 (healthy host), 2 (infected host), 3 (competitor).
class HostPathogenModel : public SiteModel {
 public:
  HostPathogenModel(HostPathogenParams params, DispersalKernel kernel);
  std::string_view name() const override { return "host-pathogen"; }
  std::size_t alphabet() const override { return 3; }
  void site_rates(const StateGrid& grid, SiteIndex site, ProposalList& out) const;
  void proposals(const StateGrid& grid, std::size_t cls, std::size_t slot,
                 ProposalList& out) const override;
  bool absorbed(const StateGrid& grid) const override;

 private:
  HostPathogenParams params_;
  DispersalKernel kernel_;
};

// 1 -> 0 at rate 1; 0 -> 1 at beta k(k-1)/(n(n-1)) with k of n neighbours occupied.
class SexualReproductionModel : public SiteModel {
 public:
  SexualReproductionModel(double beta, DispersalKernel kernel);
  std::string_view name() const override { return "sexual"; }
  std::size_t alphabet() const override { return 2; }
  void site_rates(const StateGrid& grid, SiteIndex site, ProposalList& out) const;
  void proposals(const StateGrid& grid, std::size_t cls, std::size_t slot,
                 ProposalList& out) const override;
  bool absorbed(const StateGrid& grid) const override;
  double beta() const { return beta_; }

 private:
  double beta_;
  DispersalKernel kernel_;
};

struct CatalystParams {
  double p = 0.0;
  double q = 0.0;
  double r = std::numeric_limits<double>::infinity();
  // Put the q/4 clock on ordered pairs (doubling the O2 flux).
  bool ordered_pairs = false;
};

// States 0 = vacant, 1 = CO, 2 = O. Classes: CO deposition per site, O2
// deposition per unordered vacant pair, and (finite r only) reaction per
// unordered adjacent CO-O pair.
class CatalystModel : public SiteModel {
 public:
  explicit CatalystModel(CatalystParams params);
  std::string_view name() const override { return "catalyst"; }
  std::size_t alphabet() const override { return 3; }
  void site_rates(const StateGrid& grid, SiteIndex site, ProposalList& out) const;
  void pair_rates(const StateGrid& grid, std::size_t pair, ProposalList& out) const;
  void proposals(const StateGrid& grid, std::size_t cls, std::size_t slot,
                 ProposalList& out) const override;
  bool absorbed(const StateGrid& grid) const override;
  void after_event(StateGrid& grid, const Proposal& event, RandomStream& rng) const override;
  const CatalystParams& params() const { return params_; }

  static constexpr int kDepositCO = 1;
  static constexpr int kDepositO2 = 2;
  static constexpr int kReact = 3;

 private:
  CatalystParams params_;
};

// With r = infinity: if the particle just placed at `site` has a nearest
// neighbour of the opposite kind, one such neighbour is chosen uniformly and
// both sites are emptied. Returns true when a reaction happened.
bool instantaneous_reaction(StateGrid& grid, SiteIndex site, RandomStream& rng);

struct ColicinParams {
  double beta1 = 0.0;
  double beta2 = 0.0;
  double delta1 = 1.0;
  double delta2 = 1.0;
  double gamma = 0.0;
};

// 0 -> i at beta_i f_i; 1 -> 0 at delta_1; 2 -> 0 at delta_2 + gamma f_1.
class ColicinModel : public SiteModel {
 public:
  ColicinModel(ColicinParams params, DispersalKernel kernel);
  std::string_view name() const override { return "colicin2"; }
  std::size_t alphabet() const override { return 3; }
  void site_rates(const StateGrid& grid, SiteIndex site, ProposalList& out) const;
  void proposals(const StateGrid& grid, std::size_t cls, std::size_t slot,
                 ProposalList& out) const override;
  bool absorbed(const StateGrid& grid) const override;

 private:
  ColicinParams params_;
  DispersalKernel kernel_;
};

struct Colicin3Params {
  std::array<double, 3> beta{};
  std::array<double, 3> delta{1.0, 1.0, 1.0};
  double gamma1 = 0.0;
  double gamma2 = 0.0;
};

// 0 -> i at beta_i f_i; 3 -> 0 at delta_3 + gamma_1 f_1 + gamma_2 f_2.
class Colicin3Model : public SiteModel {
 public:
  Colicin3Model(Colicin3Params params, DispersalKernel kernel);
  std::string_view name() const override { return "colicin3"; }
  std::size_t alphabet() const override { return 4; }
  void site_rates(const StateGrid& grid, SiteIndex site, ProposalList& out) const;
  void proposals(const StateGrid& grid, std::size_t cls, std::size_t slot,
                 ProposalList& out) const override;
  bool absorbed(const StateGrid& grid) const override;

 private:
  Colicin3Params params_;
  DispersalKernel kernel_;
};

// k x k invasion matrix, row-major; entry (i, j) is the rate at which type i
// eats type j. Types are stored as codes 0..k-1.
class InvasionMatrix {
 public:
  InvasionMatrix(std::size_t types, std::vector<double> entries);
  static InvasionMatrix cyclic(double beta1, double beta2, double beta3);
  static InvasionMatrix silvertown();

  std::size_t types() const { return types_; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * types_ + j]; }
  std::span<const double> entries() const { return entries_; }
  InvasionMatrix scaled(double factor) const;

 private:
  std::size_t types_;
  std::vector<double> entries_;
};

// A site of type j flips to type i at rate f_i * lambda(i, j).
class MultitypeVoterModel : public SiteModel {
 public:
  MultitypeVoterModel(InvasionMatrix lambda, DispersalKernel kernel);
  std::string_view name() const override { return "voter"; }
  std::size_t alphabet() const override { return lambda_.types(); }
  void site_rates(const StateGrid& grid, SiteIndex site, ProposalList& out) const;
  void proposals(const StateGrid& grid, std::size_t cls, std::size_t slot,
                 ProposalList& out) const override;
  bool absorbed(const StateGrid& grid) const override;
  const InvasionMatrix& lambda() const { return lambda_; }

 private:
  InvasionMatrix lambda_;
  DispersalKernel kernel_;
};

struct PrisonersDilemmaParams {
  double nu = 1.0;
  double kappa = 0.1;
  double a = -0.6;
  double b = 0.9;
  double c = -0.9;
  double d = 0.7;
};

enum class CountEventKind { HawkMigrate, DoveMigrate, HawkDeath, DoveDeath, HawkBirth, DoveBirth };

struct CountProposal {
  CountEventKind kind = CountEventKind::HawkDeath;
  SiteIndex site = kNoSite;
  SiteIndex destination = kNoSite;
  double rate = 0.0;
};

// Hawks and doves with per-site counts: migration, crowding death and a
// game step driven by the hawk fraction in the surrounding 5x5 square.
class PrisonersDilemmaModel {
 public:
  explicit PrisonersDilemmaModel(PrisonersDilemmaParams params);
  std::string_view name() const { return "prisoners-dilemma"; }
  const PrisonersDilemmaParams& params() const { return params_; }

  // Per-capita game rates; negative means a death rate of that magnitude.
  double hawk_game_rate(std::optional<double> hawk_fraction) const;
  double dove_game_rate(std::optional<double> hawk_fraction) const;

  void site_rates(const CountGrid& grid, SiteIndex site, std::vector<CountProposal>& out) const;
  // Rate bound per individual at a site holding `population` individuals.
  double individual_bound(std::uint32_t population) const;

 private:
  PrisonersDilemmaParams params_;
};

// Raw `key = value` model parameters as read from a config section.
using ParamMap = std::map<std::string, std::string>;

// Canonical model names accepted by make_site_model / make_count_model.
std::span<const std::string_view> model_names();
bool is_count_model(std::string_view name);

// Builds a registry model; unknown names and unknown or malformed
// parameters raise ModelError.
std::unique_ptr<SiteModel> make_site_model(std::string_view name, const ParamMap& params);
PrisonersDilemmaModel make_count_model(std::string_view name, const ParamMap& params);

}  // namespace ipsim
