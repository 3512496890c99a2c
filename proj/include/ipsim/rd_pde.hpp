#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "ipsim/errors.hpp"

namespace ipsim::pde {

// g(u) = u(-1 + beta u (1 - u)).
struct SexualReaction {
  double beta;
};
// Catalyst reaction terms: p(1-u1-u2) - r u1 u2, q(1-u1-u2)^2 - r u1 u2.
struct CatalystReaction {
  double p, q, r;
};
// No reaction; used for diffusion-only checks.
struct NoReaction {
  std::size_t components = 1;
};

using Reaction = std::variant<SexualReaction, CatalystReaction, NoReaction>;

std::size_t components(const Reaction& reaction);

// Pointwise reaction term; `u` and `out` hold components(reaction) values.
void react(const Reaction& reaction, const double* u, double* out);

struct PdeState {
  std::size_t cells = 0;
  std::size_t comps = 1;
  double dx = 0.1;
  double dt = 0.004;
  double time = 0.0;
  // Cell-major: values[i * comps + c].
  std::vector<double> values;

  double at(std::size_t cell, std::size_t comp = 0) const { return values[cell * comps + comp]; }
  double& at(std::size_t cell, std::size_t comp = 0) { return values[cell * comps + comp]; }
  double x(std::size_t cell) const { return static_cast<double>(cell) * dx; }
};

PdeState make_state(std::size_t cells, std::size_t comps, double dx, double dt);

// Left half `left`, right half `right`.
PdeState step_profile(std::size_t cells, double dx, double dt, const std::vector<double>& left,
                      const std::vector<double>& right);

// Throws ModelError unless dt <= dx^2 / (2 comps) and the state is finite.
void check_stability(const PdeState& state);

// Forward Euler with the 3-point Laplacian and zero-flux ends, from
// state.time to state.time + T. The last step is shortened to land on T.
void integrate_pde(const Reaction& reaction, PdeState& state, double T);

// Larger root of -1 + beta u (1 - u); requires beta > 4.
double rho2(double beta);
double rho1(double beta);

// Integral of g over [0, rho2] from the exact antiderivative.
double speed_integral(double beta);

// -1, 0 or +1; |integral| <= 1e-12 counts as 0.
int speed_sign(double beta);

// Speed of the cubic front from rho2 (left) to 0 (right).
double analytic_sexual_speed(double beta);

struct WaveSpeedEstimate {
  double speed = 0.0;
  double residual = 0.0;
  double level = 0.0;
  double window_start = 0.0;
  double window_end = 0.0;
  bool valid = false;
  std::vector<double> times;
  std::vector<double> positions;
};

struct FrontSetup {
  std::size_t cells = 2000;
  double dx = 0.1;
  double dt = 0.004;
  double horizon = 100.0;
  double sample_every = 1.0;
};

// Position where component 0 first crosses `level` going left to right,
// by linear interpolation; negative when there is no crossing.
double front_position(const PdeState& state, double level);

// Integrates from a step profile (rho2 | 0 for the sexual reaction,
// (alpha, beta) | (1, 0) for the catalyst) and fits position against time
// over the second half of the run. Positive speed means the left state
// advances.
WaveSpeedEstimate estimate_front_speed(const Reaction& reaction, const FrontSetup& setup);
WaveSpeedEstimate estimate_front_speed(const Reaction& reaction, PdeState initial, double level,
                                       const FrontSetup& setup);

struct CriticalBeta {
  double beta = 0.0;
  double tolerance = 0.0;
  int probes = 0;
};

// Bisection on the sign of the numeric sexual front speed.
CriticalBeta critical_beta(double lo, double hi, double tol, const FrontSetup& setup = {});

struct CatalystFixedPoints {
  std::vector<std::array<double, 2>> points;
  bool interior = false;
  double alpha = 0.0;
  double beta = 0.0;
};

// (1,0) and (0,1), plus (alpha, beta) and (beta, alpha) from the closed form
// when p < q and the discriminant is non-negative.
CatalystFixedPoints catalyst_fixed_points(double p, double q, double r);

// CSV with header x,u_1..u_m.
std::string profile_csv(const PdeState& state);

}  // namespace ipsim::pde
