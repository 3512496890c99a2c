#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "ipsim/errors.hpp"
#include "ipsim/models.hpp"

namespace ipsim::ode {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Competing contact: du_i/dt = beta_i u_i (1 - u_1 - u_2) - delta_i u_i.
struct CompetingContact {
  double beta1, beta2, delta1, delta2;
};
// Grass-bushes-trees hierarchy.
struct GrassBushesTrees {
  double beta1, beta2, delta1, delta2;
};
// Host-pathogen; the third component is transcribed as printed.
struct HostPathogen {
  double alpha, gamma1, gamma2, gamma3;
};
// Sexual reproduction: du/dt = -u + beta u^2 (1 - u).
struct Sexual {
  double beta;
};
// Catalyst reaction terms (no diffusion).
struct Catalyst {
  double p, q, r;
};
// Two-type colicin.
struct Colicin {
  double beta1, beta2, delta1, delta2, gamma;
};
// Three-type colicin.
struct Colicin3 {
  double beta1, beta2, beta3, delta1, delta2, delta3, gamma1, gamma2;
};
// Homogeneously mixed hawks (u) and doves (v).
struct HawkDove {
  double a, b, c, d, kappa;
};
// Multitype biased voter: du_i/dt = u_i sum_j (lambda_ij - lambda_ji) u_j.
struct Voter {
  InvasionMatrix lambda;
};

using Params = std::variant<CompetingContact, GrassBushesTrees, HostPathogen, Sexual, Catalyst,
                            Colicin, Colicin3, HawkDove, Voter>;

enum class RhsId { Eq1, Eq2, Eq4, Eq6, Eq8, Eq9, Eq10, Eq11, Voter };

// Where the state lives. Sub-simplex: u >= 0, sum u <= 1. Simplex: u >= 0,
// sum u = 1. Orthant: u >= 0, unbounded above.
enum class Domain { SubSimplex, Simplex, UnitInterval, Orthant };

class OdeSystem {
 public:
  explicit OdeSystem(Params params);

  RhsId id() const;
  std::size_t dimension() const { return dimension_; }
  Domain domain() const;
  const Params& params() const { return params_; }
  // Upper edge of the starting box for Orthant systems.
  double box_size() const;

 private:
  Params params_;
  std::size_t dimension_;
};

std::string_view rhs_name(RhsId id);

// Builds a system from a name (eq1, eq2, eq4, eq6, eq8, eq9, eq10, eq11,
// voter) and `key = value` parameters.
OdeSystem make_system(std::string_view name, const ParamMap& params);

// Derivative at u; non-finite input raises ModelError.
Vector rhs(const OdeSystem& system, const Vector& u);

// Central-difference Jacobian.
Matrix jacobian(const OdeSystem& system, const Vector& u, double step = 1e-6);

class StiffnessError : public ModelError {
 public:
  using ModelError::ModelError;
};

struct IntegratorStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t evaluations = 0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  IntegratorStats stats;
};

using Field = std::function<Vector(const Vector&)>;

// Adaptive Dormand-Prince 5(4) integration of du/dt = f(u) from u0 over
// [0, horizon]. The trajectory holds u0 and the state at each requested
// sample time in (0, horizon] (default: just `horizon`). Steps are clipped
// to land on sample times. Step-size underflow raises StiffnessError.
Trajectory integrate(const Field& f, const Vector& u0, double horizon, double tol,
                     std::span<const double> sample_times = {});
Trajectory integrate(const OdeSystem& system, const Vector& u0, double horizon, double tol,
                     std::span<const double> sample_times = {});

enum class Stability { Stable, Unstable, Saddle, Marginal };
std::string_view stability_name(Stability s);

// Stable iff every real part < -margin, unstable iff every real part >
// margin, saddle when signs beyond the margin are mixed, marginal otherwise.
Stability classify(std::span<const std::complex<double>> eigenvalues, double margin);

struct FixedPointReport {
  Vector point;
  double residual = 0.0;
  std::vector<std::complex<double>> eigenvalues;
  Stability stability = Stability::Marginal;
  // Several nearby converged roots merged at a singular Jacobian (a
  // multiple root).
  bool degenerate = false;
};

struct FixedPointOptions {
  double tol = 1e-10;
  double margin = 1e-8;
  int lattice = 9;
  int max_iterations = 200;
};

struct FixedPointSearch {
  std::vector<FixedPointReport> roots;
  std::size_t dropped_starts = 0;
};

// Newton from a deterministic lattice of starts on the interior and on
// every boundary face of the domain. Roots are deduplicated at 10 * tol.
// On the simplex the Jacobian is taken in the n-1 free coordinates.
FixedPointSearch find_fixed_points(const OdeSystem& system, const FixedPointOptions& options = {});

enum class InvasionKind { GrassBushesTrees, HostPathogen, ColicinInterior };

struct InvasionResult {
  bool resident_extinct = false;
  bool invades = false;
  // LHS - RHS of the invasion inequality; for the colicin chain the smaller
  // of the two slacks.
  double margin = 0.0;
};

InvasionResult invasion_check(InvasionKind kind, const OdeSystem& system);
InvasionResult gbt_invasion(const GrassBushesTrees& p);
InvasionResult host_pathogen_invasion(const HostPathogen& p);
InvasionResult colicin_interior(const Colicin& p);

struct CyclicEquilibrium {
  Vector rho;
  // H(u) = sum_i rho_i log u_i, conserved by the cyclic voter ODE.
  double conserved(const Vector& u) const;
};

CyclicEquilibrium cyclic_equilibrium(double beta1, double beta2, double beta3);

struct LyapunovReport {
  double max_derivative = 0.0;
  std::size_t samples = 0;
  std::size_t convexity_violations = 0;
};

using ScalarField = std::function<double(const Vector&)>;

// Largest d(phi)/dt = grad(phi) . f over quasi-random interior points of the
// system's domain, with convexity checked on segment midpoints.
LyapunovReport check_lyapunov(const ScalarField& phi, const OdeSystem& system,
                              std::size_t samples);

// Halton points in the interior of the system's domain, each coordinate at
// least `margin` from the boundary.
std::vector<Vector> interior_samples(const OdeSystem& system, std::size_t count,
                                     double margin = 0.02);

}  // namespace ipsim::ode
