#include "ipsim/meanfield.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <limits>

#include "param_reader.hpp"

namespace ipsim::ode {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::size_t dimension_of(const Params& params) {
  return std::visit(Overloaded{
                        [](const CompetingContact&) -> std::size_t { return 2; },
                        [](const GrassBushesTrees&) -> std::size_t { return 2; },
                        [](const HostPathogen&) -> std::size_t { return 3; },
                        [](const Sexual&) -> std::size_t { return 1; },
                        [](const Catalyst&) -> std::size_t { return 2; },
                        [](const Colicin&) -> std::size_t { return 2; },
                        [](const Colicin3&) -> std::size_t { return 3; },
                        [](const HawkDove&) -> std::size_t { return 2; },
                        [](const Voter& v) -> std::size_t { return v.lambda.types(); },
                    },
                    params);
}

}  // namespace

OdeSystem::OdeSystem(Params params) : params_(std::move(params)), dimension_(dimension_of(params_)) {}

RhsId OdeSystem::id() const {
  static constexpr RhsId kIds[] = {RhsId::Eq1, RhsId::Eq2,  RhsId::Eq4,  RhsId::Eq6,  RhsId::Eq8,
                                   RhsId::Eq9, RhsId::Eq10, RhsId::Eq11, RhsId::Voter};
  return kIds[params_.index()];
}

Domain OdeSystem::domain() const {
  switch (id()) {
    case RhsId::Eq4:
    case RhsId::Voter:
      return Domain::Simplex;
    case RhsId::Eq6:
      return Domain::UnitInterval;
    case RhsId::Eq11:
      return Domain::Orthant;
    default:
      return Domain::SubSimplex;
  }
}

double OdeSystem::box_size() const {
  if (const auto* hd = std::get_if<HawkDove>(&params_)) {
    const double payoff = std::max({std::abs(hd->a), std::abs(hd->b), std::abs(hd->c),
                                    std::abs(hd->d)});
    return hd->kappa > 0.0 ? 1.5 * payoff / hd->kappa : 1.0;
  }
  return 1.0;
}

std::string_view rhs_name(RhsId id) {
  switch (id) {
    case RhsId::Eq1: return "eq1";
    case RhsId::Eq2: return "eq2";
    case RhsId::Eq4: return "eq4";
    case RhsId::Eq6: return "eq6";
    case RhsId::Eq8: return "eq8";
    case RhsId::Eq9: return "eq9";
    case RhsId::Eq10: return "eq10";
    case RhsId::Eq11: return "eq11";
    case RhsId::Voter: return "voter";
  }
  return "?";
}

OdeSystem make_system(std::string_view name, const ParamMap& params) {
  detail::ParamReader in(params);
  auto build = [&]() -> Params {
    if (name == "eq1") {
      return CompetingContact{in.number("beta1"), in.number("beta2"), in.number("delta1", 1.0),
                              in.number("delta2", 1.0)};
    }
    if (name == "eq2") {
      return GrassBushesTrees{in.number("beta1"), in.number("beta2"), in.number("delta1", 1.0),
                              in.number("delta2", 1.0)};
    }
    if (name == "eq4") {
      return HostPathogen{in.number("alpha"), in.number("gamma1"), in.number("gamma2"),
                          in.number("gamma3")};
    }
    if (name == "eq6") return Sexual{in.number("beta")};
    if (name == "eq8") {
      const double p = in.number("p");
      return Catalyst{p, in.number("q", 2.0 * (1.0 - p)), in.number("r", 1.0)};
    }
    if (name == "eq9") {
      return Colicin{in.number("beta1"), in.number("beta2"), in.number("delta1", 1.0),
                     in.number("delta2", 1.0), in.number("gamma")};
    }
    if (name == "eq10") {
      return Colicin3{in.number("beta1"),       in.number("beta2"),       in.number("beta3"),
                      in.number("delta1", 1.0), in.number("delta2", 1.0), in.number("delta3", 1.0),
                      in.number("gamma1"),      in.number("gamma2")};
    }
    if (name == "eq11") {
      return HawkDove{in.number("a", -0.6), in.number("b", 0.9), in.number("c", -0.9),
                      in.number("d", 0.7), in.number("kappa", 0.1)};
    }
    if (name == "voter") return Voter{detail::read_invasion_matrix(in)};
    throw ModelError("unknown ODE system '" + std::string(name) + "'");
  };
  OdeSystem system(build());
  in.finish();
  return system;
}

Vector rhs(const OdeSystem& system, const Vector& u) {
  if (static_cast<std::size_t>(u.size()) != system.dimension()) {
    throw ModelError("state dimension does not match the ODE system");
  }
  if (!u.allFinite()) throw ModelError("ODE state must be finite");
  Vector du(u.size());
  std::visit(
      Overloaded{
          [&](const CompetingContact& p) {
            const double free = 1.0 - u[0] - u[1];
            du[0] = p.beta1 * u[0] * free - p.delta1 * u[0];
            du[1] = p.beta2 * u[1] * free - p.delta2 * u[1];
          },
          [&](const GrassBushesTrees& p) {
            du[0] = p.beta1 * u[0] * (1.0 - u[0] - u[1]) - p.delta1 * u[0] - p.beta2 * u[1] * u[0];
            du[1] = p.beta2 * u[1] * (1.0 - u[1]) - p.delta2 * u[1];
          },
          [&](const HostPathogen& p) {
            du[0] = (u[0] + u[1]) * (p.gamma2 * u[1] + p.gamma3 * u[2]) - p.alpha * u[0] * u[1] -
                    p.gamma1 * u[0] * u[2];
            du[1] = p.alpha * u[0] * u[1] - p.gamma2 * u[1];
            du[2] = u[2] * (p.gamma1 * u[0] + p.gamma2 * u[1]) - p.gamma3 * u[2] * (u[0] + u[1]);
          },
          [&](const Sexual& p) { du[0] = -u[0] + p.beta * u[0] * u[0] * (1.0 - u[0]); },
          [&](const Catalyst& p) {
            const double free = 1.0 - u[0] - u[1];
            const double react = std::isinf(p.r) ? 0.0 : p.r * u[0] * u[1];
            du[0] = p.p * free - react;
            du[1] = p.q * free * free - react;
          },
          [&](const Colicin& p) {
            const double free = 1.0 - u[0] - u[1];
            du[0] = p.beta1 * u[0] * free - p.delta1 * u[0];
            du[1] = p.beta2 * u[1] * free - u[1] * (p.delta2 + p.gamma * u[0]);
          },
          [&](const Colicin3& p) {
            const double free = 1.0 - u[0] - u[1] - u[2];
            du[0] = p.beta1 * u[0] * free - p.delta1 * u[0];
            du[1] = p.beta2 * u[1] * free - p.delta2 * u[1];
            du[2] = p.beta3 * u[2] * free - u[2] * (p.delta3 + p.gamma1 * u[0] + p.gamma2 * u[1]);
          },
          [&](const HawkDove& p) {
            const double total = u[0] + u[1];
            if (total == 0.0) {
              du.setZero();
              return;
            }
            const double ph = u[0] / total;
            const double pd = u[1] / total;
            du[0] = u[0] * (p.a * ph + p.b * pd - p.kappa * total);
            du[1] = u[1] * (p.c * ph + p.d * pd - p.kappa * total);
          },
          [&](const Voter& p) {
            const auto k = p.lambda.types();
            for (std::size_t i = 0; i < k; ++i) {
              double s = 0.0;
              for (std::size_t j = 0; j < k; ++j) s += (p.lambda(i, j) - p.lambda(j, i)) * u[j];
              du[i] = u[i] * s;
            }
          },
      },
      system.params());
  return du;
}

Matrix jacobian(const OdeSystem& system, const Vector& u, double step) {
  const auto n = u.size();
  Matrix jac(n, n);
  Vector x = u;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double h = step * std::max(1.0, std::abs(u[j]));
    x[j] = u[j] + h;
    const Vector fp = rhs(system, x);
    x[j] = u[j] - h;
    const Vector fm = rhs(system, x);
    x[j] = u[j];
    jac.col(j) = (fp - fm) / (2.0 * h);
  }
  return jac;
}

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4)

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace

Trajectory integrate(const Field& f, const Vector& u0, double horizon, double tol,
                     std::span<const double> sample_times) {
  if (!(tol > 0.0)) throw ModelError("integrator tolerance must be positive");
  if (!(horizon >= 0.0)) throw ModelError("integration horizon must be non-negative");
  if (!u0.allFinite()) throw ModelError("initial state must be finite");

  std::vector<double> targets;
  for (double t : sample_times) {
    if (t > 0.0 && t <= horizon && (targets.empty() || t > targets.back())) targets.push_back(t);
  }
  if (sample_times.empty() && horizon > 0.0) targets.push_back(horizon);

  Trajectory out;
  out.times.push_back(0.0);
  out.states.push_back(u0);
  if (targets.empty()) return out;

  Vector u = u0;
  Vector k1 = f(u);
  out.stats.evaluations = 1;
  double t = 0.0;
  const double scale0 = std::max(1e-12, (k1.array().abs() / (tol + tol * u.array().abs())).maxCoeff());
  double h = std::min(horizon, 0.01 / scale0);
  h = std::max(h, 1e-6 * horizon);
  const double h_min = 1e-14 * std::max(1.0, horizon);

  for (double target : targets) {
    while (t < target) {
      const bool last = t + h >= target;
      const double step = last ? target - t : h;
      const Vector k2 = f(u + step * (a21 * k1));
      const Vector k3 = f(u + step * (a31 * k1 + a32 * k2));
      const Vector k4 = f(u + step * (a41 * k1 + a42 * k2 + a43 * k3));
      const Vector k5 = f(u + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
      const Vector k6 = f(u + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
      const Vector next = u + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      const Vector k7 = f(next);
      out.stats.evaluations += 6;
      const Vector err = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      const Eigen::ArrayXd sc = tol + tol * u.array().abs().max(next.array().abs());
      const double norm = std::sqrt((err.array() / sc).square().mean());
      if (!std::isfinite(norm)) throw StiffnessError("integrator produced a non-finite state");
      if (norm <= 1.0) {
        t = last ? target : t + step;
        u = next;
        k1 = k7;
        ++out.stats.accepted;
      } else {
        ++out.stats.rejected;
      }
      const double factor = norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(norm, -0.2), 0.2, 5.0);
      // Keep the unclipped step size when the clipped step was accepted.
      if (!(last && norm <= 1.0)) h = step * factor;
      if (h < h_min) throw StiffnessError("step size underflow at t = " + std::to_string(t));
    }
    out.times.push_back(t);
    out.states.push_back(u);
  }
  return out;
}

Trajectory integrate(const OdeSystem& system, const Vector& u0, double horizon, double tol,
                     std::span<const double> sample_times) {
  return integrate([&](const Vector& u) { return rhs(system, u); }, u0, horizon, tol,
                   sample_times);
}

// ---------------------------------------------------------------------------
// Fixed points

std::string_view stability_name(Stability s) {
  switch (s) {
    case Stability::Stable: return "stable";
    case Stability::Unstable: return "unstable";
    case Stability::Saddle: return "saddle";
    case Stability::Marginal: return "marginal";
  }
  return "?";
}

Stability classify(std::span<const std::complex<double>> eigenvalues, double margin) {
  bool any_neg = false;
  bool any_pos = false;
  bool all_neg = true;
  bool all_pos = true;
  for (const auto& z : eigenvalues) {
    const double re = z.real();
    any_neg = any_neg || re < -margin;
    any_pos = any_pos || re > margin;
    all_neg = all_neg && re < -margin;
    all_pos = all_pos && re > margin;
  }
  if (all_neg) return Stability::Stable;
  if (all_pos) return Stability::Unstable;
  if (any_neg && any_pos) return Stability::Saddle;
  return Stability::Marginal;
}

namespace {

// Maps a vector of active coordinates onto a full state. On the simplex the
// last free coordinate is 1 - (sum of the others).
struct FaceMap {
  std::size_t n = 0;
  std::vector<std::size_t> active;
  std::ptrdiff_t dependent = -1;

  Vector expand(const Vector& v) const {
    Vector u = Vector::Zero(static_cast<Eigen::Index>(n));
    double sum = 0.0;
    for (std::size_t k = 0; k < active.size(); ++k) {
      u[active[k]] = v[k];
      sum += v[k];
    }
    if (dependent >= 0) u[dependent] = 1.0 - sum;
    return u;
  }

  Vector restrict_rhs(const Vector& du) const {
    Vector r(static_cast<Eigen::Index>(active.size()));
    for (std::size_t k = 0; k < active.size(); ++k) r[k] = du[active[k]];
    return r;
  }
};

Matrix face_jacobian(const OdeSystem& system, const FaceMap& face, const Vector& v) {
  const auto m = v.size();
  Matrix jac(m, m);
  Vector x = v;
  for (Eigen::Index j = 0; j < m; ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(v[j]));
    x[j] = v[j] + h;
    const Vector fp = face.restrict_rhs(rhs(system, face.expand(x)));
    x[j] = v[j] - h;
    const Vector fm = face.restrict_rhs(rhs(system, face.expand(x)));
    x[j] = v[j];
    jac.col(j) = (fp - fm) / (2.0 * h);
  }
  return jac;
}

bool in_domain(const OdeSystem& system, const Vector& u) {
  constexpr double slack = 1e-8;
  if ((u.array() < -slack).any()) return false;
  switch (system.domain()) {
    case Domain::SubSimplex:
    case Domain::Simplex:
      return u.sum() <= 1.0 + slack;
    case Domain::UnitInterval:
      return u[0] <= 1.0 + slack;
    case Domain::Orthant:
      return true;
  }
  return true;
}

// Jacobian used for classification: full on open domains, in the n-1
// leading coordinates on the simplex.
Matrix stability_jacobian(const OdeSystem& system, const Vector& u) {
  if (system.domain() != Domain::Simplex) return jacobian(system, u);
  FaceMap face;
  face.n = system.dimension();
  for (std::size_t i = 0; i + 1 < face.n; ++i) face.active.push_back(i);
  face.dependent = static_cast<std::ptrdiff_t>(face.n - 1);
  return face_jacobian(system, face, u.head(u.size() - 1));
}

FixedPointReport make_report(const OdeSystem& system, const Vector& u, double margin) {
  FixedPointReport report;
  report.point = u;
  report.residual = rhs(system, u).lpNorm<Eigen::Infinity>();
  const Matrix jac = stability_jacobian(system, u);
  if (jac.size() > 0) {
    Eigen::EigenSolver<Matrix> solver(jac, false);
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
      report.eigenvalues.push_back(solver.eigenvalues()[i]);
    }
  }
  report.stability = classify(report.eigenvalues, margin);
  return report;
}

double smallest_modulus(const FixedPointReport& r) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& z : r.eigenvalues) m = std::min(m, std::abs(z));
  return m;
}

}  // namespace

FixedPointSearch find_fixed_points(const OdeSystem& system, const FixedPointOptions& options) {
  if (!(options.tol > 0.0)) throw ModelError("fixed point tolerance must be positive");
  const std::size_t n = system.dimension();
  const bool simplex = system.domain() == Domain::Simplex;
  const double box = system.box_size();

  // Faces: every subset of coordinates pinned to zero, most-pinned first so
  // exact boundary roots are recorded before interior starts reach them.
  std::vector<std::uint32_t> masks;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (simplex && static_cast<std::size_t>(std::popcount(mask)) == n) continue;
    masks.push_back(mask);
  }
  std::stable_sort(masks.begin(), masks.end(), [](std::uint32_t a, std::uint32_t b) {
    return std::popcount(a) > std::popcount(b);
  });

  FixedPointSearch search;
  std::vector<Vector> found;
  for (std::uint32_t mask : masks) {
    FaceMap face;
    face.n = n;
    std::vector<std::size_t> free;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(mask & (1u << i))) free.push_back(i);
    }
    if (simplex) {
      face.dependent = static_cast<std::ptrdiff_t>(free.back());
      free.pop_back();
    }
    face.active = free;
    const std::size_t m = free.size();

    std::size_t starts = 1;
    for (std::size_t k = 0; k < m; ++k) starts *= static_cast<std::size_t>(options.lattice);
    for (std::size_t s = 0; s < starts; ++s) {
      Vector v(static_cast<Eigen::Index>(m));
      std::size_t code = s;
      for (std::size_t k = 0; k < m; ++k) {
        const auto idx = code % options.lattice;
        code /= options.lattice;
        const double frac =
            options.lattice == 1 ? 0.5 : 0.01 + 0.98 * static_cast<double>(idx) / (options.lattice - 1);
        v[k] = frac * box;
      }
      if ((system.domain() == Domain::SubSimplex || simplex) && v.sum() > 1.0) continue;

      bool ok = true;
      for (int it = 0; it < options.max_iterations && m > 0; ++it) {
        const Vector r = face.restrict_rhs(rhs(system, face.expand(v)));
        if (r.lpNorm<Eigen::Infinity>() == 0.0) break;
        const Matrix jac = face_jacobian(system, face, v);
        const Vector delta = jac.completeOrthogonalDecomposition().solve(r);
        if (!delta.allFinite()) {
          ok = false;
          break;
        }
        v -= delta;
        if (!v.allFinite() || v.lpNorm<Eigen::Infinity>() > 1e3 * box) {
          ok = false;
          break;
        }
        if (delta.lpNorm<Eigen::Infinity>() <= options.tol * std::max(1.0, v.lpNorm<Eigen::Infinity>())) {
          break;
        }
      }
      if (!ok) {
        ++search.dropped_starts;
        continue;
      }
      const Vector u = face.expand(v);
      if (!in_domain(system, u) || rhs(system, u).lpNorm<Eigen::Infinity>() > options.tol) {
        ++search.dropped_starts;
        continue;
      }
      const bool duplicate = std::any_of(found.begin(), found.end(), [&](const Vector& w) {
        return (w - u).lpNorm<Eigen::Infinity>() <= 10.0 * options.tol;
      });
      if (!duplicate) found.push_back(u);
    }
  }

  for (const auto& u : found) search.roots.push_back(make_report(system, u, options.margin));

  // Merge clusters of roots around a singular Jacobian: Newton only reaches a
  // multiple root to about sqrt(machine precision), so different starts land
  // at slightly different points.
  const double singular = std::sqrt(options.tol);
  std::vector<FixedPointReport> merged;
  std::vector<bool> used(search.roots.size(), false);
  for (std::size_t i = 0; i < search.roots.size(); ++i) {
    if (used[i]) continue;
    const auto& root = search.roots[i];
    if (smallest_modulus(root) > singular) {
      merged.push_back(root);
      continue;
    }
    Vector sum = root.point;
    int members = 1;
    for (std::size_t j = i + 1; j < search.roots.size(); ++j) {
      if (used[j]) continue;
      if ((search.roots[j].point - root.point).lpNorm<Eigen::Infinity>() <= 1e-5) {
        used[j] = true;
        sum += search.roots[j].point;
        ++members;
      }
    }
    auto report = make_report(system, sum / members, options.margin);
    report.degenerate = true;
    merged.push_back(std::move(report));
  }
  search.roots = std::move(merged);
  return search;
}

// ---------------------------------------------------------------------------
// Invasion conditions

InvasionResult gbt_invasion(const GrassBushesTrees& p) {
  InvasionResult out;
  if (!(p.beta2 > p.delta2)) {
    out.resident_extinct = true;
    return out;
  }
  const double lhs = p.beta1 * p.delta2 / p.beta2;
  const double rhs_value = p.delta1 + p.beta2 * (p.beta2 - p.delta2) / p.beta2;
  out.margin = lhs - rhs_value;
  out.invades = out.margin > 0.0;
  return out;
}

InvasionResult host_pathogen_invasion(const HostPathogen& p) {
  InvasionResult out;
  if (!(p.gamma2 < p.alpha)) {
    out.resident_extinct = true;
    return out;
  }
  const double resident = p.gamma2 / p.alpha;
  out.margin = p.gamma1 * resident + p.gamma2 * (1.0 - resident) - p.gamma3;
  out.invades = out.margin > 0.0;
  return out;
}

InvasionResult colicin_interior(const Colicin& p) {
  InvasionResult out;
  if (!(p.delta1 < p.beta1 && p.delta2 < p.beta2)) {
    out.resident_extinct = true;
    return out;
  }
  const double low = p.delta2 / p.beta2;
  const double mid = p.delta1 / p.beta1;
  const double high = (p.delta2 + p.gamma) / (p.beta2 + p.gamma);
  out.margin = std::min(mid - low, high - mid);
  out.invades = out.margin > 0.0;
  return out;
}

InvasionResult invasion_check(InvasionKind kind, const OdeSystem& system) {
  switch (kind) {
    case InvasionKind::GrassBushesTrees:
      if (const auto* p = std::get_if<GrassBushesTrees>(&system.params())) return gbt_invasion(*p);
      break;
    case InvasionKind::HostPathogen:
      if (const auto* p = std::get_if<HostPathogen>(&system.params())) {
        return host_pathogen_invasion(*p);
      }
      break;
    case InvasionKind::ColicinInterior:
      if (const auto* p = std::get_if<Colicin>(&system.params())) return colicin_interior(*p);
      break;
  }
  throw ModelError("invasion check does not apply to ODE system " +
                   std::string(rhs_name(system.id())));
}

// ---------------------------------------------------------------------------
// Cyclic voter

CyclicEquilibrium cyclic_equilibrium(double beta1, double beta2, double beta3) {
  if (!(beta1 > 0.0 && beta2 > 0.0 && beta3 > 0.0)) {
    throw ModelError("cyclic equilibrium needs all beta_i > 0");
  }
  const double total = beta1 + beta2 + beta3;
  CyclicEquilibrium eq;
  eq.rho = Vector(3);
  eq.rho << beta3 / total, beta1 / total, beta2 / total;
  return eq;
}

double CyclicEquilibrium::conserved(const Vector& u) const {
  return (rho.array() * u.array().log()).sum();
}

// ---------------------------------------------------------------------------
// Lyapunov checks

namespace {

double radical_inverse(std::size_t index, unsigned base) {
  double result = 0.0;
  double f = 1.0 / base;
  while (index > 0) {
    result += f * static_cast<double>(index % base);
    index /= base;
    f /= base;
  }
  return result;
}

double distance_to_boundary(const OdeSystem& system, const Vector& u) {
  double d = u.minCoeff();
  if (system.domain() == Domain::SubSimplex) d = std::min(d, 1.0 - u.sum());
  if (system.domain() == Domain::UnitInterval) d = std::min(d, 1.0 - u[0]);
  return d;
}

}  // namespace

std::vector<Vector> interior_samples(const OdeSystem& system, std::size_t count, double margin) {
  static constexpr std::array<unsigned, 8> kPrimes{2, 3, 5, 7, 11, 13, 17, 19};
  const std::size_t n = system.dimension();
  const bool simplex = system.domain() == Domain::Simplex;
  const std::size_t dims = simplex ? n - 1 : n;
  const double box = system.box_size();
  std::vector<Vector> out;
  for (std::size_t index = 1; out.size() < count && index < 1000 * count + 1000; ++index) {
    Vector u(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < dims; ++k) u[k] = radical_inverse(index, kPrimes[k % kPrimes.size()]) * box;
    if (simplex) u[n - 1] = 1.0 - u.head(n - 1).sum();
    if (distance_to_boundary(system, u) >= margin) out.push_back(u);
  }
  return out;
}

LyapunovReport check_lyapunov(const ScalarField& phi, const OdeSystem& system,
                              std::size_t samples) {
  LyapunovReport report;
  const auto points = interior_samples(system, samples);
  report.samples = points.size();
  report.max_derivative = points.empty() ? 0.0 : -std::numeric_limits<double>::infinity();
  for (const auto& u : points) {
    const Vector f = rhs(system, u);
    const double speed = f.lpNorm<Eigen::Infinity>();
    double derivative = 0.0;
    if (speed > 0.0) {
      // Richardson-extrapolated central difference along the flow direction.
      const double h = 1e-3 * distance_to_boundary(system, u) / speed;
      const auto central = [&](double step) {
        return (phi(u + step * f) - phi(u - step * f)) / (2.0 * step);
      };
      derivative = (4.0 * central(h / 2.0) - central(h)) / 3.0;
    }
    report.max_derivative = std::max(report.max_derivative, derivative);
  }
  for (std::size_t k = 0; k + 1 < points.size(); ++k) {
    const double fa = phi(points[k]);
    const double fb = phi(points[k + 1]);
    const double mid = phi(0.5 * (points[k] + points[k + 1]));
    if (mid > 0.5 * (fa + fb) + 1e-12 * (1.0 + std::abs(fa) + std::abs(fb))) {
      ++report.convexity_violations;
    }
  }
  return report;
}

}  // namespace ipsim::ode
