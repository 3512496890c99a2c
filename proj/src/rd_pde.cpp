#include "ipsim/rd_pde.hpp"

#include <charconv>
#include <cmath>
#include <utility>

namespace ipsim::pde {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void append_number(std::string& out, double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  out.append(buf, ptr);
}

}  // namespace

std::size_t components(const Reaction& reaction) {
  return std::visit(Overloaded{
                        [](const SexualReaction&) -> std::size_t { return 1; },
                        [](const CatalystReaction&) -> std::size_t { return 2; },
                        [](const NoReaction& r) -> std::size_t { return r.components; },
                    },
                    reaction);
}

void react(const Reaction& reaction, const double* u, double* out) {
  std::visit(Overloaded{
                 [&](const SexualReaction& s) { out[0] = u[0] * (-1.0 + s.beta * u[0] * (1.0 - u[0])); },
                 [&](const CatalystReaction& c) {
                   const double free = 1.0 - u[0] - u[1];
                   const double rr = c.r * u[0] * u[1];
                   out[0] = c.p * free - rr;
                   out[1] = c.q * free * free - rr;
                 },
                 [&](const NoReaction& n) {
                   for (std::size_t k = 0; k < n.components; ++k) out[k] = 0.0;
                 },
             },
             reaction);
}

PdeState make_state(std::size_t cells, std::size_t comps, double dx, double dt) {
  if (cells < 3) throw ModelError("PDE grid needs at least 3 cells");
  if (comps == 0) throw ModelError("PDE state needs at least one component");
  if (!(dx > 0.0) || !(dt > 0.0)) throw ModelError("dx and dt must be positive");
  PdeState state;
  state.cells = cells;
  state.comps = comps;
  state.dx = dx;
  state.dt = dt;
  state.values.assign(cells * comps, 0.0);
  return state;
}

PdeState step_profile(std::size_t cells, double dx, double dt, const std::vector<double>& left,
                      const std::vector<double>& right) {
  if (left.size() != right.size()) throw ModelError("front states differ in dimension");
  PdeState state = make_state(cells, left.size(), dx, dt);
  for (std::size_t i = 0; i < cells; ++i) {
    const auto& side = i < cells / 2 ? left : right;
    for (std::size_t c = 0; c < state.comps; ++c) state.at(i, c) = side[c];
  }
  return state;
}

void check_stability(const PdeState& state) {
  const double limit = state.dx * state.dx / (2.0 * static_cast<double>(state.comps));
  if (state.dt > limit) {
    throw ModelError("dt = " + std::to_string(state.dt) + " exceeds the stability bound " +
                     std::to_string(limit));
  }
  for (double v : state.values) {
    if (!std::isfinite(v)) throw ModelError("PDE state is not finite");
  }
}

void integrate_pde(const Reaction& reaction, PdeState& state, double T) {
  if (components(reaction) != state.comps) {
    throw ModelError("reaction and state differ in component count");
  }
  if (!(T >= 0.0)) throw ModelError("PDE horizon must be non-negative");
  check_stability(state);

  const std::size_t n = state.cells;
  const std::size_t m = state.comps;
  std::vector<double> next(state.values.size());
  std::vector<double> g(m);
  const double end = state.time + T;
  const auto steps = static_cast<std::size_t>(std::floor(T / state.dt + 1e-9));
  const double tail = T - static_cast<double>(steps) * state.dt;

  auto advance = [&](double dt) {
    const double coef = dt / (state.dx * state.dx);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t lo = i == 0 ? 0 : i - 1;
      const std::size_t hi = i + 1 == n ? n - 1 : i + 1;
      const double* u = &state.values[i * m];
      react(reaction, u, g.data());
      for (std::size_t c = 0; c < m; ++c) {
        const double lap = state.values[lo * m + c] - 2.0 * u[c] + state.values[hi * m + c];
        next[i * m + c] = u[c] + coef * lap + dt * g[c];
      }
    }
    state.values.swap(next);
  };

  for (std::size_t s = 0; s < steps; ++s) advance(state.dt);
  if (tail > 1e-12 * state.dt) advance(tail);
  state.time = end;
  for (double v : state.values) {
    if (!std::isfinite(v)) throw ModelError("PDE solution blew up");
  }
}

double rho2(double beta) {
  if (!(beta > 4.0)) throw ModelError("rho2 needs beta > 4");
  return 0.5 * (1.0 + std::sqrt(1.0 - 4.0 / beta));
}

double rho1(double beta) {
  if (!(beta > 4.0)) throw ModelError("rho1 needs beta > 4");
  return 0.5 * (1.0 - std::sqrt(1.0 - 4.0 / beta));
}

double speed_integral(double beta) {
  const double r = rho2(beta);
  const double r2 = r * r;
  return -r2 / 2.0 + beta * r2 * r / 3.0 - beta * r2 * r2 / 4.0;
}

int speed_sign(double beta) {
  const double value = speed_integral(beta);
  if (std::abs(value) <= 1e-12) return 0;
  return value > 0.0 ? 1 : -1;
}

double analytic_sexual_speed(double beta) {
  return std::sqrt(beta / 2.0) * (rho2(beta) - 2.0 * rho1(beta));
}

double front_position(const PdeState& state, double level) {
  for (std::size_t i = 0; i + 1 < state.cells; ++i) {
    const double a = state.at(i) - level;
    const double b = state.at(i + 1) - level;
    if (a == 0.0) return state.x(i);
    if ((a > 0.0) != (b > 0.0) && b != 0.0) {
      return state.x(i) + state.dx * a / (a - b);
    }
  }
  return -1.0;
}

WaveSpeedEstimate estimate_front_speed(const Reaction& reaction, PdeState state, double level,
                                       const FrontSetup& setup) {
  if (!(setup.horizon > 0.0) || !(setup.sample_every > 0.0)) {
    throw ModelError("front tracking needs a positive horizon and sampling interval");
  }
  WaveSpeedEstimate est;
  est.level = level;
  est.valid = true;
  const double length = state.x(state.cells - 1);
  const auto samples = static_cast<std::size_t>(std::floor(setup.horizon / setup.sample_every + 1e-9));
  for (std::size_t k = 0; k <= samples; ++k) {
    if (k > 0) integrate_pde(reaction, state, setup.sample_every);
    const double pos = front_position(state, level);
    if (pos < 0.05 * length || pos > 0.95 * length) {
      est.valid = false;
      break;
    }
    est.times.push_back(state.time);
    est.positions.push_back(pos);
  }
  if (!est.valid || est.times.size() < 4) {
    est.valid = false;
    return est;
  }

  const double t_end = est.times.back();
  const double t_start = t_end / 2.0;
  double st = 0.0, sx = 0.0, stt = 0.0, stx = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < est.times.size(); ++k) {
    if (est.times[k] < t_start) continue;
    st += est.times[k];
    sx += est.positions[k];
    stt += est.times[k] * est.times[k];
    stx += est.times[k] * est.positions[k];
    ++count;
  }
  const double nn = static_cast<double>(count);
  const double denom = nn * stt - st * st;
  est.speed = (nn * stx - st * sx) / denom;
  const double intercept = (sx - est.speed * st) / nn;
  double ss = 0.0;
  for (std::size_t k = 0; k < est.times.size(); ++k) {
    if (est.times[k] < t_start) continue;
    const double e = est.positions[k] - (intercept + est.speed * est.times[k]);
    ss += e * e;
  }
  est.residual = std::sqrt(ss / nn);
  est.window_start = t_start;
  est.window_end = t_end;
  return est;
}

WaveSpeedEstimate estimate_front_speed(const Reaction& reaction, const FrontSetup& setup) {
  if (const auto* s = std::get_if<SexualReaction>(&reaction)) {
    const double r = rho2(s->beta);
    PdeState state = step_profile(setup.cells, setup.dx, setup.dt, {r}, {0.0});
    return estimate_front_speed(reaction, std::move(state), r / 2.0, setup);
  }
  if (const auto* c = std::get_if<CatalystReaction>(&reaction)) {
    const auto fp = catalyst_fixed_points(c->p, c->q, c->r);
    if (!fp.interior) throw ModelError("catalyst parameters have no interior fixed point");
    PdeState state =
        step_profile(setup.cells, setup.dx, setup.dt, {fp.alpha, fp.beta}, {1.0, 0.0});
    return estimate_front_speed(reaction, std::move(state), (fp.alpha + 1.0) / 2.0, setup);
  }
  throw ModelError("front speed needs a sexual or catalyst reaction");
}

CriticalBeta critical_beta(double lo, double hi, double tol, const FrontSetup& setup) {
  if (!(lo < hi)) throw ModelError("critical_beta bracket must satisfy lo < hi");
  if (!(tol > 0.0)) throw ModelError("critical_beta tolerance must be positive");
  CriticalBeta out;
  auto sign_at = [&](double beta) {
    ++out.probes;
    const auto est = estimate_front_speed(SexualReaction{beta}, setup);
    if (!est.valid) {
      throw ModelError("front left the domain at beta = " + std::to_string(beta));
    }
    return est.speed > 0.0;
  };
  const bool s_lo = sign_at(lo);
  const bool s_hi = sign_at(hi);
  if (s_lo == s_hi) throw ModelError("bracket endpoints give the same front-speed sign");
  while ((hi - lo) / 2.0 > tol) {
    const double mid = 0.5 * (lo + hi);
    if (sign_at(mid) == s_lo) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  out.beta = 0.5 * (lo + hi);
  out.tolerance = 0.5 * (hi - lo);
  return out;
}

CatalystFixedPoints catalyst_fixed_points(double p, double q, double r) {
  if (!(p >= 0.0 && q > 0.0 && r > 0.0)) throw ModelError("catalyst needs p >= 0, q > 0, r > 0");
  CatalystFixedPoints out;
  out.points.push_back({1.0, 0.0});
  out.points.push_back({0.0, 1.0});
  if (!(p < q)) return out;
  const double disc = (q - p) * (q - p) - 4.0 * q * p * p / r;
  if (disc < 0.0) return out;
  const double root = std::sqrt(disc);
  out.alpha = ((q - p) - root) / (2.0 * q);
  out.beta = ((q - p) + root) / (2.0 * q);
  out.interior = true;
  out.points.push_back({out.alpha, out.beta});
  out.points.push_back({out.beta, out.alpha});
  return out;
}

std::string profile_csv(const PdeState& state) {
  std::string out = "x";
  for (std::size_t c = 0; c < state.comps; ++c) out += ",u_" + std::to_string(c + 1);
  out += '\n';
  for (std::size_t i = 0; i < state.cells; ++i) {
    append_number(out, state.x(i));
    for (std::size_t c = 0; c < state.comps; ++c) {
      out += ',';
      append_number(out, state.at(i, c));
    }
    out += '\n';
  }
  return out;
}

}  // namespace ipsim::pde
